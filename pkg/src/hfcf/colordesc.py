"""Color texture descriptors: classical LBP codes and their sparse decoding.

LBP codes compare each pixel against its 8 neighbors (bit order: top-left
neighbor first, then clockwise; ties set the bit). The decoded stack (DLBP)
splits the codes of 8 derived color channels into 64 bit-planes, each
carrying the full code value wherever its bit is set. The result is sparse
and visually unstructured, which is what makes it usable as a
privacy-friendly color carrier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimError, SpaceError
from .tensorio import ColorSpace, RasterImage, Tensor3, rgb_to_ycbcr

# (drow, dcol) for bits 0..7: top-left neighbor, then clockwise.
_NEIGHBORS = (
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
)

CHANNEL_NAMES = ("R", "G", "B", "Y", "Cb", "Cr", "D1", "D2")
DLBP_DEPTH = 64


@dataclass(frozen=True)
class LbpCodeImage:
    """H x W integer codes in [0, 255] computed from one grayscale channel."""

    codes: np.ndarray
    source_channel: str

    def __post_init__(self):
        arr = np.asarray(self.codes)
        if arr.ndim != 2:
            raise DimError(f"expected a 2-D code grid, got shape {arr.shape}")
        object.__setattr__(self, "codes", arr.astype(np.int64))

    @property
    def height(self) -> int:
        return self.codes.shape[0]

    @property
    def width(self) -> int:
        return self.codes.shape[1]


@dataclass(frozen=True)
class DlbpStack:
    """Sparse decoded-LBP planes; depth 64 raw, 63 once the first is dropped."""

    tensor: Tensor3

    def __post_init__(self):
        if self.tensor.depth not in (63, 64):
            raise DimError(f"DLBP stack must have 63 or 64 planes, got {self.tensor.depth}")

    @property
    def depth(self) -> int:
        return self.tensor.depth

    @property
    def sparsity(self) -> float:
        """Fraction of zero entries (diagnostic)."""
        return float(np.mean(self.tensor.data == 0.0))

    def plane(self, index: int) -> np.ndarray:
        return self.tensor.plane(index)


def lbp_codes(channel: np.ndarray, source_channel: str = "") -> LbpCodeImage:
    """8-neighbor LBP codes of one plane, border handled by edge replication.

    Bit b is set iff the b-th neighbor is >= the center pixel.
    """
    plane = np.asarray(channel, dtype=np.float64)
    if plane.ndim != 2 or plane.shape[0] < 3 or plane.shape[1] < 3:
        raise DimError(f"LBP needs at least a 3x3 plane, got shape {plane.shape}")
    padded = np.pad(plane, 1, mode="edge")
    h, w = plane.shape
    codes = np.zeros((h, w), dtype=np.int64)
    for bit, (dr, dc) in enumerate(_NEIGHBORS):
        neighbor = padded[1 + dr : 1 + dr + h, 1 + dc : 1 + dc + w]
        codes |= (neighbor >= plane).astype(np.int64) << bit
    return LbpCodeImage(codes, source_channel)


def derive_channels(img: RasterImage) -> list[np.ndarray]:
    """Eight grayscale planes from an RGB image, in fixed order.

    R, G, B, the BT.601 Y/Cb/Cr components, and two opponent-color
    differences D1 = (R - G + 255) / 2 and D2 = (G - B + 255) / 2,
    all clamped to [0, 255].
    """
    if img.space != ColorSpace.RGB:
        raise SpaceError(f"expected RGB input, got {img.space.value}")
    r, g, b = (img.channel(i) for i in range(3))
    ycc = rgb_to_ycbcr(img)
    d1 = np.clip((r - g + 255.0) / 2.0, 0.0, 255.0)
    d2 = np.clip((g - b + 255.0) / 2.0, 0.0, 255.0)
    return [r, g, b, ycc.channel(0), ycc.channel(1), ycc.channel(2), d1, d2]


def decode_dlbp(codes: list[LbpCodeImage]) -> DlbpStack:
    """Decode 8 LBP code images into the 64-plane sparse stack.

    Plane 8*c + b holds, per pixel, the full code of channel c where bit b
    of that code is set, else 0. The code magnitude is kept (not a binary
    mask) so multiplicative fusion stays informative.
    """
    if len(codes) != 8:
        raise DimError(f"expected 8 code images, got {len(codes)}")
    shape = (codes[0].height, codes[0].width)
    for c in codes:
        if (c.height, c.width) != shape:
            raise DimError("all code images must share dimensions")
    planes = np.zeros(shape + (DLBP_DEPTH,), dtype=np.float64)
    labels = []
    for c, code_img in enumerate(codes):
        vals = code_img.codes
        for bit in range(8):
            mask = (vals >> bit) & 1
            planes[:, :, 8 * c + bit] = vals * mask
            name = code_img.source_channel or f"ch{c}"
            labels.append(f"dlbp:{name}.b{bit}")
    return DlbpStack(Tensor3(planes, labels))


def lbp_rgb(img: RasterImage) -> list[LbpCodeImage]:
    """LBP codes computed separately on the R, G, B channels."""
    if img.space != ColorSpace.RGB:
        raise SpaceError(f"expected RGB input, got {img.space.value}")
    return [lbp_codes(img.channel(i), name) for i, name in enumerate(("R", "G", "B"))]


def dlbp_from_image(img: RasterImage) -> DlbpStack:
    """Full descriptor path: derive 8 channels, code each, decode the stack."""
    channels = derive_channels(img)
    codes = [lbp_codes(ch, name) for ch, name in zip(channels, CHANNEL_NAMES)]
    return decode_dlbp(codes)

"""8x8 block DCT with per-frequency channelization.

A YCbCr image whose sides are divisible by 8 is transformed blockwise with
the orthonormal (JPEG-scaled) 2-D DCT-II after a -128 level shift. The
coefficient at frequency (u, v) of every block is gathered into one plane,
so an H x W image yields H/8 x W/8 planes, 64 per color component, indexed
in zig-zag order (plane 0 is the DC). All coefficients land in
[-1024, 1024) for inputs in [0, 255].
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimError, LayoutError, SpaceError
from .tensorio import ColorSpace, RasterImage, Tensor3

BLOCK = 8
COMPONENTS = ("Y", "Cb", "Cr")


class Layout(str, enum.Enum):
    FULL192 = "Full192"
    AC189 = "Ac189"
    FUSED63 = "Fused63"


_LAYOUT_DEPTH = {Layout.FULL192: 192, Layout.AC189: 189, Layout.FUSED63: 63}


class PlaneTag(NamedTuple):
    """Provenance of one coefficient plane: source component + zig-zag index."""

    component: str  # "Y", "Cb", "Cr" or "mixed"
    freq: int  # zig-zag frequency index, 0 = DC

    def __str__(self) -> str:
        return f"{self.component}:{self.freq:02d}"


def zigzag_order(n: int = BLOCK) -> list[tuple[int, int]]:
    """(row, col) frequency pairs in JPEG zig-zag scan order.

    Index 0 is (0, 0); index 1 is (0, 1); odd anti-diagonals are walked
    downward, even ones upward.
    """
    pairs = [(u, v) for u in range(n) for v in range(n)]
    pairs.sort(key=lambda uv: (uv[0] + uv[1], uv[0] if (uv[0] + uv[1]) % 2 else -uv[0]))
    return pairs


_ZIGZAG = zigzag_order()
# flat (u*8+v) index of the k-th zig-zag entry
_ZZ_FLAT = np.array([u * BLOCK + v for u, v in _ZIGZAG])


def _dct_matrix() -> np.ndarray:
    u, x = np.meshgrid(np.arange(BLOCK), np.arange(BLOCK), indexing="ij")
    m = np.sqrt(2.0 / BLOCK) * np.cos((2 * x + 1) * u * np.pi / (2 * BLOCK))
    m[0, :] /= np.sqrt(2.0)
    return m


_DCT_M = _dct_matrix()


@dataclass(frozen=True)
class DctTensor:
    """Stack of coefficient planes plus layout and per-plane provenance."""

    tensor: Tensor3
    layout: Layout
    tags: tuple[PlaneTag, ...]

    def __post_init__(self):
        want = _LAYOUT_DEPTH[self.layout]
        if self.tensor.depth != want:
            raise LayoutError(
                f"layout {self.layout.value} requires {want} planes, "
                f"got {self.tensor.depth}"
            )
        if len(self.tags) != self.tensor.depth:
            raise LayoutError("one provenance tag required per plane")
        object.__setattr__(self, "tags", tuple(self.tags))

    @property
    def height(self) -> int:
        return self.tensor.height

    @property
    def width(self) -> int:
        return self.tensor.width

    @property
    def depth(self) -> int:
        return self.tensor.depth

    def plane(self, index: int) -> np.ndarray:
        return self.tensor.plane(index)

    def component_of_plane(self, index: int) -> PlaneTag:
        return self.tags[index]


@dataclass(frozen=True)
class DcPlanes:
    """The three DC coefficient planes (level-shifted block means times 8)."""

    y: np.ndarray
    cb: np.ndarray
    cr: np.ndarray


def _blockify(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    return plane.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK).transpose(0, 2, 1, 3)


def _unblockify(blocks: np.ndarray) -> np.ndarray:
    bh, bw = blocks.shape[:2]
    return blocks.transpose(0, 2, 1, 3).reshape(bh * BLOCK, bw * BLOCK)


def forward_bdct(img: RasterImage) -> DctTensor:
    """Blockwise DCT of a YCbCr image into a Full192 coefficient tensor.

    Planes are ordered component-major: Y's 64 zig-zag planes, then Cb's,
    then Cr's.
    """
    if img.space != ColorSpace.YCBCR:
        raise SpaceError(f"expected YCbCr input, got {img.space.value}")
    if img.channels != 3:
        raise SpaceError("expected a 3-channel image")
    if img.height % BLOCK or img.width % BLOCK:
        raise DimError(
            f"image dimensions {img.height}x{img.width} not divisible by {BLOCK}"
        )
    planes = []
    tags = []
    for c, name in enumerate(COMPONENTS):
        blocks = _blockify(img.channel(c) - 128.0)
        coeffs = np.einsum("ux,hwxy,vy->hwuv", _DCT_M, blocks, _DCT_M, optimize=True)
        bh, bw = coeffs.shape[:2]
        planes.append(coeffs.reshape(bh, bw, BLOCK * BLOCK)[:, :, _ZZ_FLAT])
        tags.extend(PlaneTag(name, k) for k in range(BLOCK * BLOCK))
    data = np.concatenate(planes, axis=2)
    labels = [str(t) for t in tags]
    return DctTensor(Tensor3(data, labels), Layout.FULL192, tuple(tags))


def inverse_bdct(t: DctTensor) -> RasterImage:
    """Invert a Full192 tensor back to a YCbCr image.

    AC-only and fused layouts are rejected: once the DC is discarded the
    transform is irreversible by construction.
    """
    if t.layout != Layout.FULL192:
        raise LayoutError(f"cannot invert layout {t.layout.value}; Full192 required")
    channels = []
    for c in range(3):
        comp = t.tensor.data[:, :, 64 * c : 64 * (c + 1)]
        bh, bw = comp.shape[:2]
        flat = np.empty_like(comp)
        flat[:, :, _ZZ_FLAT] = comp
        blocks = flat.reshape(bh, bw, BLOCK, BLOCK)
        pix = np.einsum("xu,hwuv,yv->hwxy", _DCT_M.T, blocks, _DCT_M.T, optimize=True)
        channels.append(_unblockify(pix) + 128.0)
    data = np.clip(np.stack(channels, axis=2), 0.0, 255.0)
    return RasterImage(data, ColorSpace.YCBCR)


def channel_energy(plane: np.ndarray) -> float:
    """Sum of squared coefficients of one plane."""
    p = np.asarray(plane, dtype=np.float64)
    return float(np.sum(p * p))


def split_dc(t: DctTensor) -> tuple[DcPlanes, DctTensor]:
    """Separate the three DC planes from a Full192 tensor, leaving Ac189."""
    if t.layout != Layout.FULL192:
        raise LayoutError(f"split_dc requires Full192, got {t.layout.value}")
    dc = DcPlanes(
        y=t.plane(0).copy(), cb=t.plane(64).copy(), cr=t.plane(128).copy()
    )
    keep = [i for i in range(192) if i % 64 != 0]
    data = t.tensor.data[:, :, keep]
    tags = tuple(t.tags[i] for i in keep)
    return dc, DctTensor(Tensor3(data, [str(g) for g in tags]), Layout.AC189, tags)

"""Image and tensor containers, color conversion, upsampling, and serialization.

Everything downstream works on two containers: ``RasterImage`` (H x W x C
pixel grids in a named color space, values in [0, 255]) and ``Tensor3``
(H x W x K float stacks with optional per-plane labels). Both are thin
wrappers over float64 numpy arrays; all operations here are pure.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DimError, FormatError, SpaceError

TENSOR_MAGIC = b"HFT1"
EMBEDDING_MAGIC = b"HFT1"  # embeddings reuse the tensor container with depth 1

# BT.601 full-range (JPEG convention) RGB -> YCbCr coefficients.
_YCBCR_MATRIX = np.array(
    [
        [0.299, 0.587, 0.114],
        [-0.168736, -0.331264, 0.5],
        [0.5, -0.418688, -0.081312],
    ]
)
_YCBCR_OFFSET = np.array([0.0, 128.0, 128.0])


class ColorSpace(str, enum.Enum):
    RGB = "RGB"
    YCBCR = "YCbCr"
    GRAY = "Gray"


@dataclass(frozen=True)
class RasterImage:
    """Pixel grid with values in [0, 255], shape (height, width, channels)."""

    data: np.ndarray
    space: ColorSpace

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise DimError(f"expected (H, W, 1|3) pixel array, got shape {arr.shape}")
        if arr.size and (arr.min() < 0.0 or arr.max() > 255.0):
            raise ValueError("pixel values must lie in [0, 255]")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def channel(self, index: int) -> np.ndarray:
        return self.data[:, :, index]


@dataclass(frozen=True)
class Tensor3:
    """H x W x K stack of float64 planes with optional provenance labels."""

    data: np.ndarray
    labels: list[str] | None = field(default=None)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise DimError(f"expected a rank-3 array, got shape {arr.shape}")
        if self.labels is not None and len(self.labels) != arr.shape[2]:
            raise DimError(
                f"{len(self.labels)} labels for {arr.shape[2]} planes"
            )
        object.__setattr__(self, "data", arr)
        if self.labels is not None:
            object.__setattr__(self, "labels", list(self.labels))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def depth(self) -> int:
        return self.data.shape[2]

    def plane(self, index: int) -> np.ndarray:
        return self.data[:, :, index]


def load_image(path) -> RasterImage:
    """Decode a PNG or binary PPM (P6) file into an RGB RasterImage.

    8-bit samples are widened to float64 without rescaling. Grayscale
    content is replicated across the three channels. Missing or unreadable
    files raise OSError; anything that is not a clean PNG/PPM raises
    FormatError.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    import io

    try:
        img = Image.open(io.BytesIO(raw))
        fmt = img.format
        img.load()
    except UnidentifiedImageError as exc:
        raise FormatError(f"{path}: not a recognized image") from exc
    except OSError as exc:
        raise FormatError(f"{path}: corrupt or truncated image data") from exc
    if fmt not in ("PNG", "PPM"):
        raise FormatError(f"{path}: unsupported format {fmt!r} (PNG or PPM P6 only)")
    if img.mode not in ("RGB", "L", "P"):
        raise FormatError(f"{path}: unsupported pixel mode {img.mode!r}")
    rgb = img.convert("RGB")
    data = np.asarray(rgb, dtype=np.float64)
    return RasterImage(data, ColorSpace.RGB)


def save_png(img: RasterImage, path) -> None:
    """Write a RasterImage as an 8-bit PNG (values rounded)."""
    arr = np.clip(np.rint(img.data), 0, 255).astype(np.uint8)
    if arr.shape[2] == 1:
        arr = arr[:, :, 0]
    Image.fromarray(arr).save(path, "PNG")


def rgb_to_ycbcr(img: RasterImage) -> RasterImage:
    """BT.601 full-range RGB -> YCbCr, clamped to [0, 255]."""
    if img.space != ColorSpace.RGB:
        raise SpaceError(f"expected RGB input, got {img.space.value}")
    out = img.data @ _YCBCR_MATRIX.T + _YCBCR_OFFSET
    return RasterImage(np.clip(out, 0.0, 255.0), ColorSpace.YCBCR)


def luma(img: RasterImage) -> np.ndarray:
    """Y component of an RGB image (BT.601), as a 2-D plane."""
    return rgb_to_ycbcr(img).channel(0)


def _axis_positions(n_in: int, n_out: int) -> np.ndarray:
    # Corner-aligned sampling: endpoints of the output grid hit the
    # endpoints of the input grid exactly.
    if n_out == 1 or n_in == 1:
        return np.zeros(n_out)
    return np.arange(n_out) * ((n_in - 1) / (n_out - 1))


def _interp_axis(data: np.ndarray, n_out: int, axis: int) -> np.ndarray:
    pos = _axis_positions(data.shape[axis], n_out)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, data.shape[axis] - 1)
    frac = pos - lo
    moved = np.moveaxis(data, axis, 0)
    shape = (n_out,) + (1,) * (moved.ndim - 1)
    out = moved[lo] * (1.0 - frac.reshape(shape)) + moved[hi] * frac.reshape(shape)
    return np.moveaxis(out, 0, axis)


def upsample_bilinear(img: RasterImage, factor: int) -> RasterImage:
    """Scale an image by an integer factor with corner-aligned bilinear sampling."""
    if factor < 1 or int(factor) != factor:
        raise ValueError(f"factor must be a positive integer, got {factor}")
    if factor == 1:
        return RasterImage(img.data.copy(), img.space)
    out = _interp_axis(img.data, img.height * factor, axis=0)
    out = _interp_axis(out, img.width * factor, axis=1)
    return RasterImage(out, img.space)


def write_tensor(t: Tensor3, path) -> None:
    """Serialize a Tensor3 to the HFT1 binary format (float32 payload).

    Layout: magic "HFT1", u32 height, u32 width, u32 depth (little-endian),
    then height*width*depth float32 values, row-major with the channel index
    innermost. Degenerate tensors (any zero dimension) are rejected.
    """
    if t.height == 0 or t.width == 0 or t.depth == 0:
        raise FormatError(f"degenerate tensor shape {t.data.shape} cannot be written")
    header = TENSOR_MAGIC + struct.pack("<III", t.height, t.width, t.depth)
    payload = np.ascontiguousarray(t.data, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_tensor(path) -> Tensor3:
    """Read an HFT1 tensor file; inverse of write_tensor for float32 payloads."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 16 or blob[:4] != TENSOR_MAGIC:
        raise FormatError(f"{path}: bad magic, not an HFT1 tensor file")
    h, w, d = struct.unpack("<III", blob[4:16])
    expected = 16 + h * w * d * 4
    if h == 0 or w == 0 or d == 0 or len(blob) != expected:
        raise FormatError(
            f"{path}: header says {h}x{w}x{d} but file has {len(blob)} bytes"
        )
    data = np.frombuffer(blob[16:], dtype="<f4").astype(np.float64).reshape(h, w, d)
    return Tensor3(data)


def write_embedding(vec: np.ndarray, path, raw: bool = False) -> None:
    """Write a 1-D embedding either as a depth-1 tensor or a raw prefixed vector.

    Raw format: u32 little-endian length prefix followed by that many
    float32 little-endian values.
    """
    v = np.asarray(vec, dtype=np.float64).ravel()
    if raw:
        with open(path, "wb") as fh:
            fh.write(struct.pack("<I", v.size))
            fh.write(v.astype("<f4").tobytes())
    else:
        write_tensor(Tensor3(v.reshape(1, v.size, 1)), path)


def read_embedding(path) -> np.ndarray:
    """Read an embedding from either accepted on-disk format as float64."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] == TENSOR_MAGIC:
        t = read_tensor(path)
        if t.depth != 1:
            raise FormatError(f"{path}: embedding tensor must have depth 1, got {t.depth}")
        return t.data.ravel()
    if len(blob) < 4:
        raise FormatError(f"{path}: too short for a raw embedding")
    (n,) = struct.unpack("<I", blob[:4])
    if len(blob) != 4 + 4 * n:
        raise FormatError(f"{path}: length prefix {n} does not match payload")
    return np.frombuffer(blob[4:], dtype="<f4").astype(np.float64)

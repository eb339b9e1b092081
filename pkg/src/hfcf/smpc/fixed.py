"""Fixed-point encoding of float vectors into the 64-bit ring."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonFiniteError

DEFAULT_SCALE_BITS = 16
RING_BITS = 64


@dataclass(frozen=True)
class FixedVec:
    """Vector of ring words interpreted as two's-complement fixed point."""

    words: np.ndarray
    scale_bits: int = DEFAULT_SCALE_BITS

    def __post_init__(self):
        arr = np.ascontiguousarray(self.words, dtype=np.uint64)
        object.__setattr__(self, "words", arr)

    def __len__(self) -> int:
        return self.words.size


def encode_fixed(x: np.ndarray, scale_bits: int = DEFAULT_SCALE_BITS) -> FixedVec:
    """Round x * 2^scale_bits to the nearest ring word.

    Values must satisfy |x| < 2^(63 - scale_bits) so the scaled magnitude
    fits the signed interpretation of the ring.
    """
    v = np.asarray(x, dtype=np.float64).ravel()
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("cannot encode non-finite values")
    limit = float(2 ** (63 - scale_bits))
    if v.size and np.max(np.abs(v)) >= limit:
        raise OverflowError(
            f"values must satisfy |x| < 2^{63 - scale_bits} for scale {scale_bits}"
        )
    scaled = np.rint(v * float(2**scale_bits)).astype(np.int64)
    return FixedVec(scaled.view(np.uint64), scale_bits)


def decode_fixed(fv: FixedVec) -> np.ndarray:
    """Inverse of encode_fixed up to half an ulp of the scale."""
    signed = fv.words.view(np.int64)
    return signed.astype(np.float64) / float(2**fv.scale_bits)

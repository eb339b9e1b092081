"""PSNR and SSIM for quantifying how much visual structure a plane leaks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import DimError

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5


@dataclass(frozen=True)
class MetricReport:
    """One reference/test comparison; psnr_db is +inf when MSE is zero."""

    ref_label: str
    test_label: str
    psnr_db: float
    ssim: float

    def line(self) -> str:
        psnr = "inf" if math.isinf(self.psnr_db) else f"{self.psnr_db:.3f}"
        return (
            f"ref={self.ref_label}\ttest={self.test_label}\t"
            f"psnr_db={psnr}\tssim={self.ssim:.5f}"
        )


def minmax_normalize(plane: np.ndarray, max_value: float = 255.0) -> np.ndarray:
    """Affinely map a plane onto [0, max_value]; constant planes go to zero."""
    p = np.asarray(plane, dtype=np.float64)
    lo, hi = p.min(), p.max()
    if hi == lo:
        return np.zeros_like(p)
    return (p - lo) * (max_value / (hi - lo))


def _check_shapes(ref: np.ndarray, test: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r = np.asarray(ref, dtype=np.float64)
    t = np.asarray(test, dtype=np.float64)
    if r.ndim != 2 or r.shape != t.shape:
        raise DimError(f"plane shapes differ: {r.shape} vs {t.shape}")
    return r, t


def psnr(ref: np.ndarray, test: np.ndarray, max_value: float = 255.0) -> float:
    """10 log10(max^2 / MSE) in dB; identical planes return +inf."""
    r, t = _check_shapes(ref, test)
    mse = float(np.mean((r - t) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(max_value * max_value / mse)


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    ax = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(ax * ax) / (2.0 * sigma * sigma))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


_WINDOW = _gaussian_window()


def ssim(ref: np.ndarray, test: np.ndarray, max_value: float = 255.0) -> float:
    """Mean local SSIM with an 11x11 Gaussian window (sigma 1.5).

    Stabilizers follow the standard choice C1 = (0.01 max)^2,
    C2 = (0.03 max)^2; local statistics are taken over the fully valid
    interior so no padding policy enters the score.
    """
    r, t = _check_shapes(ref, test)
    if min(r.shape) < SSIM_WINDOW:
        raise DimError(f"ssim needs planes of at least {SSIM_WINDOW} per side")
    c1 = (0.01 * max_value) ** 2
    c2 = (0.03 * max_value) ** 2

    def smooth(x):
        return fftconvolve(x, _WINDOW, mode="valid")

    mu_r = smooth(r)
    mu_t = smooth(t)
    var_r = smooth(r * r) - mu_r * mu_r
    var_t = smooth(t * t) - mu_t * mu_t
    cov = smooth(r * t) - mu_r * mu_t
    num = (2.0 * mu_r * mu_t + c1) * (2.0 * cov + c2)
    den = (mu_r * mu_r + mu_t * mu_t + c1) * (var_r + var_t + c2)
    return float(np.mean(num / den))


def compare(
    ref: np.ndarray,
    test: np.ndarray,
    ref_label: str = "ref",
    test_label: str = "test",
    max_value: float = 255.0,
) -> MetricReport:
    """Bundle PSNR and SSIM of a pair of planes into a report."""
    return MetricReport(
        ref_label=ref_label,
        test_label=test_label,
        psnr_db=psnr(ref, test, max_value),
        ssim=ssim(ref, test, max_value),
    )

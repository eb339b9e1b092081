"""Synthetic face-like images and embedding sets for tests and experiments.

No real biometric data ships with the toolkit; these generators produce
smooth, brightly lit face-like images (low-frequency dominated, like real
portraits) and well-separated synthetic identity embeddings.
"""

from __future__ import annotations

import numpy as np

from .tensorio import ColorSpace, RasterImage


def _bump(xx: np.ndarray, yy: np.ndarray, cx: float, cy: float, sx: float, sy: float) -> np.ndarray:
    return np.exp(-(((xx - cx) / sx) ** 2 + ((yy - cy) / sy) ** 2))


def make_face(seed: int, size: int = 112) -> RasterImage:
    """Smooth synthetic portrait: bright background, elliptical head,
    soft eye/nose/mouth features, gentle low-frequency texture."""
    rng = np.random.default_rng(seed)
    n = size
    yy, xx = np.meshgrid(np.linspace(0, 1, n), np.linspace(0, 1, n), indexing="ij")

    bg_top = 205.0 + rng.uniform(-10, 10)
    bg = bg_top + 25.0 * yy

    cx = 0.5 + rng.uniform(-0.03, 0.03)
    cy = 0.47 + rng.uniform(-0.03, 0.03)
    ax = 0.30 + rng.uniform(-0.02, 0.02)
    ay = 0.38 + rng.uniform(-0.02, 0.02)
    d = ((xx - cx) / ax) ** 2 + ((yy - cy) / ay) ** 2
    head = 1.0 / (1.0 + np.exp((d - 1.0) / 0.08))

    skin = np.array([196.0, 164.0, 142.0]) + rng.uniform(-12, 12, size=3)
    shade = 1.0 - 0.12 * _bump(xx, yy, cx, cy + 0.30, 0.5, 0.25)

    eye_dy = 0.40 + rng.uniform(-0.015, 0.015)
    eye_dx = 0.115 + rng.uniform(-0.01, 0.01)
    features = 62.0 * _bump(xx, yy, cx - eye_dx, eye_dy, 0.045, 0.028)
    features += 62.0 * _bump(xx, yy, cx + eye_dx, eye_dy, 0.045, 0.028)
    features += 24.0 * _bump(xx, yy, cx - eye_dx, eye_dy - 0.055, 0.06, 0.016)
    features += 24.0 * _bump(xx, yy, cx + eye_dx, eye_dy - 0.055, 0.06, 0.016)
    features += 18.0 * _bump(xx, yy, cx, 0.52, 0.025, 0.08)
    features += 40.0 * _bump(xx, yy, cx, 0.63 + rng.uniform(-0.01, 0.01), 0.09, 0.022)

    # low-frequency texture: a coarse random grid enlarged smoothly
    coarse = rng.uniform(-3.0, 3.0, size=(8, 8))
    tex = np.kron(coarse, np.ones((n // 8 + 1, n // 8 + 1)))[:n, :n]

    channels = []
    for c in range(3):
        face = skin[c] * shade - features * (1.0 if c == 0 else 1.15)
        plane = bg * (1.0 - head) + face * head + tex
        channels.append(plane)
    data = np.clip(np.stack(channels, axis=2), 0.0, 255.0)
    return RasterImage(data, ColorSpace.RGB)


def face_corpus(count: int, size: int = 112, seed: int = 1000) -> list[RasterImage]:
    return [make_face(seed + i, size) for i in range(count)]


def make_identities(count: int, dim: int, seed: int = 0) -> np.ndarray:
    """(count, dim) pairwise-orthogonal unit embeddings (count <= dim)."""
    if count > dim:
        raise ValueError("cannot make more orthogonal identities than dimensions")
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((dim, count)))
    return np.ascontiguousarray(q.T)


def perturb(v: np.ndarray, noise_norm: float, rng: np.random.Generator) -> np.ndarray:
    """Add an isotropic perturbation of exactly the given norm."""
    g = rng.standard_normal(v.size)
    return v + g * (noise_norm / np.linalg.norm(g))

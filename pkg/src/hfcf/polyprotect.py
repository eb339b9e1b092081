"""Identity-specific polynomial protection of embedding vectors.

An embedding V is chopped into length-m windows that advance by
m - overlap positions; each window maps to one protected value
p_j = sum_i C_i * v_{s+i}^{E_i} with per-identity integer coefficients C
and distinct integer exponents E. Trailing values that cannot fill a
window are dropped. The mapping is deliberately non-invertible for small
overlap; with overlap m - 1 it is near-invertible, which is why distance
computation on protected vectors is pushed into the secure two-party
protocol instead of handing them to a server.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteError, ParamError, RangeError

DEFAULT_M = 5
DEFAULT_E_RANGE = (1, 5)
DEFAULT_C_RANGE = (-100, 100)
DEFAULT_OVERLAP = 4


@dataclass(frozen=True)
class ProtectParams:
    """Per-identity protection parameters, reproducible from the seed."""

    coefficients: tuple[int, ...]  # C: non-zero integers
    exponents: tuple[int, ...]  # E: distinct integers
    overlap: int
    identity_seed: int
    e_range: tuple[int, int] = DEFAULT_E_RANGE
    c_range: tuple[int, int] = DEFAULT_C_RANGE

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(int(c) for c in self.coefficients))
        object.__setattr__(self, "exponents", tuple(int(e) for e in self.exponents))
        m = len(self.coefficients)
        if m == 0 or len(self.exponents) != m:
            raise ParamError("C and E must be non-empty and equally long")
        if any(c == 0 for c in self.coefficients):
            raise ParamError("coefficients must be non-zero")
        if len(set(self.exponents)) != m:
            raise ParamError("exponents must be pairwise distinct")
        lo, hi = self.e_range
        if any(not lo <= e <= hi for e in self.exponents):
            raise ParamError(f"exponents must lie in [{lo}, {hi}]")
        if not 0 <= self.overlap <= m - 1:
            raise ParamError(f"overlap must be in [0, {m - 1}], got {self.overlap}")

    @property
    def m(self) -> int:
        return len(self.coefficients)

    def fingerprint(self) -> str:
        """Hash of (C, E, overlap); safe to store server-side."""
        blob = repr((self.coefficients, self.exponents, self.overlap)).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class ProtectedEmbedding:
    """Protected vector plus the fingerprint of the parameters that made it."""

    values: np.ndarray
    source_dim: int
    params_fingerprint: str

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("protected embedding contains non-finite values")
        object.__setattr__(self, "values", arr)


def gen_params(
    identity_seed: int,
    m: int = DEFAULT_M,
    e_range: tuple[int, int] = DEFAULT_E_RANGE,
    c_range: tuple[int, int] = DEFAULT_C_RANGE,
    overlap: int = DEFAULT_OVERLAP,
) -> ProtectParams:
    """Deterministically derive (C, E) for one identity from its seed.

    C is drawn uniformly (with replacement) from the non-zero integers in
    c_range; E is a seeded selection of m distinct values from e_range.
    """
    e_lo, e_hi = int(e_range[0]), int(e_range[1])
    c_lo, c_hi = int(c_range[0]), int(c_range[1])
    if e_hi - e_lo + 1 < m:
        raise RangeError(f"e_range {e_range} cannot supply {m} distinct exponents")
    c_pool = np.array([c for c in range(c_lo, c_hi + 1) if c != 0])
    if c_pool.size == 0:
        raise RangeError(f"c_range {c_range} contains no non-zero integers")
    rng = np.random.default_rng(identity_seed)
    coeffs = rng.choice(c_pool, size=m, replace=True)
    exps = rng.permutation(np.arange(e_lo, e_hi + 1))[:m]
    return ProtectParams(
        coefficients=tuple(int(c) for c in coeffs),
        exponents=tuple(int(e) for e in exps),
        overlap=int(overlap),
        identity_seed=int(identity_seed),
        e_range=(e_lo, e_hi),
        c_range=(c_lo, c_hi),
    )


def output_len(n: int, m: int, overlap: int) -> int:
    """Number of protected values produced from an n-vector.

    Windows of length m advance by m - overlap; trailing input values that
    cannot fill a window are dropped.
    """
    if not 0 <= overlap < m:
        raise ParamError(f"overlap must satisfy 0 <= overlap < m, got {overlap}")
    if n < m:
        raise ParamError(f"need at least m={m} values, got n={n}")
    return (n - m) // (m - overlap) + 1


def protect(V: np.ndarray, params: ProtectParams) -> ProtectedEmbedding:
    """Map an embedding into the identity's protected space."""
    v = np.asarray(V, dtype=np.float64).ravel()
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("embedding contains non-finite values")
    m = params.m
    k = output_len(v.size, m, params.overlap)
    stride = m - params.overlap
    # (k, m) matrix of windows; powers of negative bases are exact for
    # integer exponents
    starts = np.arange(k) * stride
    windows = v[starts[:, None] + np.arange(m)[None, :]]
    powered = np.power(windows, np.array(params.exponents, dtype=np.int64)[None, :])
    values = powered @ np.array(params.coefficients, dtype=np.float64)
    return ProtectedEmbedding(values, v.size, params.fingerprint())


def params_to_record(params: ProtectParams) -> str:
    """Compact single-line text form: seed, m, ranges, overlap.

    (C, E) are not stored; they regenerate from the seed.
    """
    return (
        f"seed={params.identity_seed} m={params.m} "
        f"e_range={params.e_range[0]}:{params.e_range[1]} "
        f"c_range={params.c_range[0]}:{params.c_range[1]} "
        f"overlap={params.overlap}"
    )


def params_from_record(record: str) -> ProtectParams:
    """Rebuild ProtectParams from its text record."""
    fields = {}
    for token in record.split():
        key, _, value = token.partition("=")
        fields[key] = value
    try:
        seed = int(fields["seed"])
        m = int(fields["m"])
        e_lo, e_hi = (int(x) for x in fields["e_range"].split(":"))
        c_lo, c_hi = (int(x) for x in fields["c_range"].split(":"))
        overlap = int(fields["overlap"])
    except (KeyError, ValueError) as exc:
        raise ParamError(f"malformed params record: {record!r}") from exc
    return gen_params(seed, m=m, e_range=(e_lo, e_hi), c_range=(c_lo, c_hi), overlap=overlap)

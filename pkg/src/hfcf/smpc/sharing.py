"""Additive secret sharing and Beaver-triple multiplication over 2^64.

numpy uint64 arithmetic wraps modulo 2^64, which is exactly the ring
semantics needed; np.errstate silences the overflow warnings that the
intended wraparound would otherwise emit.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass, field

import numpy as np

from ..errors import ProtocolError
from .fixed import DEFAULT_SCALE_BITS, FixedVec


class Party(enum.IntEnum):
    CLIENT = 1
    SERVER = 2


@dataclass(frozen=True)
class ShareVector:
    """One party's additive share of a fixed-point vector."""

    party: Party
    words: np.ndarray
    scale_bits: int = DEFAULT_SCALE_BITS
    session_id: int = 0

    def __post_init__(self):
        arr = np.ascontiguousarray(self.words, dtype=np.uint64)
        object.__setattr__(self, "words", arr)

    def __len__(self) -> int:
        return self.words.size


def _uniform_words(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, 2**64, size=n, dtype=np.uint64)


def share(
    secret: FixedVec, rng: np.random.Generator, session_id: int = 0
) -> tuple[ShareVector, ShareVector]:
    """Split a vector into a uniform client share and the matching server share."""
    client = _uniform_words(rng, len(secret))
    with np.errstate(over="ignore"):
        server = secret.words - client
    return (
        ShareVector(Party.CLIENT, client, secret.scale_bits, session_id),
        ShareVector(Party.SERVER, server, secret.scale_bits, session_id),
    )


def reconstruct(a: ShareVector, b: ShareVector) -> FixedVec:
    """Recombine two shares into the underlying fixed-point vector."""
    if len(a) != len(b):
        raise ProtocolError("share lengths differ")
    with np.errstate(over="ignore"):
        return FixedVec(a.words + b.words, a.scale_bits)


@dataclass
class BeaverTriple:
    """One party's half of a multiplication triple (a, b, c = a dot b)."""

    triple_id: int
    party: Party
    a: np.ndarray
    b: np.ndarray
    c: np.uint64
    consumed: bool = field(default=False)

    def __post_init__(self):
        self.a = np.ascontiguousarray(self.a, dtype=np.uint64)
        self.b = np.ascontiguousarray(self.b, dtype=np.uint64)
        self.c = np.uint64(self.c)

    @property
    def dim(self) -> int:
        return self.a.size

    def consume(self) -> None:
        if self.consumed:
            raise ProtocolError(f"triple {self.triple_id} already used")
        self.consumed = True


def _ring_dot(x: np.ndarray, y: np.ndarray) -> np.uint64:
    with np.errstate(over="ignore"):
        return np.uint64(np.sum(x * y, dtype=np.uint64))


def _make_triple_pair(
    triple_id: int, dim: int, rng: np.random.Generator
) -> tuple[BeaverTriple, BeaverTriple]:
    a = _uniform_words(rng, dim)
    b = _uniform_words(rng, dim)
    c = _ring_dot(a, b)
    a1 = _uniform_words(rng, dim)
    b1 = _uniform_words(rng, dim)
    c1 = _uniform_words(rng, 1)[0]
    with np.errstate(over="ignore"):
        a2, b2, c2 = a - a1, b - b1, c - c1
    return (
        BeaverTriple(triple_id, Party.CLIENT, a1, b1, c1),
        BeaverTriple(triple_id, Party.SERVER, a2, b2, c2),
    )


def dealer_make_triples(
    count: int, dim: int, seed: int, start_id: int = 0
) -> tuple[list[BeaverTriple], list[BeaverTriple]]:
    """Trusted-dealer triple generation, deterministic under the seed.

    Each triple is derived from an independent stream keyed by
    (seed, triple_id), so either party can regenerate any id range and the
    halves still match.
    """
    client, server = [], []
    for i in range(start_id, start_id + count):
        rng = np.random.default_rng([seed, i])
        t1, t2 = _make_triple_pair(i, dim, rng)
        client.append(t1)
        server.append(t2)
    return client, server


class TripleStore:
    """Thread-safe pool of one party's triples, consumed at most once each."""

    def __init__(self, triples: list[BeaverTriple]):
        self._triples = {t.triple_id: t for t in triples}
        self._order = [t.triple_id for t in triples]
        self._cursor = 0
        self._lock = threading.Lock()

    def take(self, triple_id: int) -> BeaverTriple:
        with self._lock:
            t = self._triples.get(triple_id)
            if t is None:
                raise ProtocolError(f"unknown triple id {triple_id}")
            t.consume()
            return t

    def take_next(self) -> BeaverTriple:
        with self._lock:
            while self._cursor < len(self._order):
                t = self._triples[self._order[self._cursor]]
                self._cursor += 1
                if not t.consumed:
                    t.consume()
                    return t
        raise ProtocolError("triple store exhausted")

    def remaining(self) -> int:
        with self._lock:
            return sum(1 for t in self._triples.values() if not t.consumed)


def beaver_open_shares(
    x_words: np.ndarray, y_words: np.ndarray, triple: BeaverTriple
) -> tuple[np.ndarray, np.ndarray]:
    """This party's shares of the openings d = x - a and e = y - b."""
    if x_words.size != triple.dim or y_words.size != triple.dim:
        raise ProtocolError(
            f"vector length {x_words.size}/{y_words.size} does not match "
            f"triple dim {triple.dim}"
        )
    with np.errstate(over="ignore"):
        return x_words - triple.a, y_words - triple.b


def beaver_result_share(
    triple: BeaverTriple, d: np.ndarray, e: np.ndarray, add_public_term: bool
) -> np.uint64:
    """This party's share of x dot y given the opened d, e.

    Exactly one party adds the public d dot e term.
    """
    with np.errstate(over="ignore"):
        z = triple.c + _ring_dot(d, triple.b) + _ring_dot(e, triple.a)
        if add_public_term:
            z = z + _ring_dot(d, e)
    return np.uint64(z)


def shared_dot(
    x_shares: tuple[ShareVector, ShareVector],
    y_shares: tuple[ShareVector, ShareVector],
    triples: tuple[BeaverTriple, BeaverTriple],
) -> tuple[np.uint64, np.uint64]:
    """In-process Beaver dot product of two secret-shared vectors.

    Returns the two result shares; their sum (mod 2^64) is the ring dot
    product at twice the fixed-point scale. Each triple half is consumed
    and cannot be reused.
    """
    x1, x2 = x_shares
    y1, y2 = y_shares
    t1, t2 = triples
    if not (len(x1) == len(x2) == len(y1) == len(y2)):
        raise ProtocolError("share vector lengths differ")
    if t1.triple_id != t2.triple_id:
        raise ProtocolError("mismatched triple halves")
    t1.consume()
    t2.consume()
    d1, e1 = beaver_open_shares(x1.words, y1.words, t1)
    d2, e2 = beaver_open_shares(x2.words, y2.words, t2)
    with np.errstate(over="ignore"):
        d = d1 + d2
        e = e1 + e2
    z1 = beaver_result_share(t1, d, e, add_public_term=False)
    z2 = beaver_result_share(t2, d, e, add_public_term=True)
    return z1, z2


def decode_dot(
    z1: np.uint64, z2: np.uint64, scale_bits: int = DEFAULT_SCALE_BITS
) -> float:
    """Reconstruct result shares and truncate once by the fixed-point scale."""
    with np.errstate(over="ignore"):
        z = np.uint64(z1) + np.uint64(z2)
    signed = int(np.uint64(z).astype(np.int64))
    truncated = signed >> scale_bits
    return truncated / float(2**scale_bits)

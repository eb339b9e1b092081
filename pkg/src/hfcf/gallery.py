"""Enrollment database of protected embeddings and 1:N identification.

Each identity is enrolled once; the store keeps only the protected vector
(float32), its norm, and a parameter fingerprint - never the raw embedding
or the protection seed. Because protection parameters are
identity-specific, a 1:N query protects the probe embedding separately
under every candidate identity's parameters before comparing.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import (
    DuplicateIdentityError,
    EmptyGalleryError,
    FormatError,
    MissingTruthError,
    NormError,
    UnknownIdentityError,
)
from .polyprotect import (
    DEFAULT_C_RANGE,
    DEFAULT_E_RANGE,
    DEFAULT_M,
    ProtectParams,
    gen_params,
    params_from_record,
    params_to_record,
    protect,
)
from .smpc import EnrolledShare, make_enrolled_share, verify_session

ParamsProvider = Callable[[str], ProtectParams]


@dataclass(frozen=True)
class GalleryRecord:
    """One enrolled identity: protected embedding, norm, parameter fingerprint."""

    identity: str
    protected: np.ndarray  # float32 values (what the store persists)
    norm: float
    fingerprint: str

    def __post_init__(self):
        arr = np.ascontiguousarray(self.protected, dtype=np.float32)
        object.__setattr__(self, "protected", arr)
        if not self.norm > 0.0:
            raise NormError(f"record norm must be positive, got {self.norm}")
        if "\t" in self.identity or "\n" in self.identity:
            raise FormatError("identity labels may not contain tabs or newlines")


@dataclass(frozen=True)
class QueryResult:
    """Ranked (identity, cosine distance) pairs, ascending distance."""

    ranked: tuple[tuple[str, float], ...]
    truth: str | None = None

    def __post_init__(self):
        ranked = tuple((str(i), float(d)) for i, d in self.ranked)
        dists = [d for _, d in ranked]
        if any(b < a for a, b in zip(dists, dists[1:])):
            raise ValueError("distances must be non-decreasing")
        object.__setattr__(self, "ranked", ranked)

    def rank_of(self, identity: str) -> int | None:
        """1-based rank of an identity, or None if absent."""
        for pos, (label, _) in enumerate(self.ranked, start=1):
            if label == identity:
                return pos
        return None


def make_record(identity: str, V: np.ndarray, params: ProtectParams) -> GalleryRecord:
    protected = protect(V, params)
    vals = protected.values.astype(np.float32)
    norm = float(np.linalg.norm(vals.astype(np.float64)))
    if norm == 0.0:
        raise NormError(f"protected embedding for {identity!r} has zero norm")
    return GalleryRecord(identity, vals, norm, protected.params_fingerprint)


class GalleryStore:
    """In-memory, insertion-ordered record set with a line-oriented file form.

    File format, one record per line:
    identity TAB base64(float32 LE vector) TAB norm TAB fingerprint-hex
    """

    def __init__(self, records: list[GalleryRecord] | None = None):
        self._records: dict[str, GalleryRecord] = {}
        for rec in records or []:
            self.add(rec)

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, identity: str) -> bool:
        return identity in self._records

    def identities(self) -> list[str]:
        return list(self._records)

    def records(self) -> list[GalleryRecord]:
        return list(self._records.values())

    def get(self, identity: str) -> GalleryRecord:
        return self._records[identity]

    def add(self, record: GalleryRecord) -> None:
        if record.identity in self._records:
            raise DuplicateIdentityError(f"{record.identity!r} already enrolled")
        self._records[record.identity] = record

    def enroll(
        self,
        identity: str,
        V: np.ndarray,
        identity_seed: int,
        overlap: int,
        m: int = DEFAULT_M,
        e_range: tuple[int, int] = DEFAULT_E_RANGE,
        c_range: tuple[int, int] = DEFAULT_C_RANGE,
    ) -> GalleryRecord:
        """Protect V under freshly derived identity parameters and store it.

        The raw embedding and the seed are not retained here; the caller
        keeps the parameter record client-side.
        """
        if identity in self._records:
            raise DuplicateIdentityError(f"{identity!r} already enrolled")
        params = gen_params(identity_seed, m=m, e_range=e_range, c_range=c_range, overlap=overlap)
        record = make_record(identity, V, params)
        self._records[identity] = record
        return record

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self._records.values():
                fh.write(record_to_line(rec) + "\n")

    @classmethod
    def load(cls, path) -> "GalleryStore":
        store = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    store.add(line_to_record(line))
                except (ValueError, FormatError) as exc:
                    raise FormatError(f"{path}:{lineno}: bad record: {exc}") from exc
        return store

    def enrolled_shares(self) -> list[EnrolledShare]:
        """Server-side view for the secure protocol, in enrollment order."""
        return [
            make_enrolled_share(r.identity, r.protected.astype(np.float64))
            for r in self._records.values()
        ]


def record_to_line(rec: GalleryRecord) -> str:
    blob = base64.b64encode(rec.protected.astype("<f4").tobytes()).decode("ascii")
    return f"{rec.identity}\t{blob}\t{rec.norm!r}\t{rec.fingerprint}"


def append_record(path, rec: GalleryRecord) -> None:
    """Append one record to a store file (the on-disk form is append-only)."""
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(record_to_line(rec) + "\n")


def line_to_record(line: str) -> GalleryRecord:
    parts = line.split("\t")
    if len(parts) != 4:
        raise FormatError(f"expected 4 tab-separated fields, got {len(parts)}")
    identity, blob, norm_s, fingerprint = parts
    vec = np.frombuffer(base64.b64decode(blob, validate=True), dtype="<f4")
    return GalleryRecord(identity, vec.astype(np.float32), float(norm_s), fingerprint)


def cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    av = np.asarray(a, dtype=np.float64).ravel()
    bv = np.asarray(b, dtype=np.float64).ravel()
    na, nb = np.linalg.norm(av), np.linalg.norm(bv)
    if na == 0.0 or nb == 0.0:
        raise NormError("cosine distance undefined for zero-norm vectors")
    return 1.0 - float(av @ bv) / float(na * nb)


def _resolve_provider(provider) -> ParamsProvider:
    if callable(provider):
        return provider
    if isinstance(provider, Mapping):
        mapping = provider

        def lookup(identity: str) -> ProtectParams:
            try:
                return mapping[identity]
            except KeyError:
                raise UnknownIdentityError(f"no parameters for {identity!r}")

        return lookup
    raise TypeError("params provider must be callable or a mapping")


def query_1n(
    V_q: np.ndarray,
    params_provider,
    store: GalleryStore,
    k: int,
    truth: str | None = None,
    secure: bool = False,
    triple_seed: int = 0,
) -> QueryResult:
    """Identify a probe embedding against every enrolled identity.

    The probe is protected under each candidate identity's parameters and
    compared with that identity's record; top-k ascending distances are
    returned. With secure=True the comparisons run through the two-party
    protocol over a loopback transport instead of locally.
    """
    if len(store) == 0:
        raise EmptyGalleryError("cannot query an empty gallery")
    resolve = _resolve_provider(params_provider)
    probe = np.asarray(V_q, dtype=np.float64).ravel()

    identities = store.identities()
    protected_probes = []
    for identity in identities:
        try:
            params = resolve(identity)
        except UnknownIdentityError:
            raise
        except KeyError:
            raise UnknownIdentityError(f"no parameters for {identity!r}")
        protected_probes.append(protect(probe, params).values)

    if secure:
        pairs = verify_session(protected_probes, store.enrolled_shares(), triple_seed)
    else:
        pairs = [
            (identity, cosine_distance(p, store.get(identity).protected))
            for identity, p in zip(identities, protected_probes)
        ]
    pairs.sort(key=lambda item: item[1])
    top = min(int(k), len(pairs))
    return QueryResult(tuple(pairs[:top]), truth)


def retrieval_rate(results: list[QueryResult], k: int) -> float:
    """Fraction of queries whose truth label appears within the top k."""
    if not results:
        raise MissingTruthError("no query results supplied")
    hits = 0
    for res in results:
        if res.truth is None:
            raise MissingTruthError("every result needs a truth label")
        rank = res.rank_of(res.truth)
        if rank is not None and rank <= k:
            hits += 1
    return hits / len(results)


# client-side parameter files: identity TAB params-record per line


def params_file_write(path, entries: list[tuple[str, ProtectParams]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for identity, params in entries:
            fh.write(f"{identity}\t{params_to_record(params)}\n")


def params_file_read(path) -> dict[str, ProtectParams]:
    out: dict[str, ProtectParams] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            identity, _, record = line.partition("\t")
            if not record:
                raise FormatError(f"malformed params line: {line!r}")
            out[identity] = params_from_record(record)
    return out

"""Client/server session logic for secure gallery distance computation.

Each party inputs its own vector as a trivial sharing (full value on the
owning side, zero on the other); privacy comes from the Beaver openings,
which are one-time-padded by the uniform triple components. Per gallery
entry the client announces a fresh triple id, both sides exchange their
opening shares of d = x - a and e = y - b, the server returns its result
share together with the enrolled norm, and the client finishes the cosine
distance. Identity labels never cross the wire; the client supplies them
out-of-band in the server's enrollment order.
"""

from __future__ import annotations

import secrets
import threading
from dataclasses import dataclass

import numpy as np

from ..errors import NormError, ProtocolError
from .fixed import DEFAULT_SCALE_BITS, encode_fixed
from .sharing import (
    TripleStore,
    beaver_open_shares,
    beaver_result_share,
    dealer_make_triples,
    decode_dot,
)
from .wire import (
    PROTOCOL_VERSION,
    Frame,
    MsgType,
    loopback_pair,
    pack_hello,
    pack_result,
    pack_u64,
    pack_words,
    recv_frame,
    send_frame,
    unpack_hello,
    unpack_result,
    unpack_u64,
    unpack_words,
)


@dataclass(frozen=True)
class EnrolledShare:
    """Server-side material for one identity: ring words of the protected
    embedding plus its public L2 norm."""

    identity: str
    words: np.ndarray
    norm: float
    scale_bits: int = DEFAULT_SCALE_BITS

    def __post_init__(self):
        arr = np.ascontiguousarray(self.words, dtype=np.uint64)
        object.__setattr__(self, "words", arr)
        if not self.norm > 0.0:
            raise NormError(f"enrolled norm must be positive, got {self.norm}")

    @property
    def dim(self) -> int:
        return self.words.size


def make_enrolled_share(
    identity: str, protected_values: np.ndarray, scale_bits: int = DEFAULT_SCALE_BITS
) -> EnrolledShare:
    values = np.asarray(protected_values, dtype=np.float64).ravel()
    norm = float(np.linalg.norm(values))
    if norm == 0.0:
        raise NormError(f"cannot enroll zero-norm embedding for {identity!r}")
    return EnrolledShare(identity, encode_fixed(values, scale_bits).words, norm, scale_bits)


def _fail(transport, session_id: int, reason: str):
    try:
        send_frame(transport, Frame(MsgType.ERROR, session_id, reason.encode()))
    except Exception:
        pass
    raise ProtocolError(reason)


def _expect(transport, msg_type: MsgType, session_id: int) -> Frame:
    frame = recv_frame(transport)
    if frame.msg_type == MsgType.ERROR:
        raise ProtocolError(f"peer error: {frame.payload.decode(errors='replace')}")
    if frame.msg_type != msg_type:
        _fail(
            transport,
            session_id,
            f"expected {msg_type.name}, got {frame.msg_type.name}",
        )
    if frame.session_id != session_id:
        _fail(transport, session_id, "session id mismatch")
    return frame


def serve_gallery(transport, shares: list[EnrolledShare], triples: TripleStore) -> int:
    """Run the server half of one session; returns entries served."""
    hello = recv_frame(transport)
    if hello.msg_type != MsgType.HELLO:
        _fail(transport, hello.session_id, "session must start with HELLO")
    sid = hello.session_id
    version = unpack_hello(hello.payload)
    if version != PROTOCOL_VERSION:
        _fail(transport, sid, f"unsupported protocol version {version}")
    send_frame(transport, Frame(MsgType.HELLO, sid, pack_hello()))

    served = 0
    zero_x = None
    for entry in shares:
        frame = recv_frame(transport)
        if frame.msg_type == MsgType.BYE:
            return served  # client finished early
        if frame.msg_type == MsgType.ERROR:
            raise ProtocolError(f"peer error: {frame.payload.decode(errors='replace')}")
        if frame.msg_type != MsgType.TRIPLE_ID or frame.session_id != sid:
            _fail(transport, sid, "expected TRIPLE_ID")
        try:
            triple = triples.take(unpack_u64(frame.payload))
        except ProtocolError as exc:
            _fail(transport, sid, str(exc))
        if triple.dim != entry.dim:
            _fail(transport, sid, f"triple dim {triple.dim} != entry dim {entry.dim}")

        d_client = unpack_words(_expect(transport, MsgType.OPEN_D, sid).payload)
        e_client = unpack_words(_expect(transport, MsgType.OPEN_E, sid).payload)
        if d_client.size != entry.dim or e_client.size != entry.dim:
            _fail(transport, sid, "opening length mismatch")

        if zero_x is None or zero_x.size != entry.dim:
            zero_x = np.zeros(entry.dim, dtype=np.uint64)
        d_server, e_server = beaver_open_shares(zero_x, entry.words, triple)
        with np.errstate(over="ignore"):
            d = d_client + d_server
            e = e_client + e_server
        z_server = beaver_result_share(triple, d, e, add_public_term=True)

        send_frame(transport, Frame(MsgType.OPEN_D, sid, pack_words(d_server)))
        send_frame(transport, Frame(MsgType.OPEN_E, sid, pack_words(e_server)))
        send_frame(
            transport,
            Frame(MsgType.RESULT_SHARE, sid, pack_result(z_server, entry.norm)),
        )
        served += 1

    frame = recv_frame(transport)
    if frame.msg_type == MsgType.TRIPLE_ID:
        _fail(transport, sid, "gallery exhausted")
    if frame.msg_type != MsgType.BYE:
        _fail(transport, sid, f"expected BYE, got {frame.msg_type.name}")
    return served


def query_gallery(
    transport,
    queries: np.ndarray | list[np.ndarray],
    labels: list[str],
    triples: TripleStore,
    session_id: int | None = None,
    scale_bits: int = DEFAULT_SCALE_BITS,
) -> list[tuple[str, float]]:
    """Run the client half of one session.

    ``queries`` is either one protected vector compared against every
    entry, or one vector per entry (identity-specific protection in 1:N).
    Labels must follow the server's enrollment order.
    """
    if isinstance(queries, np.ndarray) and queries.ndim == 1:
        queries = [queries] * len(labels)
    if len(queries) != len(labels):
        raise ProtocolError("need one query vector per gallery label")
    sid = secrets.randbits(64) if session_id is None else int(session_id)

    send_frame(transport, Frame(MsgType.HELLO, sid, pack_hello()))
    reply = _expect(transport, MsgType.HELLO, sid)
    if unpack_hello(reply.payload) != PROTOCOL_VERSION:
        _fail(transport, sid, "protocol version mismatch")

    results = []
    for label, q in zip(labels, queries):
        vec = np.asarray(q, dtype=np.float64).ravel()
        norm_q = float(np.linalg.norm(vec))
        if norm_q == 0.0:
            raise NormError("query vector has zero norm")
        enc_x = encode_fixed(vec, scale_bits)
        zero_y = np.zeros(len(enc_x), dtype=np.uint64)

        triple = triples.take_next()
        send_frame(transport, Frame(MsgType.TRIPLE_ID, sid, pack_u64(triple.triple_id)))
        d_client, e_client = beaver_open_shares(enc_x.words, zero_y, triple)
        send_frame(transport, Frame(MsgType.OPEN_D, sid, pack_words(d_client)))
        send_frame(transport, Frame(MsgType.OPEN_E, sid, pack_words(e_client)))

        d_server = unpack_words(_expect(transport, MsgType.OPEN_D, sid).payload)
        e_server = unpack_words(_expect(transport, MsgType.OPEN_E, sid).payload)
        with np.errstate(over="ignore"):
            d = d_client + d_server
            e = e_client + e_server
        z_client = beaver_result_share(triple, d, e, add_public_term=False)

        z_server, norm_entry = unpack_result(
            _expect(transport, MsgType.RESULT_SHARE, sid).payload
        )
        if not norm_entry > 0.0:
            raise NormError(f"received non-positive enrolled norm {norm_entry}")
        dot = decode_dot(z_client, z_server, scale_bits)
        results.append((label, 1.0 - dot / (norm_q * norm_entry)))

    send_frame(transport, Frame(MsgType.BYE, sid))
    return results


def verify_session(
    query: np.ndarray | list[np.ndarray],
    gallery: list[EnrolledShare],
    triple_seed: int = 0,
    scale_bits: int = DEFAULT_SCALE_BITS,
    session_id: int | None = None,
) -> list[tuple[str, float]]:
    """Run both protocol halves in-process over a loopback transport.

    Convenience wrapper covering the common case where caller holds the
    query and the enrolled shares; distributed deployments use
    serve_gallery / query_gallery directly over TCP.
    """
    if not gallery:
        return []
    dim = gallery[0].dim
    client_triples, server_triples = dealer_make_triples(len(gallery), dim, triple_seed)
    t_client, t_server = loopback_pair()
    labels = [entry.identity for entry in gallery]
    server_exc: list[Exception] = []

    def run_server():
        try:
            serve_gallery(t_server, gallery, TripleStore(server_triples))
        except Exception as exc:  # surfaced after join
            server_exc.append(exc)

    thread = threading.Thread(target=run_server, daemon=True)
    thread.start()
    try:
        results = query_gallery(
            t_client, query, labels, TripleStore(client_triples), session_id, scale_bits
        )
    finally:
        t_client.close()
        thread.join(timeout=30)
        t_server.close()
    if server_exc:
        raise server_exc[0]
    return results

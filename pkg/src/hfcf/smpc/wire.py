"""Framed wire protocol for the two-party distance computation.

Frame layout (all integers little-endian):
    magic "HFC1" | msg_type u8 | session_id u64 | payload_len u32 | payload

Payloads: HELLO carries a u16 protocol version, TRIPLE_ID a u64,
OPEN_D / OPEN_E n x u64 opening shares, RESULT_SHARE a u64 result share
plus the float64 enrolled-vector norm, ERROR a utf-8 reason, BYE nothing.
Unknown message types are answered with an ERROR frame before closing.
"""

from __future__ import annotations

import enum
import socket
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import ProtocolError, TransportError

MAGIC = b"HFC1"
PROTOCOL_VERSION = 1
_HEADER = struct.Struct("<4sBQI")


class MsgType(enum.IntEnum):
    HELLO = 0x01
    TRIPLE_ID = 0x02
    OPEN_D = 0x03
    OPEN_E = 0x04
    RESULT_SHARE = 0x05
    ERROR = 0x06
    BYE = 0x07


@dataclass(frozen=True)
class Frame:
    msg_type: MsgType
    session_id: int
    payload: bytes = b""


def encode_frame(frame: Frame) -> bytes:
    return (
        _HEADER.pack(MAGIC, int(frame.msg_type), frame.session_id, len(frame.payload))
        + frame.payload
    )


def decode_frame(blob: bytes) -> Frame:
    """Parse one complete frame from bytes (used by tests and transcripts)."""
    if len(blob) < _HEADER.size:
        raise ProtocolError("frame shorter than header")
    magic, mtype, session_id, plen = _HEADER.unpack(blob[: _HEADER.size])
    if magic != MAGIC:
        raise ProtocolError(f"bad frame magic {magic!r}")
    if len(blob) != _HEADER.size + plen:
        raise ProtocolError("frame length does not match header")
    try:
        msg = MsgType(mtype)
    except ValueError as exc:
        raise ProtocolError(f"unknown msg_type 0x{mtype:02x}") from exc
    return Frame(msg, session_id, blob[_HEADER.size :])


def split_frames(blob: bytes) -> list[Frame]:
    """Decode a concatenated frame stream (transcript analysis helper)."""
    frames = []
    pos = 0
    while pos < len(blob):
        if len(blob) - pos < _HEADER.size:
            raise ProtocolError("trailing bytes shorter than a frame header")
        _, _, _, plen = _HEADER.unpack(blob[pos : pos + _HEADER.size])
        end = pos + _HEADER.size + plen
        frames.append(decode_frame(blob[pos:end]))
        pos = end
    return frames


# payload packers


def pack_hello(version: int = PROTOCOL_VERSION) -> bytes:
    return struct.pack("<H", version)


def unpack_hello(payload: bytes) -> int:
    if len(payload) != 2:
        raise ProtocolError("HELLO payload must be 2 bytes")
    return struct.unpack("<H", payload)[0]


def pack_u64(value: int) -> bytes:
    return struct.pack("<Q", int(value))


def unpack_u64(payload: bytes) -> int:
    if len(payload) != 8:
        raise ProtocolError("expected an 8-byte payload")
    return struct.unpack("<Q", payload)[0]


def pack_words(words: np.ndarray) -> bytes:
    return np.ascontiguousarray(words, dtype="<u8").tobytes()


def unpack_words(payload: bytes) -> np.ndarray:
    if len(payload) % 8:
        raise ProtocolError("word vector payload must be a multiple of 8 bytes")
    return np.frombuffer(payload, dtype="<u8").astype(np.uint64)


def pack_result(share: np.uint64, norm: float) -> bytes:
    return struct.pack("<Qd", int(share), float(norm))


def unpack_result(payload: bytes) -> tuple[np.uint64, float]:
    if len(payload) != 16:
        raise ProtocolError("RESULT_SHARE payload must be 16 bytes")
    share, norm = struct.unpack("<Qd", payload)
    return np.uint64(share), norm


# transports


class SocketTransport:
    """Blocking byte transport over a connected socket."""

    def __init__(self, sock: socket.socket):
        self._sock = sock

    def send_bytes(self, data: bytes) -> None:
        try:
            self._sock.sendall(data)
        except OSError as exc:
            raise TransportError(f"send failed: {exc}") from exc

    def recv_exact(self, n: int) -> bytes:
        chunks = []
        remaining = n
        while remaining:
            try:
                chunk = self._sock.recv(remaining)
            except OSError as exc:
                raise TransportError(f"recv failed: {exc}") from exc
            if not chunk:
                raise TransportError("connection closed mid-frame")
            chunks.append(chunk)
            remaining -= len(chunk)
        return b"".join(chunks)

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


class RecordingTransport:
    """Wrapper that captures raw sent/received bytes for transcript checks."""

    def __init__(self, inner):
        self.inner = inner
        self.sent = bytearray()
        self.received = bytearray()

    def send_bytes(self, data: bytes) -> None:
        self.sent.extend(data)
        self.inner.send_bytes(data)

    def recv_exact(self, n: int) -> bytes:
        data = self.inner.recv_exact(n)
        self.received.extend(data)
        return data

    def close(self) -> None:
        self.inner.close()


def loopback_pair() -> tuple[SocketTransport, SocketTransport]:
    """Connected in-process transport pair (client end, server end)."""
    a, b = socket.socketpair()
    return SocketTransport(a), SocketTransport(b)


def send_frame(transport, frame: Frame) -> None:
    transport.send_bytes(encode_frame(frame))


def recv_frame(transport) -> Frame:
    header = transport.recv_exact(_HEADER.size)
    magic, mtype, session_id, plen = _HEADER.unpack(header)
    if magic != MAGIC:
        raise ProtocolError(f"bad frame magic {magic!r}")
    payload = transport.recv_exact(plen) if plen else b""
    try:
        msg = MsgType(mtype)
    except ValueError:
        # answer with an ERROR frame, then refuse the stream
        reason = f"unknown msg_type 0x{mtype:02x}".encode()
        try:
            transport.send_bytes(
                encode_frame(Frame(MsgType.ERROR, session_id, reason))
            )
        except TransportError:
            pass
        raise ProtocolError(f"unknown msg_type 0x{mtype:02x}")
    return Frame(msg, session_id, payload)

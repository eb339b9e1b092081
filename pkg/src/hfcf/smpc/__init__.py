"""Two-party secret-shared dot-product and cosine-distance computation.

The ring is the unsigned 64-bit integers with wraparound; floats enter via
fixed-point encoding (default 16 fractional bits). Multiplication uses
dealer-issued Beaver triples; the framed wire protocol never carries a
query vector in the clear, only Beaver-masked openings.
"""

from .fixed import FixedVec, decode_fixed, encode_fixed
from .sharing import (
    BeaverTriple,
    Party,
    ShareVector,
    TripleStore,
    dealer_make_triples,
    decode_dot,
    reconstruct,
    share,
    shared_dot,
)
from .session import (
    EnrolledShare,
    make_enrolled_share,
    query_gallery,
    serve_gallery,
    verify_session,
)
from .wire import (
    Frame,
    MsgType,
    RecordingTransport,
    SocketTransport,
    loopback_pair,
    recv_frame,
    send_frame,
)

__all__ = [
    "FixedVec",
    "encode_fixed",
    "decode_fixed",
    "Party",
    "ShareVector",
    "share",
    "reconstruct",
    "BeaverTriple",
    "TripleStore",
    "dealer_make_triples",
    "shared_dot",
    "decode_dot",
    "EnrolledShare",
    "make_enrolled_share",
    "serve_gallery",
    "query_gallery",
    "verify_session",
    "Frame",
    "MsgType",
    "SocketTransport",
    "RecordingTransport",
    "loopback_pair",
    "send_frame",
    "recv_frame",
]

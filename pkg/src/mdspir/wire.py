"""Binary framing for queries and answers, plus the text records format.

Frame: 4-byte big-endian payload length, then the payload.  A query payload
starts with seven big-endian uint32 (N, T, M, L, q, server, count) followed
by count*M*L elements; an answer payload is a uint32 count followed by the
elements.  Elements are big-endian unsigned of ``element_width(q)`` bytes.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from typing import BinaryIO

import numpy as np

from .field import GF, element_width

_LEN = struct.Struct(">I")
_QUERY_HEAD = struct.Struct(">7I")


class WireError(ValueError):
    pass


def encode_elements(values, q: int) -> bytes:
    w = element_width(q)
    v = np.asarray(values, dtype=np.int64).reshape(-1)
    if v.size and (v.min() < 0 or v.max() >= q):
        raise WireError(f"element out of range for q={q}")
    shifts = np.arange(w - 1, -1, -1, dtype=np.int64) * 8
    return ((v[:, None] >> shifts) & 0xFF).astype(np.uint8).tobytes()


def decode_elements(data: bytes, q: int, count: int) -> np.ndarray:
    w = element_width(q)
    if len(data) != w * count:
        raise WireError(f"expected {w * count} bytes of elements, got {len(data)}")
    raw = np.frombuffer(data, dtype=np.uint8).astype(np.int64).reshape(count, w)
    shifts = np.arange(w - 1, -1, -1, dtype=np.int64) * 8
    out = (raw << shifts).sum(axis=1)
    if count and out.max() >= q:
        raise WireError(f"element out of range for q={q}")
    return out


def frame(payload: bytes) -> bytes:
    return _LEN.pack(len(payload)) + payload


def _read_exact(stream: BinaryIO, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = stream.read(n - len(buf))
        if not chunk:
            raise EOFError(f"stream closed after {len(buf)} of {n} bytes")
        buf += chunk
    return bytes(buf)


def read_frame(stream: BinaryIO) -> bytes:
    (n,) = _LEN.unpack(_read_exact(stream, _LEN.size))
    return _read_exact(stream, n)


def unframe(data: bytes) -> bytes:
    return read_frame(io.BytesIO(data))


@dataclass(frozen=True)
class QueryHeader:
    N: int
    T: int
    M: int
    L: int
    q: int
    server: int
    count: int


def encode_query(header: QueryHeader, coeffs: np.ndarray) -> bytes:
    coeffs = np.asarray(coeffs)
    if coeffs.shape != (header.count, header.M, header.L):
        raise WireError(f"coefficients have shape {coeffs.shape}, header says "
                        f"{(header.count, header.M, header.L)}")
    h = header
    return _QUERY_HEAD.pack(h.N, h.T, h.M, h.L, h.q, h.server, h.count) + encode_elements(coeffs, h.q)


def decode_query(payload: bytes) -> tuple[QueryHeader, np.ndarray]:
    if len(payload) < _QUERY_HEAD.size:
        raise WireError("truncated query header")
    h = QueryHeader(*_QUERY_HEAD.unpack_from(payload))
    n = h.count * h.M * h.L
    body = decode_elements(payload[_QUERY_HEAD.size :], h.q, n)
    return h, body.reshape(h.count, h.M, h.L)


def encode_answer(values, q: int) -> bytes:
    v = np.asarray(values, dtype=np.int64).reshape(-1)
    return _LEN.pack(v.size) + encode_elements(v, q)


def decode_answer(payload: bytes, q: int) -> np.ndarray:
    if len(payload) < _LEN.size:
        raise WireError("truncated answer")
    (count,) = _LEN.unpack_from(payload)
    return decode_elements(payload[_LEN.size :], q, count)


# -- records file: "q L M" then M lines of L integers ------------------------

def format_records(records: np.ndarray, q: int) -> str:
    W = np.asarray(records, dtype=np.int64)
    M, L = W.shape
    lines = [f"{q} {L} {M}"] + [" ".join(str(int(x)) for x in row) for row in W]
    return "\n".join(lines) + "\n"


def parse_records(text: str) -> tuple[int, np.ndarray]:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 3:
        raise WireError("records header must be 'q L M'")
    q, L, M = (int(x) for x in rows[0])
    body = rows[1:]
    if len(body) != M or any(len(r) != L for r in body):
        raise WireError(f"expected {M} lines of {L} integers")
    W = np.array(body, dtype=np.int64)
    GF(q).validate(W)
    return q, W

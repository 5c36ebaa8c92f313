import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mdspir import wire

Q = [2, 3, 4, 256, 257, 65536, 65537, 3**12]


@given(st.sampled_from(Q), st.data())
def test_element_roundtrip(q, data):
    vals = data.draw(st.lists(st.integers(0, q - 1), max_size=50))
    enc = wire.encode_elements(vals, q)
    assert np.array_equal(wire.decode_elements(enc, q, len(vals)), vals)


def test_element_errors():
    with pytest.raises(wire.WireError):
        wire.encode_elements([4], 4)
    with pytest.raises(wire.WireError):
        wire.decode_elements(b"\x05", 5, 1)
    with pytest.raises(wire.WireError):
        wire.decode_elements(b"\x01\x02", 5, 1)


def test_query_roundtrip():
    rng = np.random.default_rng(0)
    coeffs = rng.integers(0, 257, size=(4, 3, 5))
    h = wire.QueryHeader(5, 3, 3, 5, 257, 2, 4)
    payload = wire.encode_query(h, coeffs)
    assert len(payload) == 28 + 4 * 3 * 5 * 2
    h2, c2 = wire.decode_query(wire.unframe(wire.frame(payload)))
    assert h2 == h and np.array_equal(c2, coeffs)
    with pytest.raises(wire.WireError):
        wire.encode_query(h, coeffs[:3])
    with pytest.raises(wire.WireError):
        wire.decode_query(payload[:10])


def test_answer_and_frames():
    a = wire.encode_answer([1, 0, 1], 2)
    assert a == b"\x00\x00\x00\x03\x01\x00\x01"
    assert np.array_equal(wire.decode_answer(a, 2), [1, 0, 1])
    stream = io.BytesIO(wire.frame(b"ab") + wire.frame(b""))
    assert wire.read_frame(stream) == b"ab"
    assert wire.read_frame(stream) == b""
    with pytest.raises(EOFError):
        wire.read_frame(stream)
    with pytest.raises(EOFError):
        wire.unframe(b"\x00\x00\x00\x05ab")


def test_records_text():
    W = np.array([[0, 1, 2], [2, 2, 0]])
    text = wire.format_records(W, 3)
    assert text.splitlines()[0] == "3 3 2"
    q, W2 = wire.parse_records(text)
    assert q == 3 and np.array_equal(W, W2)
    for bad in ["3 3\n0 1 2", "3 3 2\n0 1 2", "2 3 1\n0 1 2"]:
        with pytest.raises(ValueError):
            wire.parse_records(bad)

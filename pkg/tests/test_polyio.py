import struct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tqf import polyio
from tqf.discriminant import disc_poly
from tqf.errors import BadMagicError, ExponentRangeError, ParseError, TruncatedError, ZeroCoefficientError
from tqf.sparse import SparsePoly

terms = st.dictionaries(st.tuples(*[st.integers(0, 6)] * 4), st.integers(-(1 << 63), (1 << 63) - 1), max_size=20)


@given(terms)
def test_binary_roundtrip(t):
    P = SparsePoly(4, t)
    assert polyio.loads_binary(polyio.dumps_binary(P)) == P


@given(terms)
def test_text_roundtrip(t):
    P = SparsePoly(4, t)
    assert polyio.loads_text(polyio.dumps_text(P)) == P


def test_delta3_file(tmp_path):
    P = disc_poly(3)
    b, t = tmp_path / "d3.tqd", tmp_path / "d3.txt"
    polyio.write_binary(P, b)
    polyio.write_text(P, t)
    data = b.read_bytes()
    magic, degree, nvars, count = struct.unpack_from("<4sHHQ", data)
    assert (magic, degree, nvars, count) == (b"TQD1", 3, 10, 2040)
    assert len(data) == 16 + 10 + 2040 * 18
    assert polyio.read_poly(b) == P == polyio.read_poly(t)
    # byte-identical rewrite
    assert polyio.dumps_binary(polyio.read_poly(t)) == data


def test_overflow_rejected():
    with pytest.raises(OverflowError):
        polyio.dumps_binary(SparsePoly(1, {(1,): 1 << 63}))


def _image():
    return bytearray(polyio.dumps_binary(SparsePoly(2, {(2, 0): 5, (1, 1): -3, (0, 2): 7})))


def test_bad_magic():
    data = _image()
    data[:4] = b"XXXX"
    with pytest.raises(BadMagicError):
        polyio.loads_binary(bytes(data))


def test_truncated():
    data = bytes(_image())
    with pytest.raises(TruncatedError):
        polyio.loads_binary(data[:-1])
    with pytest.raises(TruncatedError):
        polyio.loads_binary(data[:10])


def test_trailing_bytes():
    with pytest.raises(ParseError):
        polyio.loads_binary(bytes(_image()) + b"\0")


def test_exponent_range_and_zero():
    data = _image()
    off = 16 + 2
    data[off] = 9  # first record's exponent exceeds the declared maximum 2
    with pytest.raises(ExponentRangeError):
        polyio.loads_binary(bytes(data))
    data = _image()
    data[off + 2: off + 10] = b"\0" * 8
    with pytest.raises(ZeroCoefficientError):
        polyio.loads_binary(bytes(data))


def test_order_violation():
    data = _image()
    rec = 10
    first = bytes(data[18:18 + rec])
    data[18:18 + rec] = data[18 + rec:18 + 2 * rec]
    data[18 + rec:18 + 2 * rec] = first
    with pytest.raises(ParseError):
        polyio.loads_binary(bytes(data))


def test_text_errors():
    with pytest.raises(ParseError) as exc:
        polyio.loads_text("1 0 1\n2 1 0\n")
    assert exc.value.line == 2
    with pytest.raises(ZeroCoefficientError):
        polyio.loads_text("0 1 0\n")
    with pytest.raises(ParseError):
        polyio.loads_text("1 1\n1 0 0\n")


def test_read_poly_sniffs(tmp_path):
    p = tmp_path / "x"
    p.write_bytes(b"XXXXjunkjunkjunkjunk")
    with pytest.raises(BadMagicError):
        polyio.read_poly(p)

"""Binary (``TQD1``) and text serialization of discriminant polynomials.

Binary layout, all little-endian::

    magic     4 bytes  b"TQD1"
    degree    uint16   form degree d (0 if the variable count is not some n_d)
    nvars     uint16
    nterms    uint64
    maxdeg    nvars x uint8   per-variable maximum exponent
    records   nterms x (nvars x uint8 exponents, int64 coefficient)

Records are in canonical order (descending lexicographic exponents).  The text
format has one term per line, ``coefficient e_1 ... e_n``, in the same order,
after an optional ``#`` comment header.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import BadMagicError, ExponentRangeError, ParseError, TruncatedError, ZeroCoefficientError
from .sparse import SparsePoly, pack

MAGIC = b"TQD1"
_HEADER = struct.Struct("<4sHHQ")
INT64_MIN, INT64_MAX = -(1 << 63), (1 << 63) - 1


def degree_for_nvars(nvars: int) -> int:
    d = 0
    while (d + 1) * (d + 2) // 2 < nvars:
        d += 1
    return d if (d + 1) * (d + 2) // 2 == nvars else 0


def record_dtype(nvars: int) -> np.dtype:
    return np.dtype([("e", "u1", (nvars,)), ("c", "<i8")])


def _arrays(P: SparsePoly):
    items = P.items()
    exps = np.array([e for e, _ in items], dtype=np.uint8).reshape(len(items), P.nvars)
    coeffs = [c for _, c in items]
    if any(c < INT64_MIN or c > INT64_MAX for c in coeffs):
        raise OverflowError("coefficient does not fit in a signed 64-bit record")
    return exps, np.array(coeffs, dtype="<i8")


def dumps_binary(P: SparsePoly, degree: int | None = None) -> bytes:
    n = P.nvars
    exps, coeffs = _arrays(P)
    if degree is None:
        degree = degree_for_nvars(n)
    maxdeg = exps.max(axis=0) if len(exps) else np.zeros(n, dtype=np.uint8)
    rec = np.empty(len(coeffs), dtype=record_dtype(n))
    rec["e"] = exps
    rec["c"] = coeffs
    return _HEADER.pack(MAGIC, degree, n, len(coeffs)) + maxdeg.astype(np.uint8).tobytes() + rec.tobytes()


def write_binary(P: SparsePoly, path, degree: int | None = None) -> None:
    Path(path).write_bytes(dumps_binary(P, degree))


def parse_binary_arrays(data: bytes):
    """Validate a TQD1 image and return ``(degree, exponents, coefficients)`` arrays."""
    if len(data) < _HEADER.size:
        if data[:4] != MAGIC[: len(data[:4])]:
            raise BadMagicError(f"bad magic {data[:4]!r}")
        raise TruncatedError("file shorter than the TQD1 header")
    magic, degree, n, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    off = _HEADER.size
    if len(data) < off + n:
        raise TruncatedError("truncated per-variable degree table")
    maxdeg = np.frombuffer(data, dtype=np.uint8, count=n, offset=off)
    off += n
    dt = record_dtype(n)
    body = len(data) - off
    if body < count * dt.itemsize:
        raise TruncatedError(f"header declares {count} records but only {body // dt.itemsize} are present")
    if body > count * dt.itemsize:
        raise ParseError(f"{body - count * dt.itemsize} trailing bytes after {count} records")
    rec = np.frombuffer(data, dtype=dt, count=count, offset=off)
    exps = rec["e"]
    coeffs = rec["c"]
    if count:
        bad = np.nonzero((exps > maxdeg).any(axis=1))[0]
        if len(bad):
            raise ExponentRangeError(f"record {int(bad[0])} exceeds the declared maximum exponents")
        zero = np.nonzero(coeffs == 0)[0]
        if len(zero):
            raise ZeroCoefficientError(f"record {int(zero[0])} has a zero coefficient")
        _check_order(exps)
    return degree, exps, coeffs


def _check_order(exps: np.ndarray) -> None:
    # strictly descending lexicographic order; compare consecutive rows
    if len(exps) < 2:
        return
    a, b = exps[:-1].astype(np.int16), exps[1:].astype(np.int16)
    diff = a - b
    nz = diff != 0
    first = np.argmax(nz, axis=1)
    has = nz.any(axis=1)
    lead = diff[np.arange(len(diff)), first]
    bad = np.nonzero(~has | (lead < 0))[0]
    if len(bad):
        raise ParseError(f"records {int(bad[0])} and {int(bad[0]) + 1} are not in canonical order")


def loads_binary(data: bytes) -> SparsePoly:
    _, exps, coeffs = parse_binary_arrays(data)
    n = exps.shape[1]
    packed = {pack(e): int(c) for e, c in zip(exps.tolist(), coeffs.tolist())}
    return SparsePoly._raw(n, packed)


def read_binary(path) -> SparsePoly:
    return loads_binary(Path(path).read_bytes())


def read_binary_arrays(path):
    return parse_binary_arrays(Path(path).read_bytes())


def dumps_text(P: SparsePoly, degree: int | None = None) -> str:
    if degree is None:
        degree = degree_for_nvars(P.nvars)
    lines = [f"# TQD1 degree={degree} nvars={P.nvars} terms={len(P)}"]
    lines += [" ".join([str(c), *map(str, e)]) for e, c in P.items()]
    return "\n".join(lines) + "\n"


def write_text(P: SparsePoly, path, degree: int | None = None) -> None:
    Path(path).write_text(dumps_text(P, degree))


def loads_text(text: str) -> SparsePoly:
    n = None
    terms: dict[tuple[int, ...], int] = {}
    prev = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if line.startswith("# TQD1") and n is None:
            for item in line.split()[2:]:
                key, _, val = item.partition("=")
                if key == "nvars" and val.isdigit():
                    n = int(val)
            continue
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        try:
            c, exps = int(fields[0]), tuple(int(v) for v in fields[1:])
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if n is None:
            n = len(exps)
        elif len(exps) != n:
            raise ParseError(f"expected {n} exponents, got {len(exps)}", lineno)
        if c == 0:
            raise ZeroCoefficientError("zero coefficient", lineno)
        if any(e < 0 or e > 255 for e in exps):
            raise ExponentRangeError("exponent outside [0, 255]", lineno)
        if prev is not None and exps >= prev:
            raise ParseError("terms not in canonical order", lineno)
        prev = exps
        terms[exps] = c
    return SparsePoly(n or 0, terms)


def read_text(path) -> SparsePoly:
    return loads_text(Path(path).read_text())


def read_poly(path) -> SparsePoly:
    """Read either format, sniffing the binary magic."""
    data = Path(path).read_bytes()
    head = data.lstrip()[:1]
    if head and (head in b"#-" or head.isdigit()):
        return loads_text(data.decode())
    return loads_binary(data)

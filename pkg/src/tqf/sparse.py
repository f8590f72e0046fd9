"""Sparse multivariate polynomials with exact integer coefficients.

Monomials are packed into a single Python int, 8 bits per variable with the
first variable in the most significant position.  Descending order of the
packed keys is then descending lexicographic order of the exponent tuples,
which is the canonical term order used everywhere (including on disk).
"""

from __future__ import annotations

from functools import reduce
from math import gcd
from typing import Iterable, Mapping, Sequence

from .errors import ArityError

EXP_BITS = 8
EXP_MASK = (1 << EXP_BITS) - 1
MAX_EXP = EXP_MASK

# returned by total_degree() for the zero polynomial
ZERO_DEGREE = None


def pack(exps: Sequence[int]) -> int:
    key = 0
    for e in exps:
        if not 0 <= e <= MAX_EXP:
            raise OverflowError(f"exponent {e} outside [0, {MAX_EXP}]")
        key = (key << EXP_BITS) | e
    return key


def unpack(key: int, nvars: int) -> tuple[int, ...]:
    out = [0] * nvars
    for i in range(nvars - 1, -1, -1):
        out[i] = key & EXP_MASK
        key >>= EXP_BITS
    return tuple(out)


class SparsePoly:
    """Immutable polynomial in ``nvars`` variables over the integers."""

    __slots__ = ("nvars", "_terms", "_deg")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], int] | None = None):
        if nvars < 0:
            raise ValueError("nvars must be nonnegative")
        self.nvars = nvars
        packed: dict[int, int] = {}
        for exps, c in (terms or {}).items():
            if len(exps) != nvars:
                raise ArityError(f"exponent tuple {exps} has length {len(exps)}, expected {nvars}")
            if c:
                k = pack(exps)
                packed[k] = packed.get(k, 0) + int(c)
        self._terms = {k: c for k, c in packed.items() if c}
        self._deg = -1

    @classmethod
    def _raw(cls, nvars: int, packed: dict[int, int]) -> "SparsePoly":
        # caller guarantees no zero coefficients
        obj = cls.__new__(cls)
        obj.nvars = nvars
        obj._terms = packed
        obj._deg = -1
        return obj

    @classmethod
    def zero(cls, nvars: int) -> "SparsePoly":
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, c: int, nvars: int) -> "SparsePoly":
        return cls._raw(nvars, {0: int(c)} if c else {})

    @classmethod
    def var(cls, i: int, nvars: int) -> "SparsePoly":
        if not 0 <= i < nvars:
            raise ArityError(f"variable index {i} out of range for {nvars} variables")
        return cls._raw(nvars, {1 << (EXP_BITS * (nvars - 1 - i)): 1})

    # -- inspection -------------------------------------------------------

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def items(self) -> list[tuple[tuple[int, ...], int]]:
        """Terms as ``(exponents, coefficient)`` pairs in canonical order."""
        n = self.nvars
        return [(unpack(k, n), self._terms[k]) for k in sorted(self._terms, reverse=True)]

    def packed_items(self) -> list[tuple[int, int]]:
        return [(k, self._terms[k]) for k in sorted(self._terms, reverse=True)]

    def coefficient(self, exps: Sequence[int]) -> int:
        return self._terms.get(pack(exps), 0)

    def coefficients(self) -> Iterable[int]:
        return self._terms.values()

    def total_degree(self):
        if not self._terms:
            return ZERO_DEGREE
        if self._deg < 0:
            n = self.nvars
            self._deg = max(sum(unpack(k, n)) for k in self._terms)
        return self._deg

    def degrees(self) -> tuple[int, ...]:
        """Per-variable maximum degree (all zeros for the zero polynomial)."""
        n = self.nvars
        best = [0] * n
        for k in self._terms:
            for i, e in enumerate(unpack(k, n)):
                if e > best[i]:
                    best[i] = e
        return tuple(best)

    def is_homogeneous(self) -> bool:
        n = self.nvars
        return len({sum(unpack(k, n)) for k in self._terms}) <= 1

    def content(self) -> int:
        return reduce(gcd, self._terms.values(), 0)

    def max_abs_coefficient(self) -> int:
        return max((abs(c) for c in self._terms.values()), default=0)

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            if other.nvars != self.nvars:
                raise ArityError(f"nvars mismatch: {self.nvars} vs {other.nvars}")
            return other
        if isinstance(other, int):
            return SparsePoly.constant(other, self.nvars)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if len(other._terms) > len(self._terms):
            big, small = other._terms, self._terms
        else:
            big, small = self._terms, other._terms
        out = dict(big)
        for k, c in small.items():
            s = out.get(k, 0) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return SparsePoly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return SparsePoly._raw(self.nvars, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, int):
            if not other:
                return SparsePoly.zero(self.nvars)
            return SparsePoly._raw(self.nvars, {k: c * other for k, c in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self._terms or not other._terms:
            return SparsePoly.zero(self.nvars)
        if self.total_degree() + other.total_degree() > MAX_EXP:
            raise OverflowError("product degree exceeds the packed exponent range")
        a, b = self._terms, other._terms
        if len(a) < len(b):
            a, b = b, a
        out: dict[int, int] = {}
        get = out.get
        b_items = list(b.items())
        for ka, ca in a.items():
            for kb, cb in b_items:
                k = ka + kb
                out[k] = get(k, 0) + ca * cb
        return SparsePoly._raw(self.nvars, {k: c for k, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power")
        result = SparsePoly.constant(1, self.nvars)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def exact_div(self, d: int) -> "SparsePoly":
        """Divide every coefficient by ``d``; raises if any division is inexact."""
        out = {}
        for k, c in self._terms.items():
            q, r = divmod(c, d)
            if r:
                raise ArithmeticError(f"coefficient {c} not divisible by {d}")
            out[k] = q
        return SparsePoly._raw(self.nvars, out)

    def __eq__(self, other):
        if isinstance(other, int):
            other = SparsePoly.constant(other, self.nvars)
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self._terms.items())))

    # -- substitution and evaluation --------------------------------------

    def specialize(self, var: int, value: int) -> "SparsePoly":
        """Substitute an integer for variable ``var``; the result has one fewer variable."""
        n = self.nvars
        if not 0 <= var < n:
            raise ArityError(f"variable index {var} out of range for {n} variables")
        shift = EXP_BITS * (n - 1 - var)
        low_mask = (1 << shift) - 1
        out: dict[int, int] = {}
        powers: dict[int, int] = {}
        for k, c in self._terms.items():
            e = (k >> shift) & EXP_MASK
            pw = powers.get(e)
            if pw is None:
                pw = powers[e] = value**e
            nk = ((k >> (shift + EXP_BITS)) << shift) | (k & low_mask)
            out[nk] = out.get(nk, 0) + c * pw
        return SparsePoly._raw(n - 1, {k: c for k, c in out.items() if c})

    def evaluate(self, values: Sequence[int], modulus: int | None = None) -> int:
        n = self.nvars
        if len(values) != n:
            raise ArityError(f"expected {n} values, got {len(values)}")
        total = 0
        for k, c in self._terms.items():
            term = c
            for i, e in enumerate(unpack(k, n)):
                if e:
                    term *= pow(values[i], e, modulus) if modulus else values[i] ** e
            total += term
        return total % modulus if modulus else total

    def substitute(self, images: Sequence["SparsePoly"]) -> "SparsePoly":
        """Compose with ``images``: variable i is replaced by ``images[i]``."""
        if len(images) != self.nvars:
            raise ArityError(f"expected {self.nvars} images, got {len(images)}")
        m = images[0].nvars if images else 0
        cache: list[dict[int, SparsePoly]] = [{} for _ in images]

        def power(i, e):
            got = cache[i].get(e)
            if got is None:
                got = cache[i][e] = images[i] ** e
            return got

        result = SparsePoly.zero(m)
        for exps, c in self.items():
            term = SparsePoly.constant(c, m)
            for i, e in enumerate(exps):
                if e:
                    term = term * power(i, e)
            result = result + term
        return result

    def __repr__(self):
        if not self._terms:
            return f"SparsePoly({self.nvars}, 0)"
        return f"SparsePoly({self.nvars}, {self.format()})"

    def format(self, names: Sequence[str] | None = None) -> str:
        if not self._terms:
            return "0"
        names = names or [f"a{i}" for i in range(self.nvars)]
        parts = []
        for exps, c in self.items():
            mono = "*".join(
                names[i] if e == 1 else f"{names[i]}^{e}" for i, e in enumerate(exps) if e
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def poly_stats(P: SparsePoly):
    """``(total degree, term count, max |coefficient|, content)``.

    The degree of the zero polynomial is ``ZERO_DEGREE`` (``None``).
    """
    return (P.total_degree(), len(P), P.max_abs_coefficient(), P.content())


def poly_arith(P: SparsePoly, Q=None, op: str = "add", var: int | None = None, value: int | None = None):
    """Dispatch helper: ``op`` is ``add``, ``multiply`` or ``specialize``."""
    if op == "specialize":
        return P.specialize(var, value)
    if isinstance(Q, SparsePoly) and Q.nvars != P.nvars:
        raise ArityError(f"nvars mismatch: {P.nvars} vs {Q.nvars}")
    if op == "add":
        return P + Q
    if op == "multiply":
        return P * Q
    raise ValueError(f"unknown operation {op!r}")

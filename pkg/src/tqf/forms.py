"""Ternary forms as dense coefficient vectors over the monomial basis.

Monomials of degree d in (x0, x1, x2) = (x, y, z) are indexed by exponent
vectors in descending lexicographic order: (d,0,0) first, (0,0,d) last.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Sequence

from .errors import DegreeMismatchError, InvalidDegreeError, InvalidPrimeError

VARIABLES = ("x", "y", "z")


def exponent_set(d: int) -> list[tuple[int, int, int]]:
    """E_d in canonical order."""
    if not isinstance(d, int) or d < 1:
        raise InvalidDegreeError(f"degree must be a positive integer, got {d!r}")
    return list(_exponents(d))


@lru_cache(maxsize=None)
def _exponents(d: int) -> tuple[tuple[int, int, int], ...]:
    # d == 0 is allowed internally (constants show up in F-decompositions)
    return tuple((i, j, d - i - j) for i in range(d, -1, -1) for j in range(d - i, -1, -1))


@lru_cache(maxsize=None)
def exponent_index(d: int) -> dict[tuple[int, int, int], int]:
    return {u: k for k, u in enumerate(_exponents(d))}


def nmonomials(d: int) -> int:
    return comb(d + 2, 2)


def monomial_name(u: Sequence[int]) -> str:
    return "a" + "".join(str(e) for e in u)


@dataclass(frozen=True)
class TernaryForm:
    """A degree-d form; ``coeffs[k]`` multiplies the k-th monomial of E_d.

    Coefficients are normally Python ints.  The resultant code also builds
    forms whose coefficients are ``SparsePoly`` values (generic forms).
    """

    degree: int
    coeffs: tuple

    def __post_init__(self):
        if self.degree < 1:
            raise InvalidDegreeError(f"degree must be >= 1, got {self.degree}")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if len(self.coeffs) != nmonomials(self.degree):
            raise DegreeMismatchError(
                f"degree {self.degree} form needs {nmonomials(self.degree)} coefficients, "
                f"got {len(self.coeffs)}"
            )

    @classmethod
    def from_dict(cls, degree: int, terms: dict) -> "TernaryForm":
        idx = exponent_index(degree)
        coeffs = [0] * nmonomials(degree)
        for u, c in terms.items():
            if u not in idx:
                raise DegreeMismatchError(f"monomial {u} is not of degree {degree}")
            coeffs[idx[u]] += c
        return cls(degree, coeffs)

    @classmethod
    def parse(cls, text: str, degree: int | None = None) -> "TernaryForm":
        """Parse an expression such as ``"x^3*z + 2x^2z^2 - y z^3"``."""
        terms = parse_terms(text)
        degrees = {sum(u) for u in terms}
        if degree is None:
            if len(degrees) != 1:
                raise DegreeMismatchError(f"not homogeneous: {text!r}")
            degree = degrees.pop()
        elif degrees - {degree}:
            raise DegreeMismatchError(f"not homogeneous of degree {degree}: {text!r}")
        return cls.from_dict(degree, terms)

    @classmethod
    def zero(cls, degree: int) -> "TernaryForm":
        return cls(degree, [0] * nmonomials(degree))

    def as_dict(self) -> dict[tuple[int, int, int], object]:
        return {u: c for u, c in zip(_exponents(self.degree), self.coeffs) if c}

    def __neg__(self) -> "TernaryForm":
        return TernaryForm(self.degree, [-c for c in self.coeffs])

    def scale(self, c) -> "TernaryForm":
        return TernaryForm(self.degree, [c * a for a in self.coeffs])

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __call__(self, x, y, z):
        return sum(
            c * x ** u[0] * y ** u[1] * z ** u[2]
            for u, c in zip(_exponents(self.degree), self.coeffs)
            if c
        )

    def __str__(self):
        parts = []
        for u, c in zip(_exponents(self.degree), self.coeffs):
            if not c:
                continue
            mono = "*".join(
                v if e == 1 else f"{v}^{e}" for v, e in zip(VARIABLES, u) if e
            )
            if c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ") if parts else "0"


_TERM_RE = re.compile(r"([+-]?)\s*(\d*)\s*\*?\s*((?:[xyz](?:\^\d+)?\s*\*?\s*)*)")


def parse_terms(text: str) -> dict[tuple[int, int, int], int]:
    s = text.replace("**", "^").replace(" ", "")
    if not s:
        raise ValueError("empty expression")
    terms: dict[tuple[int, int, int], int] = {}
    pos = 0
    while pos < len(s):
        m = _TERM_RE.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse {text!r} at offset {pos}")
        sign, num, mono = m.groups()
        if not num and not mono:
            raise ValueError(f"cannot parse {text!r} at offset {pos}")
        c = int(num) if num else 1
        if sign == "-":
            c = -c
        u = [0, 0, 0]
        for v, e in re.findall(r"([xyz])(?:\^(\d+))?", mono):
            u[VARIABLES.index(v)] += int(e) if e else 1
        key = tuple(u)
        terms[key] = terms.get(key, 0) + c
        pos = m.end()
    return {u: c for u, c in terms.items() if c}


def partial_derivative(f: TernaryForm, i: int) -> TernaryForm:
    """d f / d x_i as a form of degree d-1."""
    if i not in (0, 1, 2):
        raise ValueError(f"axis must be 0, 1 or 2, got {i}")
    d = f.degree
    if d < 2:
        raise InvalidDegreeError("the derivative of a linear form is a constant, not a form")
    src = exponent_index(d)
    out = []
    for u in _exponents(d - 1):
        w = list(u)
        w[i] += 1
        out.append(w[i] * f.coeffs[src[tuple(w)]])
    return TernaryForm(d - 1, out)


def gradient(f: TernaryForm) -> tuple[TernaryForm, TernaryForm, TernaryForm]:
    return partial_derivative(f, 0), partial_derivative(f, 1), partial_derivative(f, 2)


def evaluate_mod_p(f: TernaryForm, point: Sequence[int], p: int) -> int:
    if p < 2:
        raise InvalidPrimeError(f"modulus must be a prime >= 2, got {p}")
    x, y, z = (v % p for v in point)
    total = 0
    for u, c in zip(_exponents(f.degree), f.coeffs):
        if c:
            total += c * pow(x, u[0], p) * pow(y, u[1], p) * pow(z, u[2], p)
    return total % p


# -- ternary polynomial arithmetic over an arbitrary coefficient ring ------
# A "tpoly" is a dict {(e0, e1, e2): coefficient}; coefficients may be ints
# or SparsePoly values.  Zero coefficients are dropped where detectable.


def tp_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ua, ca in a.items():
        for ub, cb in b.items():
            u = (ua[0] + ub[0], ua[1] + ub[1], ua[2] + ub[2])
            prod = ca * cb
            out[u] = out[u] + prod if u in out else prod
    return {u: c for u, c in out.items() if c}


def tp_add(a: dict, b: dict, sign: int = 1) -> dict:
    out = dict(a)
    for u, c in b.items():
        c = c if sign == 1 else -c
        out[u] = out[u] + c if u in out else c
    return {u: c for u, c in out.items() if c}


# -- the GL3 action ---------------------------------------------------------


@dataclass(frozen=True)
class TransformElement:
    """A unimodular 3x3 integer matrix acting by f -> f(Mx)."""

    matrix: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        m = tuple(tuple(int(v) for v in row) for row in self.matrix)
        if len(m) != 3 or any(len(r) != 3 for r in m):
            raise ValueError("transform must be a 3x3 matrix")
        object.__setattr__(self, "matrix", m)
        if det3(m) not in (1, -1):
            raise ValueError(f"matrix {m} is not unimodular (det {det3(m)})")

    def __matmul__(self, other: "TransformElement") -> "TransformElement":
        a, b = self.matrix, other.matrix
        return TransformElement(
            tuple(tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)) for i in range(3))
        )

    @property
    def det(self) -> int:
        return det3(self.matrix)

    @classmethod
    def identity(cls) -> "TransformElement":
        return cls(((1, 0, 0), (0, 1, 0), (0, 0, 1)))


def det3(m) -> int:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


@lru_cache(maxsize=256)
def action_matrix(d: int, matrix: tuple) -> tuple[tuple[tuple[int, int], ...], ...]:
    """Sparse rows of the linear map on coefficient vectors induced by f -> f(Mx).

    Row k lists ``(source index, multiplier)`` pairs for output coefficient k.
    """
    idx = exponent_index(d)
    linear = [{(1, 0, 0): matrix[i][0], (0, 1, 0): matrix[i][1], (0, 0, 1): matrix[i][2]} for i in range(3)]
    linear = [{u: c for u, c in l.items() if c} for l in linear]
    powers = [[{(0, 0, 0): 1}] for _ in range(3)]
    for i in range(3):
        for _ in range(d):
            powers[i].append(tp_mul(powers[i][-1], linear[i]))
    rows: list[list[tuple[int, int]]] = [[] for _ in range(len(idx))]
    for src, u in enumerate(_exponents(d)):
        image = tp_mul(tp_mul(powers[0][u[0]], powers[1][u[1]]), powers[2][u[2]])
        for w, c in image.items():
            rows[idx[w]].append((src, c))
    return tuple(tuple(r) for r in rows)


def apply_matrix(f: TernaryForm, M: TransformElement) -> TernaryForm:
    """The form x -> f(Mx)."""
    rows = action_matrix(f.degree, M.matrix)
    a = f.coeffs
    return TernaryForm(f.degree, [sum(c * a[s] for s, c in row) for row in rows])

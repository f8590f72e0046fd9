"""Resultants of three ternary forms via Sylvester's determinantal formula.

For forms f0, f1, f2 of degree d >= 2 the square matrix ``Phi`` has
3*C(d, 2) rows ``x^u * f_i`` (u in E_{d-2}) followed by C(d+1, 2) rows
``det[F_ij^(u)]`` (u in E_{d-1}); columns are the monomials of degree 2d-2.
Its determinant is the resultant up to a sign that depends only on d and on
the row/column ordering; that sign is fixed once per degree by evaluating at
(x^d, y^d, z^d), where the resultant is 1.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from math import comb

from .errors import DegreeMismatchError, InvalidDegreeError
from .forms import TernaryForm, _exponents, exponent_index, tp_add, tp_mul


def f_decomposition(f: TernaryForm, u) -> tuple[dict, dict, dict]:
    """Split f = sum_j x_j^(u_j+1) * F_j greedily (x0 first, then x1, then x2).

    Each F_j is returned as a dict ``{exponent: coefficient}`` of degree
    ``d - 1 - u_j`` (possibly a constant).
    """
    d = f.degree
    u = tuple(u)
    if len(u) != 3 or min(u) < 0 or sum(u) != d - 1:
        raise DegreeMismatchError(f"u={u} is not in E_{d - 1}")
    parts: tuple[dict, dict, dict] = ({}, {}, {})
    for w, c in zip(_exponents(d), f.coeffs):
        if not c:
            continue
        for j in range(3):
            if w[j] > u[j]:
                q = list(w)
                q[j] -= u[j] + 1
                parts[j][tuple(q)] = c
                break
        else:  # pragma: no cover - sum(w) = d > sum(u) rules this out
            raise AssertionError("monomial not divisible by any x_j^(u_j+1)")
    return parts


def _as_tpoly(f: TernaryForm) -> dict:
    return {u: c for u, c in zip(_exponents(f.degree), f.coeffs) if c}


def _det3_tpoly(F) -> dict:
    # cofactor expansion along the first row
    m = lambda a, b: tp_mul(a, b)  # noqa: E731
    minor0 = tp_add(m(F[1][1], F[2][2]), m(F[1][2], F[2][1]), -1)
    minor1 = tp_add(m(F[1][0], F[2][2]), m(F[1][2], F[2][0]), -1)
    minor2 = tp_add(m(F[1][0], F[2][1]), m(F[1][1], F[2][0]), -1)
    out = tp_mul(F[0][0], minor0)
    out = tp_add(out, tp_mul(F[0][1], minor1), -1)
    return tp_add(out, tp_mul(F[0][2], minor2))


@dataclass
class PhiMatrix:
    degree: int
    rows: list  # list of row lists; entries are ints or SparsePoly
    n_t_rows: int

    @property
    def size(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]


def phi_size(d: int) -> int:
    return 3 * comb(d, 2) + comb(d + 1, 2)


def build_phi_matrix(f0: TernaryForm, f1: TernaryForm, f2: TernaryForm) -> PhiMatrix:
    forms = (f0, f1, f2)
    d = f0.degree
    if any(f.degree != d for f in forms):
        raise DegreeMismatchError("forms must share a degree")
    if d < 2:
        raise InvalidDegreeError("Sylvester's matrix needs d >= 2; use resultant_linear")
    cols = exponent_index(2 * d - 2)
    n = len(cols)
    polys = [_as_tpoly(f) for f in forms]
    rows = []
    for u in _exponents(d - 2):
        for p in polys:
            row = [0] * n
            for w, c in p.items():
                row[cols[(w[0] + u[0], w[1] + u[1], w[2] + u[2])]] = c
            rows.append(row)
    n_t = len(rows)
    for u in _exponents(d - 1):
        F = [f_decomposition(f, u) for f in forms]
        row = [0] * n
        for w, c in _det3_tpoly(F).items():
            row[cols[w]] = c
        rows.append(row)
    return PhiMatrix(d, rows, n_t)


def fraction_free_det(M) -> int:
    """Exact determinant of a square integer matrix by Bareiss elimination."""
    A = [list(r) for r in M]
    n = len(A)
    if n == 0:
        return 1
    if any(len(r) != n for r in A):
        raise ValueError("matrix must be square")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        piv = A[k][k]
        tail = A[k][k + 1:]
        for i in range(k + 1, n):
            ri = A[i]
            rik = ri[k]
            if rik:
                ri[k + 1:] = [(piv * a - rik * b) // prev for a, b in zip(ri[k + 1:], tail)]
            elif prev == 1:
                ri[k + 1:] = [piv * a for a in ri[k + 1:]]
            else:
                ri[k + 1:] = [piv * a // prev for a in ri[k + 1:]]
        prev = piv
    return sign * A[n - 1][n - 1]


def resultant_linear(f0: TernaryForm, f1: TernaryForm, f2: TernaryForm) -> int:
    if any(f.degree != 1 for f in (f0, f1, f2)):
        raise DegreeMismatchError("resultant_linear expects three linear forms")
    return fraction_free_det([f0.coeffs, f1.coeffs, f2.coeffs])


_sign_lock = threading.Lock()
_signs: dict[int, int] = {}


def phi_sign(d: int) -> int:
    """The sign s with R_d = s * det(Phi) under our row/column ordering."""
    s = _signs.get(d)
    if s is None:
        with _sign_lock:
            s = _signs.get(d)
            if s is None:
                pure = [TernaryForm.from_dict(d, {tuple(d if k == i else 0 for k in range(3)): 1}) for i in range(3)]
                det = fraction_free_det(build_phi_matrix(*pure).rows)
                if det not in (1, -1):
                    raise AssertionError(f"det Phi(x^d, y^d, z^d) = {det}, expected +-1")
                s = _signs[d] = det
    return s


def resultant(f0: TernaryForm, f1: TernaryForm, f2: TernaryForm) -> int:
    """R_d(f0, f1, f2), normalized so that R_d(x^d, y^d, z^d) = 1."""
    d = f0.degree
    if f1.degree != d or f2.degree != d:
        raise DegreeMismatchError("forms must share a degree")
    if d == 1:
        return resultant_linear(f0, f1, f2)
    return phi_sign(d) * fraction_free_det(build_phi_matrix(f0, f1, f2).rows)

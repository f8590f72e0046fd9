"""Slow, independent reference implementations used by the tests."""

from fractions import Fraction
from itertools import product

import numpy as np

MASK64 = (1 << 64) - 1


def det_fraction(M):
    """Determinant by Gaussian elimination over the rationals."""
    A = [[Fraction(v) for v in row] for row in M]
    n = len(A)
    det = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if A[i][k] != 0), None)
        if piv is None:
            return 0
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            det = -det
        det *= A[k][k]
        for i in range(k + 1, n):
            f = A[i][k] / A[k][k]
            if f:
                for j in range(k, n):
                    A[i][j] -= f * A[k][j]
    assert det.denominator == 1
    return int(det)


def disc2_hessian(c):
    """Delta_2 from the Hessian: det H = -2 Delta_2 for the quadric with coefficients c."""
    a200, a110, a101, a020, a011, a002 = c
    H = [[2 * a200, a110, a101], [a110, 2 * a020, a011], [a101, a011, 2 * a002]]
    return -det_fraction(H) // 2


def poly_eval(terms, values):
    """Sum of c * prod(v^e) straight from a term dict."""
    total = 0
    for exps, c in terms.items():
        t = c
        for v, e in zip(values, exps):
            t *= v**e
        total += t
    return total


def horner_mod64(g, c):
    acc = 0
    for a in reversed(g):
        acc = (acc * c + a) & MASK64
    return acc - (1 << 64) if acc >> 63 else acc


class FlatEvaluator:
    """Partial substitution evaluated from the flat term list on every call.

    Values at cursor level L are sums of fully multiplied-out terms grouped
    by their exponent prefix, with no reuse between calls.
    """

    def __init__(self, exps, coeffs, order):
        E = np.asarray(exps)[:, order]
        perm = np.lexsort(E.T[::-1])
        self.E = E[perm]
        self.coeffs = np.array([int(coeffs[i]) & MASK64 for i in perm.tolist()], dtype=np.uint64)
        self.n = E.shape[1]
        self.starts = {}
        for L in range(1, self.n + 1):
            P = self.E[:, :L]
            change = np.ones(len(P), dtype=bool)
            change[1:] = (P[1:] != P[:-1]).any(axis=1)
            self.starts[L] = np.flatnonzero(change)

    def values(self, assignment):
        vals = self.coeffs.copy()
        for j, c in enumerate(assignment):
            col = self.E[:, self.n - 1 - j]
            table = np.array([pow(int(c), e, 1 << 64) for e in range(int(col.max()) + 1)], dtype=np.uint64)
            vals = vals * table[col]
        L = self.n - len(assignment)
        if L == 0:
            return [int(vals.sum(dtype=np.uint64))]
        return np.add.reduceat(vals, self.starts[L]).tolist()


def prefix_counts(exps, order):
    """Distinct prefixes at each depth: the level sizes of the tree."""
    E = np.asarray(exps)[:, order]
    return [len({tuple(r) for r in E[:, : k + 1].tolist()}) for k in range(E.shape[1])]


def count_points_orbits(f, p):
    """Projective zeros of a ternary form by enumerating F_p^3 minus 0."""
    zeros = sum(1 for x, y, z in product(range(p), repeat=3) if (x, y, z) != (0, 0, 0) and f(x, y, z) % p == 0)
    assert zeros % (p - 1) == 0
    return zeros // (p - 1)


def count_points_hyper_naive(h, fpoly, p):
    def ev(poly, x):
        return sum(c * x**i for i, c in enumerate(poly))

    affine = sum(1 for x in range(p) for y in range(p) if (y * y + ev(h, x) * y - ev(fpoly, x)) % p == 0)
    h4 = h[4] if len(h) > 4 else 0
    f8 = fpoly[8] if len(fpoly) > 8 else 0
    inf = sum(1 for t in range(p) if (t * t + h4 * t - f8) % p == 0)
    return affine + inf

"""Vectorized discriminant residues for many forms at once.

The entries of Phi for the partials of a generic form are fixed polynomials
in the form's coefficients (linear in the T-rows, cubic in the D-rows).  For a
batch of integer forms we evaluate them modulo two primes below 2^26, take
determinants by modular Gaussian elimination, and combine with the CRT.  The
result is Delta(f) modulo P = p1*p2 as a symmetric residue: exact whenever
|Delta(f)| < P/2, which makes it a lossless filter for small discriminants.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .discriminant import disc_exponent, generic_gradient_matrix, generic_phi
from .resultant import phi_sign


def _prev_prime(n: int) -> int:
    def is_prime(m):
        if m < 2:
            return False
        i = 2
        while i * i <= m:
            if m % i == 0:
                return False
            i += 1
        return True

    n -= 1
    while not is_prime(n):
        n -= 1
    return n


# products of two residues and sums of up to ~1000 of them stay below 2^63
P1 = _prev_prime(1 << 26)
P2 = _prev_prime(P1)
MODULUS = P1 * P2


class PhiProgram:
    """Phi entries of a generic degree-d form compiled to monomial tables."""

    def __init__(self, d: int):
        self.degree = d
        if d == 2:
            rows = generic_gradient_matrix(2)
            self.sign = 1
        else:
            rows = generic_phi(d).rows
            self.sign = phi_sign(d - 1)
        self.size = len(rows)
        monos: dict[tuple[int, ...], int] = {}
        entries, cols, coefs = [], [], []
        for i, row in enumerate(rows):
            for j, v in enumerate(row):
                if isinstance(v, int):
                    if v:
                        raise ValueError("constant entries are not expected in a generic Phi")
                    continue
                for exps, c in v.items():
                    key = tuple(k for k, e in enumerate(exps) for _ in range(e))
                    m = monos.setdefault(key, len(monos))
                    entries.append(i * self.size + j)
                    cols.append(m)
                    coefs.append(c)
        self.monomials = list(monos)
        self._coo = (np.array(entries), np.array(cols), np.array(coefs, dtype=np.int64))
        self._by_prime: dict[int, sp.csr_matrix] = {}
        self.divisor = d ** disc_exponent(d)

    def entry_matrix(self, p: int) -> sp.csr_matrix:
        got = self._by_prime.get(p)
        if got is None:
            rows, cols, coefs = self._coo
            got = self._by_prime[p] = sp.csr_matrix(
                (coefs % p, (rows, cols)), shape=(self.size * self.size, len(self.monomials)), dtype=np.int64
            )
        return got

    def evaluate(self, X: np.ndarray, p: int) -> np.ndarray:
        """Phi for every form in ``X`` (batch x nvars) modulo p, shape (batch, n, n)."""
        Xp = np.ascontiguousarray((X % p).T)
        cache: dict[tuple[int, ...], np.ndarray] = {}

        def mono(key):
            got = cache.get(key)
            if got is None:
                if len(key) == 1:
                    got = Xp[key[0]]
                else:
                    got = mono(key[:-1]) * Xp[key[-1]] % p
                cache[key] = got
            return got

        V = np.empty((len(self.monomials), X.shape[0]), dtype=np.int64)
        for m, key in enumerate(self.monomials):
            V[m] = mono(key)
        E = (self.entry_matrix(p) @ V) % p
        return np.ascontiguousarray(E.T).reshape(X.shape[0], self.size, self.size)


@lru_cache(maxsize=None)
def program(d: int) -> PhiProgram:
    return PhiProgram(d)


def modinv(a: np.ndarray, p: int) -> np.ndarray:
    """Elementwise inverse modulo a prime p (a must be nonzero mod p)."""
    result = np.ones_like(a)
    base = a % p
    e = p - 2
    while e:
        if e & 1:
            result = result * base % p
        e >>= 1
        if e:
            base = base * base % p
    return result


def det_mod_p(A: np.ndarray, p: int) -> np.ndarray:
    """Determinants of a stack of square matrices modulo a prime p."""
    A = np.array(A, dtype=np.int64) % p
    N, n, _ = A.shape
    det = np.ones(N, dtype=np.int64)
    rows = np.arange(N)
    for k in range(n):
        nz = A[:, k:, k] != 0
        has = nz.any(axis=1)
        rel = nz.argmax(axis=1)
        swap = np.nonzero(rel > 0)[0]
        if len(swap):
            r = k + rel[swap]
            tmp = A[swap, k, :].copy()
            A[swap, k, :] = A[swap, r, :]
            A[swap, r, :] = tmp
            det[swap] = (p - det[swap]) % p
        det[~has] = 0
        piv = np.where(has, A[rows, k, k], 1)
        det = det * piv % p
        if k + 1 < n:
            f = A[:, k + 1:, k] * modinv(piv, p)[:, None] % p
            A[:, k + 1:, k:] = (A[:, k + 1:, k:] - f[:, :, None] * A[:, None, k, k:]) % p
    return det


def disc_residues(X: np.ndarray, d: int) -> np.ndarray:
    """Delta_d of each row of ``X`` as a symmetric residue modulo ``MODULUS`` (int64)."""
    X = np.asarray(X, dtype=np.int64)
    prog = program(d)
    res = []
    for p in (P1, P2):
        det = det_mod_p(prog.evaluate(X, p), p)
        scale = (-prog.sign * pow(prog.divisor, -1, p)) % p
        res.append(det * scale % p)
    r1, r2 = res
    t = (r2 - r1) % P2 * pow(P1, -1, P2) % P2
    x = r1 + P1 * t
    return np.where(x > MODULUS // 2, x - MODULUS, x)

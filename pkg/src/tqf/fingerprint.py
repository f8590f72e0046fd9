"""Point-count fingerprints of plane quartics over small prime fields.

Two curves land in the same class when they have the same |disc| and the
same number of F_p-points at every good prime p <= p_max.  Since |disc| is
part of the key, both curves have the same set of good primes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .discriminant import disc_eval
from .errors import BadReductionError, CountingError, ShapeError, SingularFormError
from .forms import TernaryForm, exponent_set
from .search import CurveRecord

P_MAX = 256


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i:: i] = False
    return np.flatnonzero(sieve).tolist()


def good_primes(f: TernaryForm, p_max: int = P_MAX, disc: int | None = None) -> list[int]:
    disc = disc_eval(f) if disc is None else disc
    if disc == 0:
        raise SingularFormError("form is singular (discriminant 0)")
    return [p for p in primes_upto(p_max) if disc % p]


def weil_check(n: int, p: int, genus: int = 3) -> None:
    if abs(n - (p + 1)) > math.isqrt(4 * genus * genus * p):
        raise CountingError(f"{n} points over F_{p} violates the Weil bound for genus {genus}")


def _powers(p: int, emax: int) -> np.ndarray:
    t = np.arange(p, dtype=np.int64)
    out = np.ones((emax + 1, p), dtype=np.int64)
    for e in range(1, emax + 1):
        out[e] = out[e - 1] * t % p
    return out


def count_projective(f: TernaryForm, p: int) -> int:
    """Projective F_p-zeros of f over the charts (1:y:z), (0:1:z), (0:0:1)."""
    d = f.degree
    pw = _powers(p, d)
    a = [c % p for c in f.coeffs]
    grid = np.zeros((p, p), dtype=np.int64)
    line = np.zeros(p, dtype=np.int64)
    point = 0
    for c, (u0, u1, u2) in zip(a, exponent_set(d)):
        if not c:
            continue
        grid = (grid + c * np.outer(pw[u1], pw[u2])) % p
        if u0 == 0:
            line = (line + c * pw[u2]) % p
            if u1 == 0:
                point = c
    return int((grid == 0).sum()) + int((line == 0).sum()) + int(point == 0)


def count_points_quartic(f: TernaryForm, p: int, disc: int | None = None) -> int:
    disc = disc_eval(f) if disc is None else disc
    if disc % p == 0:
        raise BadReductionError(f"p={p} divides the discriminant {disc}")
    n = count_projective(f, p)
    weil_check(n, p, (f.degree - 1) * (f.degree - 2) // 2)
    return n


def _eval_mod(poly: Sequence[int], x: np.ndarray, p: int) -> np.ndarray:
    acc = np.zeros_like(x)
    for c in reversed(poly):
        acc = (acc * x + c) % p
    return acc


def count_points_hyperelliptic(h: Sequence[int], fpoly: Sequence[int], p: int) -> int:
    """Points on the smooth model of y^2 + h(x) y = f(x), genus 3.

    ``h`` and ``fpoly`` list coefficients from the constant term up.  Points
    at infinity are the F_p-roots of T^2 + h_4 T - f_8.
    """
    h = list(h)
    fpoly = list(fpoly)
    while h and h[-1] == 0:
        h.pop()
    while fpoly and fpoly[-1] == 0:
        fpoly.pop()
    if len(h) > 5 or len(fpoly) > 9:
        raise ShapeError("genus-3 model needs deg h <= 4 and deg f <= 8")
    if max(2 * (len(h) - 1), len(fpoly) - 1) < 7:
        raise ShapeError("model has genus below 3")
    h4 = h[4] if len(h) > 4 else 0
    f8 = fpoly[8] if len(fpoly) > 8 else 0
    t = np.arange(p, dtype=np.int64)
    hx = _eval_mod(h, t, p)
    fx = _eval_mod(fpoly, t, p)
    # rows x, columns y
    lhs = (t[None, :] * t[None, :] + hx[:, None] * t[None, :] - fx[:, None]) % p
    affine = int((lhs == 0).sum())
    infinity = int(((t * t + h4 * t - f8) % p == 0).sum())
    n = affine + infinity
    weil_check(n, p)
    return n


@dataclass(frozen=True)
class Fingerprint:
    absdisc: int
    counts: tuple[tuple[int, int], ...]

    def to_line(self) -> str:
        return f"{self.absdisc} ; " + " ".join(f"{p}:{n}" for p, n in self.counts)

    def key(self, primes: Iterable[int] | None = None):
        if primes is None:
            return (self.absdisc, self.counts)
        keep = set(primes)
        return (self.absdisc, tuple(c for c in self.counts if c[0] in keep))


def fingerprint(f: TernaryForm, p_max: int = P_MAX, disc: int | None = None) -> Fingerprint:
    disc = disc_eval(f) if disc is None else disc
    primes = good_primes(f, p_max, disc)
    return Fingerprint(abs(disc), tuple((p, count_points_quartic(f, p, disc)) for p in primes))


def group(records: Sequence[CurveRecord], p_max: int = P_MAX):
    """Partition records by fingerprint.

    Returns ``(fingerprints, classes)``: one fingerprint per record in input
    order, and the classes as lists of record indices, ordered by first
    member.
    """
    fps = [fingerprint(r.form(), p_max, r.disc) for r in records]
    by_disc: dict[int, list[int]] = {}
    for i, fp in enumerate(fps):
        by_disc.setdefault(fp.absdisc, []).append(i)
    classes: dict[tuple, list[int]] = {}
    for idx in by_disc.values():
        common = set.intersection(*(set(p for p, _ in fps[i].counts) for i in idx))
        for i in idx:
            classes.setdefault(fps[i].key(common), []).append(i)
    ordered = sorted(classes.values(), key=lambda c: c[0])
    return fps, ordered


def collision_report(records: Sequence[CurveRecord], classes) -> str:
    lines = []
    k = 0
    for cls in classes:
        if len(cls) < 2:
            continue
        k += 1
        lines.append(f"class {k} size {len(cls)} |disc| {abs(records[cls[0]].disc)}")
        lines += ["  " + records[i].to_line() for i in cls]
    return "\n".join(lines) + ("\n" if lines else "")

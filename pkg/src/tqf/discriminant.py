"""Discriminants of ternary forms.

``disc_eval`` computes Delta_d(f) for a concrete integer form through the
resultant of its partial derivatives; ``disc_poly`` computes Delta_d itself
as a polynomial in the n_d coefficient variables a_u.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from itertools import combinations

from .errors import ConsistencyError, InvalidDegreeError, MemoryBudgetError
from .forms import TernaryForm, exponent_set, gradient, monomial_name, nmonomials
from .resultant import PhiMatrix, build_phi_matrix, resultant
from .sparse import SparsePoly

log = logging.getLogger(__name__)


def disc_exponent(d: int) -> int:
    """k with Delta_d = -R_{d-1}(grad f) / d^k."""
    return d * d - 3 * d + 3


def disc_eval(f: TernaryForm) -> int:
    d = f.degree
    if d < 2:
        raise InvalidDegreeError("discriminants are defined for d >= 2")
    r = resultant(*gradient(f))
    q, rem = divmod(r, d ** disc_exponent(d))
    if rem:
        raise ConsistencyError(f"R_{d - 1}(grad f) = {r} is not divisible by {d}^{disc_exponent(d)}")
    return -q


def variable_names(d: int) -> list[str]:
    return [monomial_name(u) for u in exponent_set(d)]


def generic_form(d: int) -> TernaryForm:
    n = nmonomials(d)
    return TernaryForm(d, [SparsePoly.var(i, n) for i in range(n)])


@lru_cache(maxsize=None)
def generic_phi(d: int) -> PhiMatrix:
    """Phi of the partials of the generic degree-d form (entries in Z[a])."""
    if d < 3:
        raise InvalidDegreeError("generic_phi needs d >= 3 (partials of degree >= 2)")
    return build_phi_matrix(*gradient(generic_form(d)))


def generic_gradient_matrix(d: int) -> list[list]:
    """For d = 2 the partials are linear; their 3x3 coefficient matrix."""
    return [list(g.coeffs) for g in gradient(generic_form(d))]


def _is_zero(v) -> bool:
    return not v


def symbolic_det(M) -> SparsePoly | int:
    """Division-free determinant by dynamic programming over column subsets.

    Entries may be ints or SparsePoly; exact for any commutative ring.
    """
    n = len(M)
    states: dict[int, object] = {0: 1}
    for r in range(n):
        row = M[r]
        nz = [j for j in range(n) if not _is_zero(row[j])]
        new: dict[int, object] = {}
        for mask, val in states.items():
            for j in nz:
                bit = 1 << j
                if mask & bit:
                    continue
                term = val * row[j]
                if bin(mask >> (j + 1)).count("1") & 1:
                    term = -term
                key = mask | bit
                new[key] = new[key] + term if key in new else term
        states = {k: v for k, v in new.items() if not _is_zero(v)}
        if not states:
            return 0
    return states.get((1 << n) - 1, 0)


def _submatrix(M, rows, cols):
    return [[M[i][j] for j in cols] for i in rows]


def zero_block_rows(phi: PhiMatrix, k: int = 3):
    """A set of k D-rows with the most common all-zero columns, and those columns."""
    n = phi.size
    d_rows = range(phi.n_t_rows, n)
    best = None
    for rows in combinations(d_rows, k):
        zero_cols = [j for j in range(n) if all(_is_zero(phi.rows[i][j]) for i in rows)]
        if best is None or len(zero_cols) > len(best[1]):
            best = (rows, zero_cols)
    return best


def laplace_terms(phi: PhiMatrix, rows):
    """Column subsets S for the generalized Laplace expansion along ``rows``.

    Returns ``(sign, S, complement_rows, complement_cols)`` for every S whose
    3x3 minor is not trivially zero.
    """
    n = phi.size
    k = len(rows)
    live = [j for j in range(n) if any(not _is_zero(phi.rows[i][j]) for i in rows)]
    other_rows = [i for i in range(n) if i not in rows]
    out = []
    for cols in combinations(live, k):
        sign = -1 if (sum(rows) + sum(cols)) & 1 else 1
        comp = [j for j in range(n) if j not in cols]
        out.append((sign, cols, other_rows, comp))
    return out


def _laplace_product(args):
    M, sign, rows, cols, other_rows, comp = args
    a = symbolic_det(_submatrix(M, rows, cols))
    if _is_zero(a):
        return 0
    b = symbolic_det(_submatrix(M, other_rows, comp))
    return sign * a * b


def _pairwise_sum(values):
    values = [v for v in values if not _is_zero(v)]
    if not values:
        return 0
    while len(values) > 1:
        values = [values[i] + values[i + 1] if i + 1 < len(values) else values[i] for i in range(0, len(values), 2)]
    return values[0]


# bytes per stored term of Delta_4 while accumulating (packed key, big int, dict slot)
_D4_TERMS = 50_767_957
_BYTES_PER_TERM = 160


def _memory_budget() -> int:
    env = os.environ.get("TQF_MEMORY_BUDGET")
    if env:
        return int(float(env))
    try:
        return os.sysconf("SC_PAGE_SIZE") * os.sysconf("SC_PHYS_PAGES")
    except (ValueError, OSError, AttributeError):  # pragma: no cover
        return 1 << 62


def estimate_disc_poly_bytes(d: int) -> int:
    if d <= 3:
        return 1 << 24
    # a handful of partial sums of full size coexist during the pairwise merge
    return 4 * _D4_TERMS * _BYTES_PER_TERM if d == 4 else 1 << 62


def disc_poly(d: int, workers: int = 1, budget: int | None = None) -> SparsePoly:
    """Delta_d as a SparsePoly in the coefficient variables (canonical E_d order)."""
    if d < 2:
        raise InvalidDegreeError("discriminants are defined for d >= 2")
    if d > 4:
        log.warning("disc_poly(%d) is unsupported at useful performance", d)
    need = estimate_disc_poly_bytes(d)
    budget = _memory_budget() if budget is None else budget
    if need > budget:
        raise MemoryBudgetError(
            f"disc_poly({d}) needs roughly {need / 2**30:.0f} GiB but the budget is "
            f"{budget / 2**30:.1f} GiB; raise TQF_MEMORY_BUDGET on a larger machine"
        )
    if d == 2:
        det = symbolic_det(generic_gradient_matrix(2))
    elif d == 3:
        det = symbolic_det(generic_phi(3).rows)
    else:
        phi = generic_phi(d)
        rows, zero_cols = zero_block_rows(phi)
        terms = laplace_terms(phi, rows)
        log.info("expanding det Phi along rows %s: %d block-minor products", rows, len(terms))
        jobs = [(phi.rows, s, rows, cols, other, comp) for s, cols, other, comp in terms]
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                parts = list(pool.map(_laplace_product, jobs))
        else:
            parts = [_laplace_product(j) for j in jobs]
        det = _pairwise_sum(parts)
    if _is_zero(det):
        raise ConsistencyError("generic determinant vanished")
    try:
        delta = det.exact_div(d ** disc_exponent(d))
    except ArithmeticError as exc:
        raise ConsistencyError(str(exc)) from exc
    fermat = [1 if max(u) == d else 0 for u in exponent_set(d)]
    if delta.evaluate(fermat) > 0:
        delta = -delta
    return delta

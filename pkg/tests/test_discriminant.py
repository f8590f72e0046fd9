import random

import numpy as np
import pytest

from tqf import batch
from tqf.discriminant import (
    _laplace_product,
    disc_eval,
    disc_exponent,
    disc_poly,
    generic_phi,
    laplace_terms,
    symbolic_det,
    variable_names,
    zero_block_rows,
)
from tqf.errors import InvalidDegreeError, MemoryBudgetError
from tqf.forms import TernaryForm, TransformElement, apply_matrix, exponent_index, nmonomials
from tqf.resultant import fraction_free_det
from tqf.sparse import SparsePoly

from oracles import disc2_hessian


def rand_form(d, rng, b=9):
    return TernaryForm(d, [rng.randint(-b, b) for _ in range(nmonomials(d))])


@pytest.fixture(scope="module")
def delta3():
    return disc_poly(3)


def test_exponent():
    assert [d ** disc_exponent(d) for d in (2, 3, 4)] == [2, 27, 4**7]


def test_delta2_symbolic():
    names = variable_names(2)
    assert names == ["a200", "a110", "a101", "a020", "a011", "a002"]
    v = dict(zip(names, (SparsePoly.var(i, 6) for i in range(6))))
    expected = (
        v["a200"] * v["a011"] ** 2 + v["a101"] ** 2 * v["a020"] + v["a110"] ** 2 * v["a002"]
        - v["a110"] * v["a101"] * v["a011"] - 4 * v["a200"] * v["a020"] * v["a002"]
    )
    assert disc_poly(2) == expected


def test_delta2_matches_hessian():
    rng = random.Random(2)
    for _ in range(200):
        f = rand_form(2, rng)
        assert disc_eval(f) == disc2_hessian(f.coeffs)
    assert disc_eval(TernaryForm.parse("x^2 + y^2 + z^2")) == -4


def test_delta3_stats(delta3):
    assert delta3.is_homogeneous() and delta3.total_degree() == 12
    assert delta3.nvars == 10
    assert len(delta3) == 2040
    assert delta3.max_abs_coefficient() == 26244
    assert delta3.content() == 1


def test_fermat_values():
    assert disc_eval(TernaryForm.parse("x^3 + y^3 + z^3")) == -(3**9)
    assert disc_eval(TernaryForm.parse("x^4 + y^4 + z^4")) == -(4**20)


def test_delta3_eval_agrees_with_polynomial(delta3):
    rng = random.Random(3)
    for _ in range(100):
        f = rand_form(3, rng)
        assert delta3.evaluate(f.coeffs) == disc_eval(f)


@pytest.mark.parametrize("d", [3, 4])
def test_singular_forms_vanish(d):
    rng = random.Random(d)
    for _ in range(20):
        f = rand_form(d, rng)
        c = list(f.coeffs)
        # no z^d, x z^(d-1), y z^(d-1): (0:0:1) is a singular point
        for u in [(0, 0, d), (1, 0, d - 1), (0, 1, d - 1)]:
            c[exponent_index(d)[u]] = 0
        assert disc_eval(TernaryForm(d, c)) == 0


@pytest.mark.parametrize("d", [3, 4])
def test_invariance_and_scaling(d):
    rng = random.Random(30 + d)
    M = TransformElement(((1, 1, 0), (0, 0, 1), (0, -1, 0)))
    for _ in range(10):
        f = rand_form(d, rng, 3)
        D = disc_eval(f)
        assert disc_eval(apply_matrix(f, M)) == D
        assert disc_eval(f.scale(2)) == 2 ** (3 * (d - 1) ** 2) * D


def test_weierstrass_specialization(delta3):
    a2, a4, a6 = (SparsePoly.var(i, 3) for i in range(3))
    z, one = SparsePoly.zero(3), SparsePoly.constant(1, 3)
    W = delta3.substitute([-one, z, -a2, z, z, -a4, z, one, z, -a6])
    expected = -64 * a2**3 * a6 + 16 * a2**2 * a4**2 + 288 * a2 * a4 * a6 - 64 * a4**3 - 432 * a6**2
    assert W == expected


def test_symbolic_det_matches_bareiss():
    rng = random.Random(5)
    for n in range(1, 7):
        M = [[rng.randint(-5, 5) for _ in range(n)] for _ in range(n)]
        assert symbolic_det(M) == fraction_free_det(M)


def test_laplace_expansion_reproduces_det():
    phi = generic_phi(3)
    rows, _ = zero_block_rows(phi)
    parts = [_laplace_product((phi.rows, s, rows, cols, other, comp)) for s, cols, other, comp in laplace_terms(phi, rows)]
    total = sum(parts, SparsePoly.zero(10))
    assert total == symbolic_det(phi.rows)


def test_quartic_expansion_has_220_products():
    phi = generic_phi(4)
    rows, zero_cols = zero_block_rows(phi)
    terms = laplace_terms(phi, rows)
    assert len(terms) == 220
    assert all(len(comp) == 12 for _, _, _, comp in terms)


def test_memory_budget():
    with pytest.raises(MemoryBudgetError):
        disc_poly(4, budget=1 << 30)
    with pytest.raises(InvalidDegreeError):
        disc_poly(1)
    with pytest.raises(InvalidDegreeError):
        disc_eval(TernaryForm(1, [1, 2, 3]))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_batch_residues_match_exact(d):
    rng = np.random.default_rng(d)
    X = rng.integers(-9, 10, size=(300, nmonomials(d)))
    D = batch.disc_residues(X, d)
    for row, r in zip(X.tolist(), D.tolist()):
        exact = disc_eval(TernaryForm(d, row))
        assert (exact - r) % batch.MODULUS == 0
        if abs(exact) < batch.MODULUS // 2:
            assert exact == r


def test_det_mod_p():
    rng = np.random.default_rng(0)
    A = rng.integers(-50, 50, size=(200, 6, 6))
    A[:5, :, 0] = 0  # singular ones
    got = batch.det_mod_p(A, batch.P1)
    for M, g in zip(A.tolist(), got.tolist()):
        assert fraction_free_det(M) % batch.P1 == g

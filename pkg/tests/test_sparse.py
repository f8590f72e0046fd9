import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tqf.errors import ArityError
from tqf.sparse import SparsePoly, pack, poly_arith, poly_stats, unpack

from oracles import poly_eval

NV = 3
exps = st.tuples(*[st.integers(0, 4)] * NV)
terms = st.dictionaries(exps, st.integers(-50, 50), max_size=8)
points = st.tuples(*[st.integers(-5, 5)] * NV)


def test_pack_roundtrip():
    e = (3, 0, 255, 7)
    assert unpack(pack(e), 4) == e


def test_pack_orders_like_lex():
    a, b = (2, 0, 1), (1, 5, 5)
    assert (pack(a) > pack(b)) == (a > b)


def test_zero_drops_terms():
    P = SparsePoly(2, {(1, 0): 3, (0, 1): 0})
    assert len(P) == 1
    assert SparsePoly.zero(2).total_degree() is None
    assert not SparsePoly.zero(2)


def test_items_canonical_order():
    P = SparsePoly(2, {(0, 2): 1, (2, 0): 1, (1, 1): 1})
    assert [e for e, _ in P.items()] == [(2, 0), (1, 1), (0, 2)]


@given(terms, terms, points)
def test_ring_ops_match_evaluation(a, b, pt):
    P, Q = SparsePoly(NV, a), SparsePoly(NV, b)
    pa, qb = poly_eval(a, pt), poly_eval(b, pt)
    assert (P + Q).evaluate(pt) == pa + qb
    assert (P - Q).evaluate(pt) == pa - qb
    assert (P * Q).evaluate(pt) == pa * qb


@given(terms, points)
def test_pow_and_scalar(a, pt):
    P = SparsePoly(NV, a)
    assert (P**3).evaluate(pt) == poly_eval(a, pt) ** 3
    assert (P * 7 - 2).evaluate(pt) == 7 * poly_eval(a, pt) - 2


@given(terms, st.integers(0, NV - 1), st.integers(-4, 4), points)
def test_specialize(a, var, value, pt):
    P = SparsePoly(NV, a)
    S = P.specialize(var, value)
    assert S.nvars == NV - 1
    full = list(pt)
    full[var] = value
    rest = [v for i, v in enumerate(full) if i != var]
    assert S.evaluate(rest) == poly_eval(a, full)


@given(terms, points)
def test_evaluate_mod(a, pt):
    P = SparsePoly(NV, a)
    assert P.evaluate(pt, modulus=97) == poly_eval(a, pt) % 97


def test_substitute_composes():
    x, y = SparsePoly.var(0, 2), SparsePoly.var(1, 2)
    P = x * x - y
    Q = P.substitute([x + y, x - y])
    assert Q == (x + y) ** 2 - (x - y)


def test_exact_div():
    P = SparsePoly(2, {(1, 0): 6, (0, 1): -9})
    assert P.exact_div(3) == SparsePoly(2, {(1, 0): 2, (0, 1): -3})
    with pytest.raises(ArithmeticError):
        P.exact_div(4)


def test_stats():
    P = SparsePoly(2, {(2, 0): 4, (1, 1): -6, (0, 2): 2})
    assert poly_stats(P) == (2, 3, 6, 2)
    assert P.is_homogeneous()
    assert P.degrees() == (2, 2)


def test_poly_arith_arity():
    with pytest.raises(ArityError):
        poly_arith(SparsePoly.var(0, 2), SparsePoly.var(0, 3), "add")
    P = poly_arith(SparsePoly.var(0, 2), SparsePoly.var(1, 2), "multiply")
    assert P == SparsePoly(2, {(1, 1): 1})
    assert poly_arith(P, op="specialize", var=0, value=3) == SparsePoly(1, {(1,): 3})


def test_format():
    P = SparsePoly(2, {(2, 0): 1, (0, 1): -3})
    assert P.format(["a", "b"]) == "a^2 - 3*b"


@settings(max_examples=50)
@given(terms)
def test_hash_eq(a):
    assert hash(SparsePoly(NV, a)) == hash(SparsePoly(NV, dict(a)))

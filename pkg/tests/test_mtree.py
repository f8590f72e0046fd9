import random

import numpy as np
import pytest

from tqf.discriminant import disc_poly
from tqf.errors import BadMagicError, EmptyPolynomialError, StackUnderflowError, TreeStateError, TruncatedError
from tqf.mtree import QUARTIC_LEVEL_SIZES, MonomialTree, build_tree, quartic_order, to_signed
from tqf.search import search_order
from tqf.sparse import SparsePoly

from oracles import MASK64, FlatEvaluator, prefix_counts

# g(a0, a1, a2) from the worked example; a2 sits at the top of the tree
G = SparsePoly(3, {(3, 0, 1): 1, (2, 2, 0): 3, (2, 1, 1): -4, (1, 2, 1): -5, (0, 4, 0): 2, (0, 3, 1): 7})
TOP_A2 = [2, 1, 0]


@pytest.fixture(scope="module")
def delta3():
    return disc_poly(3)


def test_worked_example():
    t = build_tree(G, TOP_A2)
    assert t.level_sizes() == [2, 6, 6]
    assert build_tree(G, [0, 1, 2]).level_sizes() == [4, 6, 6]
    t.push(2)
    assert [to_signed(int(v)) for v in t.level_values()] == [12, 2, 8, -16, -10, 7]
    t.push(-1)
    assert [to_signed(int(v)) for v in t.extract_univariate()] == [14, 7]
    assert t.assignment() == [2, -1]
    t.push(5)
    assert to_signed(t.full_value()) == 14 + 7 * 5


def test_pop_is_free_and_repeatable():
    t = build_tree(G, TOP_A2)
    t.push(2)
    t.push(-1)
    t.pop_to_level(2)
    t.push(3)
    expect = {0: 0, 1: 0}
    for (a0, a1, a2), c in G.items():
        expect[a2] += c * 2**a0 * 3**a1
    assert [to_signed(int(v)) for v in t.extract_univariate()] == [expect[0], expect[1]]


def test_state_errors():
    t = build_tree(G, TOP_A2)
    with pytest.raises(TreeStateError):
        t.extract_univariate()
    with pytest.raises(TreeStateError):
        t.full_value()
    with pytest.raises(IndexError):
        t.pop_to_level(4)
    for c in (1, 1, 1):
        t.push(c)
    with pytest.raises(StackUnderflowError):
        t.push(1)
    with pytest.raises(EmptyPolynomialError):
        build_tree(SparsePoly.zero(3))
    b = build_tree(G, TOP_A2, bound=2)
    with pytest.raises(ValueError):
        b.push(3)


def test_level_sizes_match_prefix_oracle(delta3):
    exps = np.array([e for e, _ in delta3.items()])
    order = search_order(3)
    t = build_tree(delta3, order)
    assert t.level_sizes() == prefix_counts(exps, order)
    assert t.level_sizes()[-1] == 2040


def test_quartic_order_and_table():
    order = quartic_order()
    assert sorted(order) == list(range(15))
    assert sum(QUARTIC_LEVEL_SIZES) == 246_798_264


def test_fuzz_against_oracle(delta3):
    """10^5 random pushes and pops on the Delta_3 tree, every level checked."""
    items = delta3.items()
    exps = np.array([e for e, _ in items], dtype=np.uint8)
    coeffs = [c for _, c in items]
    order = search_order(3)
    t = build_tree(delta3, order)
    oracle = FlatEvaluator(exps, coeffs, order)
    rng = random.Random(12345)
    mismatches = 0
    for _ in range(100_000):
        if t.level > 0 and (not t.stack or rng.random() < 0.6):
            t.push(rng.randint(-9, 9))
        else:
            t.pop_to_level(rng.randint(t.level, t.depth))
        want = oracle.values(t.stack)
        mismatches += [int(v) for v in t.level_values()] != want
    assert mismatches == 0


def test_scan_block(delta3):
    t = build_tree(delta3, search_order(3))
    for c in (1, -2, 3, 0, -1, 2, 1, -3):
        t.push(c)
    cvals = list(range(-3, 4))
    block = t.scan_block(cvals)
    assert block.shape == (7, 7)
    for i, c2 in enumerate(cvals):
        t.push(c2)
        g = t.extract_univariate()
        for j, c1 in enumerate(cvals):
            acc = 0
            for e in range(len(g) - 1, -1, -1):
                acc = (acc * c1 + int(g[e])) & MASK64
            assert int(block[i, j]) == acc
        t.pop_to_level(2)


def test_upper_copy_shares_structure(delta3):
    t = build_tree(delta3, search_order(3))
    for c in (1, 2, 3, 4, 5):
        t.push(c)
    u = t.upper_copy()
    assert u.depth == 5 and u.exponents[1] is t.exponents[1]
    u.push(1)
    t.push(2)
    assert not np.shares_memory(u.values[4], t.values[4])
    t.pop_to_level(5)
    u.pop_to_level(5)
    for c in (1, 1, 1, 1, 1):
        t.push(c)
        u.push(c)
    assert t.full_value() == u.full_value()


def test_save_load(tmp_path, delta3):
    t = build_tree(delta3, search_order(3))
    p = tmp_path / "t.tqt"
    t.save(p)
    u = MonomialTree.load(p)
    assert u.order == t.order and u.level_sizes() == t.level_sizes()
    for c in (1, -1, 2, 0, 3, -2, 1, 1, 0, 2):
        t.push(c)
        u.push(c)
    assert t.full_value() == u.full_value()
    data = p.read_bytes()
    (tmp_path / "bad").write_bytes(b"NOPE" + data[4:])
    with pytest.raises(BadMagicError):
        MonomialTree.load(tmp_path / "bad")
    (tmp_path / "short").write_bytes(data[:-3])
    with pytest.raises(TruncatedError):
        MonomialTree.load(tmp_path / "short")

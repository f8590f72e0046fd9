import random

import pytest

from tqf.discriminant import disc_eval
from tqf.forms import TernaryForm, apply_matrix, nmonomials
from tqf.reduce import (
    Merge,
    apply_word,
    bounded_class_enum,
    check_merge,
    dedup,
    format_word,
    generators,
    norm,
    parse_word,
)
from tqf.resultant import fraction_free_det
from tqf.search import CurveRecord

from conftest import TABLE2, form

FERMAT = TernaryForm.parse("x^4 + y^4 + z^4")


def test_generators():
    A1, A2, A3, A4 = generators()
    assert [fraction_free_det(A.matrix) for A in (A1, A2, A3, A4)] == [1, 1, -1, -1]
    f = form(TABLE2[4727])
    g = f
    for _ in range(4):
        g = apply_matrix(g, A2)
    assert g == f
    assert norm(apply_matrix(TernaryForm.parse("x^4"), A1)) == 6


def test_norm_preserving_generators():
    rng = random.Random(1)
    _, A2, A3, A4 = generators()
    for _ in range(200):
        f = TernaryForm(4, [rng.randint(-9, 9) for _ in range(nmonomials(4))])
        for A in (A2, A3, A4):
            assert norm(apply_matrix(f, A)) == norm(f)


def test_rotation_example():
    _, A2, _, _ = generators()
    assert apply_matrix(TernaryForm.parse("x^3z + y^4"), A2) == TernaryForm.parse("x^4 + y^3z")


def test_fermat_bound_one():
    orbit = bounded_class_enum(FERMAT, 1)
    assert sorted(orbit.words) == sorted([FERMAT.coeffs, (-FERMAT).coeffs])


def test_bound_below_norm():
    with pytest.raises(ValueError):
        bounded_class_enum(TernaryForm.parse("2x^4 + y^4 + z^4"), 1)


def test_monotone_in_bound():
    f = form(TABLE2[4727])
    small = bounded_class_enum(f, 3)
    big = bounded_class_enum(f, 9)
    assert set(small.words) <= set(big.words)
    assert len(big) > len(small) > 2


def test_witnesses_replay_and_preserve_disc():
    f = form(TABLE2[5978])
    orbit = bounded_class_enum(f, 3)
    D = abs(disc_eval(f))
    rng = random.Random(4)
    members = orbit.members()
    for g in rng.sample(members, min(50, len(members))):
        assert norm(g) <= 3
        word, neg = orbit.witness(g)
        assert apply_word(f, word, neg) == g
        assert abs(disc_eval(g)) == D
    # every witness, not just a sample
    for key, (word, neg) in orbit.words.items():
        assert apply_word(f, word, neg).coeffs == key


def test_word_text():
    assert format_word(()) == "id"
    assert format_word((1, 0), True) == "-A2.A1"
    assert parse_word("-A2.A1") == ((1, 0), True)
    assert parse_word("id") == ((), False)
    with pytest.raises(ValueError):
        parse_word("A9")


def rec(f):
    return CurveRecord(disc_eval(f), f.coeffs)


def test_dedup_negation_pair():
    f = form(TABLE2[4727])
    kept, merges = dedup([rec(f), rec(-f)], 1)
    assert len(kept) == 1 and len(merges) == 1
    assert kept[0].coeffs == min(f.coeffs, (-f).coeffs)
    assert check_merge(merges[0])


def test_dedup_synthetic_orbit():
    f = form(TABLE2[6171])
    orbit = bounded_class_enum(f, 2)
    rng = random.Random(9)
    members = rng.sample(orbit.members(), min(20, len(orbit)))
    records = [rec(g) for g in members] + [rec(form(TABLE2[7376]))]
    kept, merges = dedup(records, 2)
    assert len(kept) == 2
    assert len(merges) == len(set(records)) - 2
    assert all(check_merge(m) for m in merges)
    # the kept form is the smallest of its class in the canonical order
    k = [r for r in kept if abs(r.disc) == 6171][0]
    assert k == min((r for r in records if abs(r.disc) == 6171), key=CurveRecord.key)


def test_dedup_workers_agree():
    recs = [rec(form(t)) for t in TABLE2.values()]
    recs += [rec(-form(t)) for t in TABLE2.values()]
    a = dedup(recs, 1)
    b = dedup(recs, 1, workers=2)
    assert a == b
    assert len(a[0]) == len(TABLE2)


def test_bad_merge_detected():
    f = form(TABLE2[4727])
    m = Merge(rec(-f), rec(f), (1,), False)
    assert not check_merge(m)
    assert Merge(rec(-f), rec(f), (), True).to_line().endswith(" -id")

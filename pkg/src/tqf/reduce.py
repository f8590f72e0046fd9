"""Orbit search under GL_3(Z) and bulk deduplication of hit sets.

The generators act by f -> f(Ax):

    A1  f(x+y, y, z)      shear
    A2  f(y, -x, z)       rotation
    A3  f(-x, y, z)       sign flip
    A4  f(-z, x, y)       signed 3-cycle

A2, A3 and A4 permute coefficients up to sign and so preserve the norm; A1
does not, which is why it is only followed when the image stays in bound.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .forms import TernaryForm, TransformElement, apply_matrix
from .search import CurveRecord

log = logging.getLogger(__name__)

GENERATOR_NAMES = ("A1", "A2", "A3", "A4")
_MATRICES = (
    ((1, 1, 0), (0, 1, 0), (0, 0, 1)),
    ((0, 1, 0), (-1, 0, 0), (0, 0, 1)),
    ((-1, 0, 0), (0, 1, 0), (0, 0, 1)),
    ((0, 0, -1), (1, 0, 0), (0, 1, 0)),
)


def generators() -> tuple[TransformElement, ...]:
    return tuple(TransformElement(m) for m in _MATRICES)


def norm(f: TernaryForm) -> int:
    return max((abs(c) for c in f.coeffs), default=0)


def apply_word(f: TernaryForm, word: Sequence[int], negate: bool = False) -> TernaryForm:
    """Apply generators by index (0 = A1), leftmost first."""
    gens = generators()
    for i in word:
        f = apply_matrix(f, gens[i])
    return -f if negate else f


def format_word(word: Sequence[int], negate: bool = False) -> str:
    text = ".".join(GENERATOR_NAMES[i] for i in word) or "id"
    return "-" + text if negate else text


def parse_word(text: str) -> tuple[tuple[int, ...], bool]:
    negate = text.startswith("-")
    text = text.lstrip("-")
    if text == "id":
        return (), negate
    try:
        return tuple(GENERATOR_NAMES.index(t) for t in text.split(".")), negate
    except ValueError:
        raise ValueError(f"bad transform word {text!r}") from None


@dataclass
class OrbitSet:
    base: TernaryForm
    bound: int
    # coefficient tuple -> (word, negate) carrying base to that member
    words: dict[tuple, tuple[tuple[int, ...], bool]] = field(default_factory=dict)

    def __contains__(self, g) -> bool:
        key = g.coeffs if isinstance(g, TernaryForm) else tuple(g)
        return key in self.words

    def __len__(self) -> int:
        return len(self.words)

    def members(self) -> list[TernaryForm]:
        return [TernaryForm(self.base.degree, k) for k in sorted(self.words)]

    def witness(self, g) -> tuple[tuple[int, ...], bool]:
        key = g.coeffs if isinstance(g, TernaryForm) else tuple(g)
        return self.words[key]


def bounded_class_enum(f: TernaryForm, b: int) -> OrbitSet:
    """S_{f,b}: forms of norm <= b reachable from +-f through the generators."""
    if b < norm(f):
        raise ValueError(f"bound {b} is below the norm {norm(f)} of the base form")
    gens = generators()
    words: dict[tuple, tuple[tuple[int, ...], bool]] = {f.coeffs: ((), False)}
    frontier = [f]
    while frontier:
        nxt = []
        for g in frontier:
            w = words[g.coeffs][0]
            for i, A in enumerate(gens):
                h = apply_matrix(g, A)
                if i == 0 and norm(h) > b:
                    continue
                if h.coeffs not in words:
                    words[h.coeffs] = (w + (i,), False)
                    nxt.append(h)
        frontier = nxt
    for key, (w, _) in list(words.items()):
        neg = tuple(-c for c in key)
        if neg not in words:
            words[neg] = (w, True)
    return OrbitSet(f, b, words)


@dataclass(frozen=True)
class Merge:
    removed: CurveRecord
    kept: CurveRecord
    word: tuple[int, ...]
    negate: bool

    def to_line(self) -> str:
        return f"{self.removed.to_line()} -> {self.kept.to_line()} {format_word(self.word, self.negate)}"


def _dedup_bucket(args):
    records, b = args
    alive = {r.coeffs: r for r in records}
    kept, merges = [], []
    for r in records:
        if r.coeffs not in alive:
            continue
        orbit = bounded_class_enum(r.form(), b)
        for key in orbit.words:
            other = alive.get(key)
            if other is not None and key != r.coeffs:
                w, neg = orbit.words[key]
                merges.append(Merge(other, r, w, neg))
                del alive[key]
        kept.append(r)
    return kept, merges


def dedup(records: Iterable[CurveRecord], b: int, workers: int = 1) -> tuple[list[CurveRecord], list[Merge]]:
    """Keep the canonically smallest member of each bounded orbit class.

    Records are visited in (|disc|, coefficients) order.  Every removal comes
    with the generator word that carries the kept form to the removed one.
    """
    ordered = sorted(set(records), key=CurveRecord.key)
    buckets: dict[int, list[CurveRecord]] = defaultdict(list)
    for r in ordered:
        buckets[abs(r.disc)].append(r)
    jobs = [(buckets[k], b) for k in sorted(buckets)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_dedup_bucket, jobs, chunksize=8))
    else:
        results = [_dedup_bucket(j) for j in jobs]
    kept, merges = [], []
    for k, m in results:
        kept += k
        merges += m
    log.info("dedup at bound %d: %d -> %d records", b, len(ordered), len(kept))
    return kept, merges


def check_merge(m: Merge) -> bool:
    """Replay the witness word of a merge."""
    return apply_word(m.kept.form(), m.word, m.negate).coeffs == m.removed.coeffs

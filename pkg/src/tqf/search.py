"""Enumeration of integer ternary forms with small nonzero discriminant.

Coefficients are attached to levels of the discriminant's monomial tree:
level 1 is the top variable (a400 for quartics) and level n the bottom one.
A job fixes the five bottom levels; shards split the next three by a residue
rule; the checkpoint prefix runs down to level m; everything below is the
inner box.  Forms are visited in lexicographic order of (c_n, ..., c_1) with
every c_k running from -B_c to B_c, so both engines emit records in the same
order.

``engine="tree"`` follows the monomial-tree algorithm and filters on the
value of Delta mod 2^64.  ``engine="direct"`` needs no discriminant
polynomial: it evaluates Delta modulo a ~2^52 modulus for whole batches of
forms.  Either way a survivor is re-checked with the exact determinant.
"""

from __future__ import annotations

import hashlib
import itertools
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import batch
from .discriminant import disc_eval
from .errors import ConsistencyError, CorruptCheckpointError, ParseError
from .forms import TernaryForm, TransformElement, apply_matrix, exponent_index, nmonomials
from .mtree import MonomialTree, quartic_order, to_signed

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1

# top-to-bottom order for cubics: Delta_3's degrees sorted ascending
CUBIC_ORDER_NAMES = (
    (3, 0, 0), (0, 3, 0), (0, 0, 3), (2, 1, 0), (2, 0, 1),
    (1, 2, 0), (1, 0, 2), (0, 2, 1), (0, 1, 2), (1, 1, 1),
)
JOB_LEVELS = 5
SHARD_LEVELS = 3
# vectorized batch size for the direct engine
BATCH_TARGET = 1 << 15


def search_order(d: int) -> list[int]:
    """Coefficient index of the variable at each level, top (level 1) first."""
    if d == 4:
        return quartic_order()
    if d == 3:
        idx = exponent_index(3)
        return [idx[u] for u in CUBIC_ORDER_NAMES]
    raise ValueError(f"search supports degrees 3 and 4, got {d}")


@dataclass(frozen=True)
class SearchConfig:
    degree: int = 4
    cmax: int = 9
    dmax: int = 10**7
    engine: str = "direct"
    shards: int = 1
    interval: int = 1
    checkpoint_level: int | None = None

    def __post_init__(self):
        if self.degree not in (3, 4):
            raise ValueError("degree must be 3 or 4")
        if self.cmax < 0:
            raise ValueError("cmax must be nonnegative")
        if not 0 <= self.dmax < 1 << 63:
            raise ValueError("dmax must lie in [0, 2^63)")
        if self.engine not in ("tree", "direct"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.engine == "direct" and self.dmax >= batch.MODULUS // 2:
            raise ValueError(f"the direct engine needs dmax < {batch.MODULUS // 2}")
        if self.shards < 1 or self.interval < 1:
            raise ValueError("shards and interval must be positive")
        n = self.nvars
        if self.checkpoint_level is None:
            # 7 for quartics; cubics have only the shard triple above the inner box
            object.__setattr__(self, "checkpoint_level", max(3, n - 8))
        if not 2 <= self.checkpoint_level <= n - JOB_LEVELS - SHARD_LEVELS + 1:
            raise ValueError(f"checkpoint level must lie in [2, {n - JOB_LEVELS - SHARD_LEVELS + 1}]")

    @property
    def nvars(self) -> int:
        return nmonomials(self.degree)

    def digest(self) -> str:
        text = f"{self.degree}:{self.cmax}:{self.dmax}:{self.engine}:{self.shards}:{self.checkpoint_level}"
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True, order=False)
class CurveRecord:
    disc: int
    coeffs: tuple[int, ...]

    def key(self):
        return (abs(self.disc), self.coeffs)

    @property
    def degree(self) -> int:
        return {6: 2, 10: 3, 15: 4}[len(self.coeffs)]

    def form(self) -> TernaryForm:
        return TernaryForm(self.degree, self.coeffs)

    def to_line(self) -> str:
        return f"{self.disc}:{','.join(map(str, self.coeffs))}"

    @classmethod
    def from_line(cls, line: str, lineno: int | None = None) -> "CurveRecord":
        try:
            disc, rest = line.strip().split(":")
            coeffs = tuple(int(v) for v in rest.split(","))
            rec = cls(int(disc), coeffs)
            rec.degree
        except (ValueError, KeyError):
            raise ParseError(f"malformed record {line.strip()!r}", lineno) from None
        return rec


def read_records(path) -> list[CurveRecord]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                try:
                    out.append(CurveRecord.from_line(line))
                except ParseError as exc:
                    raise ParseError(f"{path}: {exc}", lineno) from None
    return out


def write_records(records: Sequence[CurveRecord], path) -> None:
    Path(path).write_text("".join(r.to_line() + "\n" for r in records))


# -- jobs and shards ------------------------------------------------------


def enumerate_jobs(cmax: int, degree: int = 4) -> list[tuple[int, ...]]:
    """Job tuples (c_n, ..., c_{n-4}) in lexicographic order.

    For quartics the top three satisfy 0 <= c15 <= c14 <= c13 <= cmax (the
    coordinate permutation/sign symmetry); cubics enumerate the full box.
    """
    if cmax < 0:
        raise ValueError("cmax must be nonnegative")
    r = range(-cmax, cmax + 1)
    if degree == 3:
        return list(itertools.product(r, repeat=JOB_LEVELS))
    if degree != 4:
        raise ValueError("degree must be 3 or 4")
    jobs = []
    for a in range(cmax + 1):
        for b in range(a, cmax + 1):
            for c in range(b, cmax + 1):
                for d, e in itertools.product(r, r):
                    jobs.append((a, b, c, d, e))
    return jobs


def valid_job(job: Sequence[int], cmax: int, degree: int = 4) -> bool:
    if len(job) != JOB_LEVELS or any(abs(c) > cmax for c in job):
        return False
    return degree == 3 or 0 <= job[0] <= job[1] <= job[2]


def job_count(cmax: int, degree: int = 4) -> int:
    w = 2 * cmax + 1
    if degree == 3:
        return w**JOB_LEVELS
    return (cmax + 3) * (cmax + 2) * (cmax + 1) // 6 * w * w


def shard_of(triple: Sequence[int], cmax: int, shards: int) -> int:
    w = 2 * cmax + 1
    return (w * w * triple[0] + w * triple[1] + triple[2]) % shards


def prefixes(cfg: SearchConfig, shard: int) -> Iterator[tuple[int, ...]]:
    """Checkpoint prefixes (c_{n-5}, ..., c_m) belonging to ``shard``."""
    n, m, B = cfg.nvars, cfg.checkpoint_level, cfg.cmax
    r = range(-B, B + 1)
    rest = n - JOB_LEVELS - SHARD_LEVELS - m + 1
    for triple in itertools.product(r, repeat=SHARD_LEVELS):
        if shard_of(triple, B, cfg.shards) != shard:
            continue
        for tail in itertools.product(r, repeat=rest):
            yield triple + tail


# -- symmetry ---------------------------------------------------------------


def symmetry_transforms() -> list[tuple[TransformElement, int]]:
    """The 48 coordinate permutations, sign changes and global negations.

    Each entry is (signed permutation matrix, global sign).  Sign patterns
    are taken up to -I, which acts trivially on forms of even degree.
    """
    out = []
    for perm in itertools.permutations(range(3)):
        for s1, s2 in itertools.product((1, -1), repeat=2):
            signs = (1, s1, s2)
            m = [[0] * 3 for _ in range(3)]
            for i in range(3):
                m[i][perm[i]] = signs[i]
            for g in (1, -1):
                out.append((TransformElement(m), g))
    return out


def normalize_symmetry(f: TernaryForm) -> tuple[TernaryForm, TransformElement, int]:
    """Image of a quartic with 0 <= a112 <= a121 <= a211."""
    if f.degree != 4:
        raise ValueError("symmetry normalization is defined for quartics")
    idx = exponent_index(4)
    i211, i121, i112 = idx[(2, 1, 1)], idx[(1, 2, 1)], idx[(1, 1, 2)]
    for M, g in symmetry_transforms():
        h = apply_matrix(f, M)
        if g < 0:
            h = -h
        c = h.coeffs
        if 0 <= c[i112] <= c[i121] <= c[i211]:
            return h, M, g
    raise AssertionError("no symmetry normalizes the form")  # pragma: no cover


# -- inner loop -------------------------------------------------------------


def inner_scan(g: Sequence[int], cmax: int, dmax: int) -> list[tuple[int, int]]:
    """Values c1 in [-cmax, cmax] where g(c1) mod 2^64 is nonzero and at most dmax.

    ``g`` holds coefficients by exponent, reduced mod 2^64.  g(c) and g(-c)
    share the odd part c*h1(c^2) and the even part h2(c^2).
    """
    g = [int(v) & MASK64 for v in g]
    g0 = g[0] if g else 0
    odd = g[1::2]
    even = g[2::2]
    hits = []
    D0 = to_signed(g0)
    res = {0: D0}
    for c in range(1, cmax + 1):
        c2 = c * c
        h1 = 0
        for a in reversed(odd):
            h1 = (h1 * c2 + a) & MASK64
        h2 = 0
        for a in reversed(even):
            h2 = (h2 * c2 + a) & MASK64
        h2 = (h2 * c2) & MASK64
        t = (c * h1) & MASK64
        res[c] = to_signed(g0 + t + h2)
        res[-c] = to_signed(g0 - t + h2)
    for c in range(-cmax, cmax + 1):
        D = res[c]
        if D != 0 and abs(D) <= dmax:
            hits.append((c, D))
    return hits


def verify_candidate(coeffs: Sequence[int], D: int | None, dmax: int) -> CurveRecord | None:
    """Exact discriminant check for a filter survivor."""
    coeffs = tuple(int(c) for c in coeffs)
    degree = {10: 3, 15: 4}[len(coeffs)]
    delta = disc_eval(TernaryForm(degree, coeffs))
    if delta == 0 or abs(delta) > dmax:
        return None
    if D is not None and delta != D:
        raise ConsistencyError(f"filter value {D} disagrees with exact discriminant {delta} for {coeffs}")
    return CurveRecord(delta, coeffs)


# -- engines ----------------------------------------------------------------


@dataclass
class PrefixResult:
    prefix: tuple[int, ...]
    records: list[CurveRecord] = field(default_factory=list)
    forms: int = 0


def _coeff_row(order, assignment: dict[int, int], nvars: int) -> list[int]:
    row = [0] * nvars
    for level, v in assignment.items():
        row[order[level - 1]] = v
    return row


def _direct_engine(job, cfg: SearchConfig, plist) -> Iterator[PrefixResult]:
    n, m, B = cfg.nvars, cfg.checkpoint_level, cfg.cmax
    order = search_order(cfg.degree)
    w = 2 * B + 1
    q = m - 1
    v = 0
    while v < q and w ** (v + 1) <= BATCH_TARGET:
        v += 1
    s = w**v
    grid = np.array(list(itertools.product(range(-B, B + 1), repeat=v)), dtype=np.int64).reshape(s, v)
    vec_cols = [order[level - 1] for level in range(v, 0, -1)]
    per_batch = max(1, BATCH_TARGET // s)
    outer_levels = list(range(m - 1, v, -1))
    top = {n - i: c for i, c in enumerate(job)}

    def units():
        for prefix in plist:
            fixed = dict(top)
            fixed.update({n - JOB_LEVELS - i: c for i, c in enumerate(prefix)})
            outers = list(itertools.product(range(-B, B + 1), repeat=len(outer_levels)))
            for k, outer in enumerate(outers):
                a = dict(fixed)
                a.update(zip(outer_levels, outer))
                yield prefix, k == len(outers) - 1, _coeff_row(order, a, n)

    current = None
    it = units()
    while True:
        chunk = list(itertools.islice(it, per_batch))
        if not chunk:
            break
        X = np.repeat(np.array([row for _, _, row in chunk], dtype=np.int64), s, axis=0)
        if v:
            X[:, vec_cols] = np.tile(grid, (len(chunk), 1))
        D = batch.disc_residues(X, cfg.degree)
        hit = np.nonzero((D != 0) & (np.abs(D) <= cfg.dmax))[0]
        by_unit: dict[int, list[int]] = {}
        for i in hit.tolist():
            by_unit.setdefault(i // s, []).append(i)
        for u, (prefix, last, _) in enumerate(chunk):
            if current is None or current.prefix != prefix:
                current = PrefixResult(prefix)
            current.forms += s
            for i in by_unit.get(u, ()):
                rec = verify_candidate(X[i].tolist(), int(D[i]), cfg.dmax)
                if rec is not None:
                    current.records.append(rec)
            if last:
                yield current
                current = None


def _block_levels(cfg: SearchConfig) -> int:
    """How many bottom levels one vectorized scan covers."""
    w = 2 * cfg.cmax + 1
    q = 1
    while q < cfg.checkpoint_level - 1 and w ** (q + 1) <= BATCH_TARGET // 4:
        q += 1
    return q


def _tree_engine(job, cfg: SearchConfig, tree: MonomialTree, plist) -> Iterator[PrefixResult]:
    n, m, B = cfg.nvars, cfg.checkpoint_level, cfg.cmax
    if tree.depth != n or tree.order != search_order(cfg.degree):
        raise ValueError("tree does not match the search variable order")
    order = tree.order
    cvals = list(range(-B, B + 1))
    q = _block_levels(cfg)
    tree.pop_to_level(n)
    for c in job:
        tree.push(c)
    base = n - JOB_LEVELS  # cursor level once the job is substituted
    inner = list(itertools.product(cvals, repeat=m - 1 - q))
    assigned: list[int] = []  # values pushed for levels base, base-1, ...
    for prefix in plist:
        res = PrefixResult(prefix)
        for tail in inner:
            want = list(prefix) + list(tail)
            j = 0
            while j < len(assigned) and assigned[j] == want[j]:
                j += 1
            tree.pop_to_level(base - j)
            del assigned[j:]
            for val in want[j:]:
                tree.push(val)
                assigned.append(val)
            a = {n - i: c for i, c in enumerate(job)}
            a.update({base - i: c for i, c in enumerate(want)})
            res.forms += len(cvals) ** q
            if q == 1:
                found = [((c1,), D) for c1, D in inner_scan(tree.extract_univariate().tolist(), B, cfg.dmax)]
            else:
                signed = tree.scan_block(cvals).view(np.int64)
                ok = np.nonzero((signed != 0) & (np.abs(signed) <= cfg.dmax))
                found = [(tuple(cvals[i] for i in ix), int(signed[ix])) for ix in zip(*ok)]
            for vals, D in found:
                a.update(zip(range(q, 0, -1), vals))
                rec = verify_candidate(_coeff_row(order, a, n), D, cfg.dmax)
                if rec is not None:
                    res.records.append(rec)
        yield res


def scan(job, cfg: SearchConfig, shard: int = 0, tree: MonomialTree | None = None, after=None) -> Iterator[PrefixResult]:
    """Per-prefix results for one (job, shard), optionally resuming after a prefix."""
    job = tuple(job)
    if not valid_job(job, cfg.cmax, cfg.degree):
        raise IndexError(f"job {job} is outside the job list for cmax={cfg.cmax}")
    if not 0 <= shard < cfg.shards:
        raise IndexError(f"shard {shard} outside [0, {cfg.shards})")
    plist = prefixes(cfg, shard)
    if after is not None:
        after = tuple(after)
        plist = itertools.dropwhile(lambda p: p <= after, plist)
    if cfg.engine == "direct":
        return _direct_engine(job, cfg, plist)
    if tree is None:
        raise ValueError("engine 'tree' needs a monomial tree of the discriminant")
    return _tree_engine(job, cfg, tree, plist)


# -- checkpoints --------------------------------------------------------------


@dataclass
class Checkpoint:
    job: tuple[int, ...]
    shard: int
    config: SearchConfig
    assignment: tuple[int, ...] | None  # c_n .. c_m of the last finished prefix
    forms: int = 0
    hits: int = 0
    complete: bool = False

    def prefix(self):
        if self.assignment is None:
            return None
        return self.assignment[len(self.job):]

    def body(self) -> str:
        c = self.config
        lines = [
            "TQF-CHECKPOINT 1",
            f"degree={c.degree}",
            f"cmax={c.cmax}",
            f"dmax={c.dmax}",
            f"engine={c.engine}",
            f"shards={c.shards}",
            f"level={c.checkpoint_level}",
            f"config={c.digest()}",
            f"job={','.join(map(str, self.job))}",
            f"shard={self.shard}",
            "assignment=" + ("" if self.assignment is None else ",".join(map(str, self.assignment))),
            f"forms={self.forms}",
            f"hits={self.hits}",
            f"complete={int(self.complete)}",
        ]
        return "\n".join(lines) + "\n"

    def dumps(self) -> str:
        body = self.body()
        return body + f"digest={hashlib.sha256(body.encode()).hexdigest()}\n"

    @classmethod
    def loads(cls, text: str) -> "Checkpoint":
        if "\ndigest=" not in text:
            raise CorruptCheckpointError("missing digest line (truncated checkpoint?)")
        body, _, tail = text.rpartition("digest=")
        if hashlib.sha256(body.encode()).hexdigest() != tail.strip():
            raise CorruptCheckpointError("checkpoint digest mismatch")
        lines = body.splitlines()
        if not lines or lines[0] != "TQF-CHECKPOINT 1":
            raise CorruptCheckpointError("not a checkpoint file")
        kv = dict(line.split("=", 1) for line in lines[1:])
        ints = lambda s: tuple(int(v) for v in s.split(",")) if s else None  # noqa: E731
        try:
            cfg = SearchConfig(
                degree=int(kv["degree"]), cmax=int(kv["cmax"]), dmax=int(kv["dmax"]), engine=kv["engine"],
                shards=int(kv["shards"]), checkpoint_level=int(kv["level"]),
            )
            if cfg.digest() != kv["config"]:
                raise CorruptCheckpointError("config digest mismatch")
            return cls(
                job=ints(kv["job"]), shard=int(kv["shard"]), config=cfg, assignment=ints(kv["assignment"]),
                forms=int(kv["forms"]), hits=int(kv["hits"]), complete=kv["complete"] == "1",
            )
        except (KeyError, ValueError) as exc:
            raise CorruptCheckpointError(f"bad checkpoint field: {exc}") from None


def write_checkpoint(ck: Checkpoint, path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w") as fh:
        fh.write(ck.dumps())
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def read_checkpoint(path) -> Checkpoint:
    try:
        text = Path(path).read_text()
    except UnicodeDecodeError:
        raise CorruptCheckpointError(f"{path}: not text") from None
    return Checkpoint.loads(text)


def checkpoint_roundtrip(path) -> Checkpoint:
    return read_checkpoint(path)


def _truncate_records(path: Path, keep: int) -> None:
    if not path.exists():
        if keep:
            raise CorruptCheckpointError(f"{path} is missing but the checkpoint records {keep} hits")
        path.write_text("")
        return
    lines = path.read_text().splitlines(keepends=True)
    if len(lines) < keep:
        raise CorruptCheckpointError(f"{path} has {len(lines)} records, checkpoint expects {keep}")
    if len(lines) > keep:
        path.write_text("".join(lines[:keep]))


def run_job(
    job,
    cfg: SearchConfig,
    shard: int,
    out_path,
    checkpoint_path=None,
    tree: MonomialTree | None = None,
    stop_after: int | None = None,
) -> Checkpoint:
    """Run (or resume) one (job, shard), appending records to ``out_path``.

    ``stop_after`` abandons the run after that many prefixes without a final
    checkpoint, the way a preempted process would.
    """
    job = tuple(job)
    out_path = Path(out_path)
    ck = None
    if checkpoint_path is not None and Path(checkpoint_path).exists():
        ck = read_checkpoint(checkpoint_path)
        if ck.job != job or ck.shard != shard or ck.config.digest() != cfg.digest():
            raise CorruptCheckpointError(f"{checkpoint_path} belongs to a different job or configuration")
    if ck is None:
        ck = Checkpoint(job, shard, cfg, None)
        out_path.write_text("")
    else:
        _truncate_records(out_path, ck.hits)
        if ck.complete:
            return ck
    done = 0
    with open(out_path, "a") as out:
        for res in scan(job, cfg, shard, tree, after=ck.prefix()):
            for rec in res.records:
                out.write(rec.to_line() + "\n")
            ck.hits += len(res.records)
            ck.forms += res.forms
            ck.assignment = job + res.prefix
            done += 1
            if checkpoint_path is not None and done % cfg.interval == 0:
                out.flush()
                os.fsync(out.fileno())
                write_checkpoint(ck, checkpoint_path)
            if stop_after is not None and done >= stop_after:
                out.flush()
                return ck
        out.flush()
        os.fsync(out.fileno())
    ck.complete = True
    if checkpoint_path is not None:
        write_checkpoint(ck, checkpoint_path)
    return ck


def merge_results(paths, out_path=None) -> list[CurveRecord]:
    """Union of record files, deduplicated and sorted by (|disc|, coefficients)."""
    seen = set()
    for p in paths:
        seen.update(read_records(p))
    merged = sorted(seen, key=CurveRecord.key)
    if out_path is not None:
        write_records(merged, out_path)
    return merged

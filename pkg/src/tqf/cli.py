"""Command line interface.

Exit status: 0 on success, 1 on internal or data errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__, polyio
from .discriminant import disc_eval, disc_poly
from .errors import ConsistencyError, ParseError, TQFError
from .fingerprint import P_MAX, collision_report, group
from .forms import TernaryForm, nmonomials
from .mtree import MonomialTree, build_tree
from .reduce import dedup
from .search import (
    SearchConfig,
    enumerate_jobs,
    job_count,
    merge_results,
    read_records,
    run_job,
    search_order,
    write_records,
)

log = logging.getLogger("tqf")

EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def update_manifest(path, stage: str, entry: dict) -> None:
    path = Path(path)
    data = json.loads(path.read_text()) if path.exists() else {"tool": "tqf", "version": __version__, "stages": {}}
    data["stages"][stage] = entry
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)


def _outputs(*paths) -> dict:
    return {Path(p).name: sha256_file(p) for p in paths}


# -- disc ----------------------------------------------------------------------


def cmd_disc(args) -> int:
    if args.disc_cmd == "eval":
        d = args.degree
        if len(args.coeffs) != nmonomials(d):
            raise UsageError(f"degree {d} needs {nmonomials(d)} coefficients, got {len(args.coeffs)}")
        print(disc_eval(TernaryForm(d, args.coeffs)))
    elif args.disc_cmd == "poly":
        P = disc_poly(args.degree, workers=args.workers)
        if args.text:
            polyio.write_text(P, args.output, args.degree)
        else:
            polyio.write_binary(P, args.output, args.degree)
        print(f"{len(P)} terms -> {args.output}")
    else:
        P = polyio.read_poly(args.input)
        to = args.to or ("text" if str(args.output).endswith(".txt") else "binary")
        if to == "text":
            polyio.write_text(P, args.output)
        else:
            polyio.write_binary(P, args.output)
    return EXIT_OK


# -- jobs / search / merge --------------------------------------------------------


def cmd_jobs(args) -> int:
    for i, job in enumerate(enumerate_jobs(args.cmax, args.degree)):
        print(f"{i}\t{','.join(map(str, job))}")
    return EXIT_OK


def parse_range(text: str, count: int) -> list[int]:
    try:
        if ".." in text:
            a, b = text.split("..")
            idx = list(range(int(a), int(b) + 1))
        else:
            idx = [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"bad job selection {text!r}; use N, N,M or A..B") from None
    bad = [i for i in idx if not 0 <= i < count]
    if bad:
        raise UsageError(f"job index {bad[0]} outside [0, {count})")
    return idx


def tree_cache_path(cache_dir, degree: int) -> Path:
    return Path(cache_dir) / f"delta{degree}.tqt"


def load_tree(cache_dir, degree: int, cmax: int) -> MonomialTree:
    if cache_dir is None:
        raise UsageError(f"engine 'tree' needs a tree cache; run `tqf tree build -d {degree} --cache DIR` and pass --tree-cache DIR or set TQF_TREE_CACHE")
    path = tree_cache_path(cache_dir, degree)
    if not path.exists():
        raise UsageError(f"no tree cache at {path}; run `tqf tree build -d {degree} --cache {cache_dir}` first")
    return MonomialTree.load(path, bound=cmax)


def unit_paths(out_dir, ck_dir, index: int, shard: int, shards: int):
    stem = f"job{index:05d}.shard{shard}of{shards}"
    out = Path(out_dir) / f"{stem}.txt"
    ck = Path(ck_dir) / f"{stem}.ckpt" if ck_dir else None
    return out, ck


_worker_tree = None


def _run_unit(task):
    global _worker_tree
    cfg, index, job, shard, out, ck, cache = task
    tree = None
    if cfg.engine == "tree":
        if _worker_tree is None:
            _worker_tree = load_tree(cache, cfg.degree, cfg.cmax)
        tree = _worker_tree
    final = run_job(job, cfg, shard, out, ck, tree)
    return index, shard, final.forms, final.hits


def run_units(cfg: SearchConfig, indices, shards, out_dir, ck_dir, cache, threads: int = 1):
    jobs = enumerate_jobs(cfg.cmax, cfg.degree)
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    if ck_dir:
        Path(ck_dir).mkdir(parents=True, exist_ok=True)
    if cfg.engine == "tree":
        load_tree(cache, cfg.degree, cfg.cmax)  # fail fast before forking
    tasks, outs = [], []
    for i in indices:
        for s in shards:
            out, ck = unit_paths(out_dir, ck_dir, i, s, cfg.shards)
            tasks.append((cfg, i, jobs[i], s, out, ck, cache))
            outs.append(out)
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(threads) as pool:
            results = list(pool.map(_run_unit, tasks))
    else:
        results = [_run_unit(t) for t in tasks]
    return outs, results


def _config(args) -> SearchConfig:
    try:
        return SearchConfig(
            degree=args.degree, cmax=args.cmax, dmax=args.dmax, engine=args.engine,
            shards=args.shards, interval=args.interval, checkpoint_level=args.checkpoint_level,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_search(args) -> int:
    cfg = _config(args)
    indices = parse_range(args.job, job_count(cfg.cmax, cfg.degree))
    if args.shard is None:
        shards = list(range(cfg.shards))
    elif 0 <= args.shard < cfg.shards:
        shards = [args.shard]
    else:
        raise UsageError(f"shard {args.shard} outside [0, {cfg.shards})")
    t0 = time.time()
    _, results = run_units(cfg, indices, shards, args.out, args.checkpoint_dir, args.tree_cache, args.threads)
    forms = sum(r[2] for r in results)
    hits = sum(r[3] for r in results)
    log.info("%d forms, %d hits in %.1fs", forms, hits, time.time() - t0)
    print(f"{len(results)} units, {forms} forms, {hits} hits")
    return EXIT_OK


def cmd_merge(args) -> int:
    merged = merge_results(args.inputs, args.output)
    print(f"{len(merged)} records -> {args.output}")
    if args.manifest:
        update_manifest(args.manifest, "merge", {"inputs": len(args.inputs), "records": len(merged), "outputs": _outputs(args.output)})
    return EXIT_OK


# -- reduce / fingerprint ---------------------------------------------------------


def write_audit(merges, path) -> None:
    Path(path).write_text("".join(m.to_line() + "\n" for m in merges))


def reduce_file(inp, out, bounds, audit=None, workers=1):
    records = read_records(inp)
    counts = [len(set(records))]
    merges_all = []
    for b in bounds:
        records, merges = dedup(records, b, workers)
        counts.append(len(records))
        merges_all += merges
    write_records(records, out)
    if audit:
        write_audit(merges_all, audit)
    return counts


def cmd_reduce(args) -> int:
    bounds = args.bound or [1]
    counts = reduce_file(args.input, args.output, bounds, args.audit, args.workers)
    print(" -> ".join(map(str, counts)) + f" records -> {args.output}")
    if args.manifest:
        paths = [args.output] + ([args.audit] if args.audit else [])
        update_manifest(args.manifest, "reduce", {"bounds": bounds, "counts": counts, "outputs": _outputs(*paths)})
    return EXIT_OK


def fingerprint_file(inp, out, report, p_max=P_MAX):
    records = read_records(inp)
    fps, classes = group(records, p_max)
    Path(out).write_text("".join(fp.to_line() + "\n" for fp in fps))
    Path(report).write_text(collision_report(records, classes))
    return len(records), len(classes), sum(1 for c in classes if len(c) > 1)


def cmd_fingerprint(args) -> int:
    report = args.report or str(args.output) + ".collisions"
    n, k, flagged = fingerprint_file(args.input, args.output, report, args.pmax)
    print(f"{n} records, {k} classes, {flagged} flagged -> {report}")
    if args.manifest:
        update_manifest(args.manifest, "fingerprint", {
            "records": n, "classes": k, "flagged": flagged, "pmax": args.pmax,
            "outputs": _outputs(args.output, report),
        })
    return EXIT_OK


# -- tree -------------------------------------------------------------------------


def cmd_tree(args) -> int:
    d = args.degree
    P = polyio.read_poly(args.poly) if args.poly else disc_poly(d, workers=args.workers)
    tree = build_tree(P, search_order(d))
    Path(args.cache).mkdir(parents=True, exist_ok=True)
    path = tree_cache_path(args.cache, d)
    tree.save(path)
    print(f"{tree.node_count()} nodes, levels {tree.level_sizes()} -> {path}")
    return EXIT_OK


# -- pipeline ---------------------------------------------------------------------


def cmd_pipeline(args) -> int:
    cfg = _config(args)
    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    manifest = work / "manifest.json"
    if manifest.exists():
        manifest.unlink()
    indices = list(range(job_count(cfg.cmax, cfg.degree)))
    outs, results = run_units(
        cfg, indices, range(cfg.shards), work / "hits", work / "checkpoints", args.tree_cache, args.threads
    )
    update_manifest(manifest, "config", {
        "degree": cfg.degree, "cmax": cfg.cmax, "dmax": cfg.dmax, "engine": cfg.engine,
        "shards": cfg.shards, "checkpoint_level": cfg.checkpoint_level,
    })
    update_manifest(manifest, "search", {
        "units": len(results), "forms": sum(r[2] for r in results), "records": sum(r[3] for r in results),
    })
    merged_path = work / "merged.txt"
    merged = merge_results(outs, merged_path)
    update_manifest(manifest, "merge", {"records": len(merged), "outputs": _outputs(merged_path)})
    bounds = args.bound or [cfg.cmax, cfg.cmax**2]
    bounds = [max(b, 1) for b in bounds]
    reduced, audit = work / "reduced.txt", work / "reduce_audit.txt"
    counts = reduce_file(merged_path, reduced, bounds, audit, args.threads)
    update_manifest(manifest, "reduce", {"bounds": bounds, "counts": counts, "outputs": _outputs(reduced, audit)})
    fps, report = work / "fingerprints.txt", work / "collisions.txt"
    n, k, flagged = fingerprint_file(reduced, fps, report, args.pmax)
    update_manifest(manifest, "fingerprint", {
        "records": n, "classes": k, "flagged": flagged, "pmax": args.pmax, "outputs": _outputs(fps, report),
    })
    print(f"search {sum(r[3] for r in results)} -> merge {len(merged)} -> reduce {counts[-1]} -> classes {k}")
    print(f"manifest -> {manifest}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def _search_flags(p, with_job=True):
    p.add_argument("--degree", "-d", type=int, choices=(3, 4), default=4)
    p.add_argument("--cmax", type=int, default=9, help="coefficient bound B_c")
    p.add_argument("--dmax", type=int, default=10**7, help="discriminant bound B_Delta")
    p.add_argument("--engine", choices=("tree", "direct"), default="direct")
    p.add_argument("--shards", type=int, default=1)
    p.add_argument("--interval", type=int, default=1, help="checkpoint every N prefixes")
    p.add_argument("--checkpoint-level", type=int, default=None)
    p.add_argument("--tree-cache", default=os.environ.get("TQF_TREE_CACHE"))
    p.add_argument("--threads", type=int, default=1)
    if with_job:
        p.add_argument("--job", required=True, help="job index, list N,M or inclusive range A..B")
        p.add_argument("--shard", type=int, default=None, help="default: every shard")
        p.add_argument("--checkpoint-dir", default=None)
        p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tqf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"tqf {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("disc", help="discriminant evaluation and polynomials")
    dsub = p.add_subparsers(dest="disc_cmd", required=True)
    q = dsub.add_parser("eval", help="exact discriminant of an integer form")
    q.add_argument("-d", "--degree", type=int, required=True)
    q.add_argument("coeffs", type=int, nargs="+", help="coefficients in descending lex exponent order")
    q = dsub.add_parser("poly", help="write Delta_d as a polynomial file")
    q.add_argument("-d", "--degree", type=int, required=True)
    q.add_argument("-o", "--output", required=True)
    q.add_argument("--text", action="store_true")
    q.add_argument("--workers", type=int, default=1)
    q = dsub.add_parser("convert", help="transcode text <-> binary")
    q.add_argument("input")
    q.add_argument("output")
    q.add_argument("--to", choices=("text", "binary"))
    p.set_defaults(func=cmd_disc)

    p = sub.add_parser("jobs", help="list job tuples")
    p.add_argument("--cmax", type=int, default=9)
    p.add_argument("--degree", "-d", type=int, choices=(3, 4), default=4)
    p.set_defaults(func=cmd_jobs)

    p = sub.add_parser("search", help="run jobs")
    _search_flags(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("merge", help="merge record files")
    p.add_argument("inputs", nargs="+")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("reduce", help="deduplicate by bounded orbit search")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--bound", type=int, action="append", help="repeat for staged passes")
    p.add_argument("--audit")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("fingerprint", help="point-count fingerprints")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report")
    p.add_argument("--pmax", type=int, default=P_MAX)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_fingerprint)

    p = sub.add_parser("tree", help="monomial tree cache")
    tsub = p.add_subparsers(dest="tree_cmd", required=True)
    q = tsub.add_parser("build")
    q.add_argument("-d", "--degree", type=int, choices=(3, 4), required=True)
    q.add_argument("--cache", default=os.environ.get("TQF_TREE_CACHE"), required="TQF_TREE_CACHE" not in os.environ)
    q.add_argument("--poly", help="read the discriminant from a file instead of computing it")
    q.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("pipeline", help="search, merge, reduce and fingerprint")
    _search_flags(p, with_job=False)
    p.add_argument("--workdir", required=True)
    p.add_argument("--bound", type=int, action="append")
    p.add_argument("--pmax", type=int, default=P_MAX)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tqf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ConsistencyError, TQFError, OSError) as exc:
        print(f"tqf: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

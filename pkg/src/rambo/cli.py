"""Command-line surface.

Subcommands: build, query, fold, stack, bench-fp, analyze, stats.
Exit codes: 0 success, 1 usage error, 2 data error, 3 corrupt index file.
"""

import argparse
import json
import sys
import time

import numpy as np

from . import _kernels, analysis
from .bench import BenchConfig, run_fp_benchmark
from .core import RamboIndex, RamboParams, build_shard_pieces, new_index, stack_indexes
from .errors import (
    CorruptIndexError,
    InconsistentIndexError,
    InvalidParameterError,
    InvalidQueryError,
    RamboError,
)
from .ingest import CorpusSpec, read_corpus, sample_avg_cardinality
from .storage import load_index, save_index, stack_shards


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the CLI contract reserves 2 for
    data errors, so remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _popcount(idx: RamboIndex) -> int:
    return int(np.unpackbits(idx.grid_bits.reshape(-1)).sum())


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(human)


def _params_from(args) -> RamboParams:
    if args.foldable and args.B & (args.B - 1):
        raise InvalidParameterError(f"--foldable requires a power-of-two bucket count, got B={args.B}")
    return RamboParams(B=args.B, R=args.R, eta=args.eta, m=args.m, k=args.k,
                       master_seed=args.seed, shards=args.shards, local_b=args.local_b)


def _cmd_build(args) -> int:
    params = _params_from(args)
    params.validate()
    spec = CorpusSpec(root=args.corpus, kind=args.kind, k=args.k, stoplist=args.stoplist)
    t0 = time.perf_counter()
    if params.m == 0:
        avg = sample_avg_cardinality(spec, args.sample)
        kest = sum(1 for _ in read_corpus(spec))
        params = new_index(params, round(avg), args.p, kest).params
    if params.shards > 1:
        pairs = [(name, list(terms)) for name, terms in read_corpus(spec)]
        pieces = build_shard_pieces(params, pairs, args.p)
        shard_paths = [f"{args.index}.shard{i}" for i in range(params.shards)]
        for piece, path in zip(pieces, shard_paths):
            save_index(piece, path)
        idx = stack_indexes(pieces)
    else:
        idx = RamboIndex(params)
        shard_paths = []
        for name, terms in read_corpus(spec):
            idx.insert_set(name, terms)
    save_index(idx, args.index)
    wall = time.perf_counter() - t0
    bits = _popcount(idx)
    payload = {
        "index": args.index, "shard_files": shard_paths, "K": len(idx.registry),
        "B": idx.params.B, "R": idx.params.R, "m": idx.params.m,
        "bits_set": bits, "build_seconds": round(wall, 3),
    }
    lines = [f"K={payload['K']} B={payload['B']} R={payload['R']} m={payload['m']}",
             f"bits set: {bits}", f"build time: {wall:.3f}s", f"wrote {args.index}"]
    lines += [f"wrote shard {p}" for p in shard_paths]
    _emit(args, payload, "\n".join(lines))
    return 0


def _cmd_query(args) -> int:
    idx = load_index(args.index)
    queries = args.terms if args.terms else (line.rstrip("\n") for line in sys.stdin)
    mode = "bucket_conjunction" if args.mode == "bucket" else "term_at_a_time"
    for line in queries:
        line = line.strip()
        if not line:
            continue
        try:
            if args.sequence:
                res = idx.query_sequence(line, args.k or idx.params.k)
            else:
                parts = line.split()
                res = idx.query_term(parts[0]) if len(parts) == 1 else idx.query_terms(parts, mode)
        except InvalidQueryError as exc:
            print(f"error: {line}: {exc}", file=sys.stderr)
            continue
        names = [idx.registry.name_of(i) for i in res.set_ids]
        if args.json:
            print(json.dumps({"query": line, "matches": names,
                              "bfu_probes": res.bfu_probes,
                              "intersect_work": res.intersect_work}))
        elif args.probes:
            print(f"{line}\t{','.join(names)}\t{res.bfu_probes}\t{res.intersect_work}")
        else:
            print(f"{line}\t{','.join(names)}")
    return 0


def _measured_fp(idx: RamboIndex, probe_path: str) -> float:
    """Mean fraction of sets reported per probe term; the probe file is
    one term per line, assumed absent from the corpus."""
    hits = probes = 0
    with open(probe_path, "rb") as fh:
        for raw in fh:
            term = raw.rstrip(b"\n")
            if term:
                hits += len(idx.query_term(term).set_ids)
                probes += 1
    return hits / (probes * max(1, len(idx.registry))) if probes else 0.0


def _cmd_fold(args) -> int:
    idx = load_index(args.index)
    before_b = idx.params.B
    before_bytes = idx.grid_bits.nbytes
    before_fp = _measured_fp(idx, args.probe_file) if args.probe_file else None
    for _ in range(args.times):
        idx = idx.fold()
    save_index(idx, args.out)
    payload = {
        "out": args.out, "B_before": before_b, "B_after": idx.params.B,
        "grid_bytes_before": before_bytes, "grid_bytes_after": idx.grid_bits.nbytes,
    }
    lines = [f"B: {before_b} -> {idx.params.B}",
             f"grid bytes: {before_bytes} -> {idx.grid_bits.nbytes}"]
    if before_fp is not None:
        after_fp = _measured_fp(idx, args.probe_file)
        payload["fp_before"] = before_fp
        payload["fp_after"] = after_fp
        lines.append(f"measured FP on probe set: {before_fp:.6f} -> {after_fp:.6f}")
    lines.append(f"wrote {args.out}")
    _emit(args, payload, "\n".join(lines))
    return 0


def _cmd_stack(args) -> int:
    idx = stack_shards(args.pieces)
    save_index(idx, args.out)
    payload = {"out": args.out, "K": len(idx.registry), "B": idx.params.B,
               "R": idx.params.R, "shards": idx.params.shards}
    _emit(args, payload,
          f"stacked {len(args.pieces)} pieces: K={payload['K']} B={payload['B']} "
          f"R={payload['R']}\nwrote {args.out}")
    return 0


def _cmd_bench_fp(args) -> int:
    params = RamboParams(B=args.B, R=args.R, eta=args.eta, m=args.m,
                         master_seed=args.seed, shards=args.shards, local_b=args.local_b)
    config = BenchConfig(num_queries=args.num_queries, term_length=args.term_length,
                         multiplicity_mean=args.alpha, seed=args.seed, K_cap=args.K)
    report = run_fp_benchmark(params, config, args.p)
    report["kernel_backend"] = _kernels.BACKEND
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _cmd_analyze(args) -> int:
    out = {
        "inputs": {"K": args.K, "B": args.B, "R": args.R, "V": args.V,
                   "p": args.p, "eta": args.eta, "delta": args.delta,
                   "insertions": args.insertions},
        "per_set_fp_rate": analysis.per_set_fp_rate(args.p, args.B, args.V, args.R),
        "failure_bound": analysis.overall_failure_bound(args.K, args.p, args.B, args.V, args.R),
        "failure_bound_raw": analysis.overall_failure_bound(
            args.K, args.p, args.B, args.V, args.R, clamp=False),
        "min_repetitions": analysis.min_repetitions(args.K, args.delta),
        "expected_query_cost": analysis.expected_query_cost(
            args.K, args.B, args.R, args.V, args.p, args.eta),
        "optimal_buckets": analysis.optimal_buckets(args.K, max(args.V, 1), args.eta),
        "gamma_series": analysis.gamma_series(args.B, max(args.V, 1)),
        "gamma_balls_in_bins": analysis.gamma_balls_in_bins(args.B, max(args.V, 1)),
    }
    mem = analysis.expected_memory(args.B, max(args.V, 1), args.K, args.p, args.insertions)
    out["expected_memory_bits"] = mem["expected_bits"]
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def _cmd_stats(args) -> int:
    idx = load_index(args.index)
    p = idx.params
    fills = idx.fill_fractions()
    sizes = np.array([[len(idx.members[r][b]) for b in range(p.B)] for r in range(p.R)])
    out = {
        "K": len(idx.registry), "B": p.B, "R": p.R, "eta": p.eta, "m": p.m,
        "k": p.k, "shards": p.shards, "grid_bytes": idx.grid_bits.nbytes,
        "fill": {"min": float(fills.min()), "mean": float(fills.mean()),
                 "max": float(fills.max()),
                 "per_cell": [[round(float(v), 6) for v in row] for row in fills]},
        "fp_estimate": {"mean": float((fills ** p.eta).mean()),
                        "per_cell": [[round(float(v ** p.eta), 6) for v in row] for row in fills]},
        "member_list_sizes": {"min": int(sizes.min()), "mean": float(sizes.mean()),
                              "max": int(sizes.max()),
                              "per_cell": sizes.tolist()},
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="rambo", description="Grid-of-Bloom-filters set membership index")
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (u64)")
    common.add_argument("--index", help="index file path")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", parents=[common], help="build an index from a corpus directory")
    b.add_argument("--corpus", required=True, help="directory with one file per set")
    b.add_argument("--kind", choices=["document", "sequence"], default="document")
    b.add_argument("--k", type=int, default=31, help="window length for sequence corpora")
    b.add_argument("--stoplist", default="", help="newline-separated stopword file")
    b.add_argument("--B", type=int, required=True, help="buckets per table")
    b.add_argument("--R", type=int, required=True, help="number of tables")
    b.add_argument("--eta", type=int, default=2, help="hashes per cell filter")
    b.add_argument("--m", type=int, default=0, help="bits per cell (0 = size from sample)")
    b.add_argument("--p", type=float, default=0.01, help="target per-cell false positive rate")
    b.add_argument("--sample", type=int, default=5, help="files sampled to estimate set cardinality")
    b.add_argument("--shards", type=int, default=1)
    b.add_argument("--local-b", dest="local_b", type=int, default=0)
    b.add_argument("--foldable", action="store_true", help="require power-of-two B")
    b.set_defaults(func=_cmd_build)

    q = sub.add_parser("query", parents=[common], help="query terms (args or stdin), TSV out")
    q.add_argument("terms", nargs="*", help="query lines; multi-word lines are conjunctions")
    q.add_argument("--sequence", action="store_true", help="treat each line as a windowed sequence")
    q.add_argument("--k", type=int, default=0, help="window length (default: index's k)")
    q.add_argument("--mode", choices=["term", "bucket"], default="term")
    q.add_argument("--probes", action="store_true", help="append probe/work counters")
    q.set_defaults(func=_cmd_query)

    f = sub.add_parser("fold", parents=[common], help="halve the grid n times")
    f.add_argument("--out", required=True)
    f.add_argument("--times", type=int, default=1)
    f.add_argument("--probe-file", help="absent terms, one per line, to measure FP before/after")
    f.set_defaults(func=_cmd_fold)

    s = sub.add_parser("stack", parents=[common], help="assemble shard piece files")
    s.add_argument("pieces", nargs="+", help="shard piece files")
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_stack)

    bf = sub.add_parser("bench-fp", parents=[common], help="synthetic false-positive benchmark (JSON)")
    bf.add_argument("--K", type=int, default=100, help="number of sets")
    bf.add_argument("--B", type=int, default=16)
    bf.add_argument("--R", type=int, default=2)
    bf.add_argument("--eta", type=int, default=2)
    bf.add_argument("--m", type=int, default=0)
    bf.add_argument("--p", type=float, default=0.01)
    bf.add_argument("--shards", type=int, default=1)
    bf.add_argument("--local-b", dest="local_b", type=int, default=0)
    bf.add_argument("--num-queries", type=int, default=1000)
    bf.add_argument("--term-length", type=int, default=30)
    bf.add_argument("--alpha", type=float, default=100.0, help="mean of the multiplicity exponential")
    bf.set_defaults(func=_cmd_bench_fp)

    a = sub.add_parser("analyze", parents=[common], help="evaluate the closed-form models (JSON)")
    a.add_argument("--K", type=int, default=100)
    a.add_argument("--B", type=int, default=16)
    a.add_argument("--R", type=int, default=2)
    a.add_argument("--V", type=int, default=1)
    a.add_argument("--p", type=float, default=0.01)
    a.add_argument("--eta", type=int, default=2)
    a.add_argument("--delta", type=float, default=0.01)
    a.add_argument("--insertions", type=int, default=0,
                   help="total (term, set) pairs for the memory estimate")
    a.set_defaults(func=_cmd_analyze)

    st = sub.add_parser("stats", parents=[common], help="index contents summary (JSON)")
    st.set_defaults(func=_cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("query", "fold", "stats") and not args.index:
        parser.error(f"{args.command} requires --index")
    try:
        return args.func(args)
    except (CorruptIndexError, InconsistentIndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (InvalidParameterError, InvalidQueryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RamboError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

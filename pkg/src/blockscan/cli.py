"""Command-line front end: synth, scan, bound, bench, oracle-check."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .bench import loglog_slope, run_bench
from .blocks import block_range
from .errors import (EXIT_DEGENERATE, EXIT_INTERNAL, EXIT_OK, EXIT_VALIDATION,
                     BlockscanError, DegenerateLabels, EmptyBlockRange,
                     EmptyInput, ParseError)
from .model import Dataset, ingest_csv
from .oracle import exact_tail
from .pipeline import report_json, run_scan
from .plotting import write_svg
from .statistic import (HypergeomParams, l_function, tail_bound,
                        tail_bound_constant)
from .synth import SynthConfig, sample_dataset

MIN_PERMUTATIONS = 100


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="blockscan",
        description="Detect spatial clusters in labeled 2D point data with "
                    "a size-blocked rectangle scan.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("synth", help="generate synthetic experiment data")
    ps.add_argument("--out", required=True, help="output CSV path")
    ps.add_argument("--n", type=int, default=1000)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--base-p", type=float, default=0.4)
    ps.add_argument("--strip-p", type=float, default=0.6)
    ps.add_argument("--box-p", type=float, default=0.75)
    ps.add_argument("--config", help="JSON file overriding the full SynthConfig")

    pc = sub.add_parser("scan", help="run the scan on a CSV of labeled points")
    pc.add_argument("input", help="CSV with header x,y,label")
    pc.add_argument("--alpha", type=float, default=0.05)
    pc.add_argument("--permutations", type=int, default=1000)
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--weight", choices=("ell2", "ell10"), default="ell2")
    pc.add_argument("--two-sided", action="store_true")
    pc.add_argument("--method", choices=("blocked", "conventional", "both"),
                    default="blocked")
    pc.add_argument("--plot", metavar="PATH.svg", help="write an SVG of the result")
    pc.add_argument("--output", metavar="PATH.json", help="write the JSON report here")
    pc.add_argument("--include-identity", action="store_true",
                    help="use the identity permutation as Monte Carlo draw 0")
    pc.add_argument("--workers", type=int, default=1)

    pb = sub.add_parser("bound", help="hypergeometric tail bound vs exact tail")
    pb.add_argument("--n-total", "-N", type=int, required=True)
    pb.add_argument("--reds", "-R", type=int, required=True)
    pb.add_argument("--draws", "-n", type=int, required=True)
    pb.add_argument("--x", "-x", type=int, required=True)
    pb.add_argument("--side", choices=("upper", "lower"), default="upper")

    pe = sub.add_parser("bench", help="runtime scaling of enumeration + evaluation")
    pe.add_argument("--sizes", default="1000,3000,10000",
                    help="comma-separated point counts")
    pe.add_argument("--seed", type=int, default=0)
    pe.add_argument("--workers", type=int, default=1)
    pe.add_argument("--output", metavar="PATH.csv", help="also write the table here")

    po = sub.add_parser("oracle-check", help="self-checks against brute-force oracles")
    po.add_argument("--seed", type=int, default=0)
    po.add_argument("--n", type=int, default=75)
    return p


def cmd_synth(args) -> int:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = SynthConfig.from_json(fh.read())
    else:
        config = SynthConfig(n_points=args.n, seed=args.seed, base_p=args.base_p,
                             strip_p=args.strip_p, box_p=args.box_p)
    dataset = sample_dataset(config)
    with open(args.out, "w", encoding="utf-8") as fh:
        dataset.to_csv(fh)
    print(f"wrote {dataset.n_total} points ({dataset.ones_total} ones) to {args.out}")
    return EXIT_OK


def cmd_scan(args) -> int:
    if not 0.0 < args.alpha < 1.0:
        raise ParseError(0, f"--alpha must be in (0,1), got {args.alpha}")
    if args.permutations < MIN_PERMUTATIONS:
        raise ParseError(0, f"--permutations must be >= {MIN_PERMUTATIONS}")
    dataset = ingest_csv(args.input)
    if not block_range(dataset.n_total):
        raise EmptyBlockRange(
            f"N={dataset.n_total} is too small: no block level satisfies "
            f"2^-ell >= 2 ln(N)/N")
    outcome = run_scan(dataset, alpha=args.alpha, n_perms=args.permutations,
                       seed=args.seed, weight_scheme=args.weight,
                       two_sided=args.two_sided, method=args.method,
                       include_identity=args.include_identity,
                       workers=args.workers)
    report = outcome.report()
    text = report_json(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.plot:
        panels = []
        if outcome.conventional_minimal is not None:
            panels.append(("conventional", outcome.conventional_minimal))
        if outcome.blocked_minimal is not None:
            panels.append(("blocked", outcome.blocked_minimal))
        write_svg(args.plot, dataset, panels)
    n_blocked = len(outcome.blocked or [])
    n_conv = len(outcome.conventional or [])
    print(f"scan done: method={args.method} "
          f"blocked={n_blocked} conventional={n_conv} detections",
          file=sys.stderr)
    return EXIT_OK


def cmd_bound(args) -> int:
    params = HypergeomParams(n_total=args.n_total, reds=args.reds,
                             draws=args.draws, x=args.x)
    lx = l_function(params)
    c = tail_bound_constant(params)
    bound = tail_bound(params, args.side)
    exact = exact_tail(params, args.side)
    print(f"L(x)  = {lx!r}")
    print(f"C     = {c!r}")
    print(f"bound = {bound!r}")
    print(f"exact = {exact!r}")
    print(f"ratio bound/exact = {bound / exact if exact else float('inf')!r}")
    return EXIT_OK


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    if not sizes:
        raise ParseError(0, "--sizes must list at least one point count")
    rows = run_bench(sizes, args.seed, workers=args.workers)
    lines = ["n,rect_count,seconds,max_t"]
    for r in rows:
        lines.append(f"{r.n_points},{r.visited},{r.seconds:.6f},{r.max_t:.6f}")
    table = "\n".join(lines) + "\n"
    sys.stdout.write(table)
    if len(rows) >= 2:
        print(f"log-log slope of time vs N: {loglog_slope(rows):.4f}")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(table)
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    from .enumeration import RectangleIndex, iter_block_rects
    from .blocks import BlockSpec
    from .oracle import brute_force_max
    from .statistic import Counts, llr

    rng = np.random.default_rng(args.seed)
    n = args.n
    if n > 80:
        print(f"n capped to 80 for brute force (asked {n})")
        n = 80
    xs = rng.random(n) * 10
    ys = rng.random(n) * 10
    labels = (rng.random(n) < 0.4).astype(int)
    if labels.sum() in (0, n):
        labels[0] = 1 - labels[0]
    dataset = Dataset.from_points(xs, ys, labels)
    failures = 0

    best_enum = 0.0
    n_rects = 0
    for ell in block_range(n):
        for rect in iter_block_rects(dataset, BlockSpec(ell)):
            n_rects += 1
            if rect.counts.n_in in (0, n):
                continue
            best_enum = max(best_enum, llr(rect.counts))
    brute_t, brute_rect = brute_force_max(dataset)
    ok = best_enum <= brute_t + 1e-12
    print(f"enumerated {n_rects} rectangles; max T {best_enum:.6f} "
          f"<= brute-force max {brute_t:.6f}: {'PASS' if ok else 'FAIL'}")
    failures += 0 if ok else 1

    params = HypergeomParams(n_total=50, reds=20, draws=10, x=8)
    ident = exact_tail(params, "upper") + exact_tail(
        HypergeomParams(n_total=50, reds=20, draws=10, x=7), "lower")
    ok = abs(ident - 1.0) < 1e-12
    print(f"tail identity P(X>=8) + P(X<=7) = {ident!r}: {'PASS' if ok else 'FAIL'}")
    failures += 0 if ok else 1

    bound = tail_bound(params, "upper")
    exact = exact_tail(params, "upper")
    ok = exact <= bound
    print(f"bound {bound:.6f} >= exact {exact:.6f}: {'PASS' if ok else 'FAIL'}")
    failures += 0 if ok else 1
    return EXIT_OK if failures == 0 else EXIT_INTERNAL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "synth": cmd_synth,
        "scan": cmd_scan,
        "bound": cmd_bound,
        "bench": cmd_bench,
        "oracle-check": cmd_oracle_check,
    }
    try:
        return handlers[args.command](args)
    except DegenerateLabels as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ParseError, EmptyInput, EmptyBlockRange, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BlockscanError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except AssertionError as exc:
        print(f"internal invariant failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

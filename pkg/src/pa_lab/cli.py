"""Command line interface.

Subcommands mirror the library surface: generate trees, run the clocked
branching simulation, solve the limit theory, estimate from snapshots or
edge lists, and drive the Monte Carlo studies. Every command is
deterministic given its flags: re-running writes byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .ctbp import simulate_until_size
from .estimator import (
    attachment_count_check,
    census_from_edge_list,
    estimate,
    monotonize,
    normalize_by_degree_one,
)
from .exceptions import PALabError
from .experiments import (
    ExperimentPlan,
    format_cell,
    run_consistency_study,
    run_normality_study,
    run_variance_study,
    write_csv,
)
from .generator import GrowthConfig, grow
from .model import EvolutionLog, PAFunction, TreeSnapshot, census_from_snapshot
from .theory import solve_malthusian


def _load_function(spec: str) -> PAFunction:
    """Accept inline JSON or a path to a JSON file."""
    text = spec.strip()
    if not text.startswith("{"):
        text = Path(spec).read_text()
    return PAFunction.from_json(text)


def _cmd_generate(args) -> int:
    f = _load_function(args.f)
    cfg = GrowthConfig(n_target=args.n, f=f, seed=args.seed, record_log=args.log)
    snapshot, log = grow(cfg)
    snapshot.write_text(args.out)
    if log is not None:
        log.write_text(str(args.out) + ".log")
    return 0


def _cmd_ctbp(args) -> int:
    f = _load_function(args.f)
    _, traj = simulate_until_size(f, args.n, args.seed, mode=args.mode, k=args.k)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("t", "z1", "z_eq_k", "z_gt_k"))
        for row in zip(traj.t, traj.z1, traj.z_eq, traj.z_gt):
            writer.writerow(
                (repr(float(row[0])), int(row[1]), int(row[2]), int(row[3]))
            )
    return 0


def _cmd_theory(args) -> int:
    f = _load_function(args.f)
    sol = solve_malthusian(f, tol=args.tol, tail_tol=args.tail_tol)
    k_max = sol.K if args.max_k == 0 else min(args.max_k, sol.K)
    with open(args.out, "w", newline="") as fh:
        fh.write(
            f"# lambda_star={sol.lambda_star!r} "
            f"truncation_error={sol.truncation_error!r} K={sol.K}\r\n"
        )
        writer = csv.writer(fh)
        writer.writerow(("k", "f_k", "p_k", "p_gt_k", "r_k"))
        for k in range(1, k_max + 1):
            writer.writerow(
                (
                    k,
                    repr(float(f(k))),
                    repr(float(sol.p[k - 1])),
                    repr(float(sol.p_tail[k - 1])),
                    repr(float(sol.r[k - 1])),
                )
            )
    return 0


def _cmd_estimate(args) -> int:
    if (args.snapshot is None) == (args.edges is None):
        print("estimate: provide exactly one of --snapshot or --edges",
              file=sys.stderr)
        return 2
    if args.snapshot is not None:
        census = census_from_snapshot(TreeSnapshot.read_text(args.snapshot))
    else:
        census = census_from_edge_list(args.edges)

    exit_code = 0
    if args.log is not None:
        if args.snapshot is None:
            print("estimate: --log requires --snapshot", file=sys.stderr)
            return 2
        report = attachment_count_check(census, EvolutionLog.read_text(args.log))
        print(f"attachment count check: {report.summary()}")
        if not report.ok:
            exit_code = 1

    table = estimate(census)
    if args.normalize:
        table = normalize_by_degree_one(table)
    if args.monotone:
        table = monotonize(table)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("k", "n_k", "n_gt_k", "r_hat"))
        for e in table.entries:
            writer.writerow((e.k, e.n_k, e.n_gt_k, format_cell(e.r_hat)))
    return exit_code


def _cmd_experiment(args) -> int:
    if args.plan is not None:
        text = args.plan.strip()
        if not text.startswith("{"):
            text = Path(args.plan).read_text()
        plan = ExperimentPlan.from_json(text)
    else:
        plan = ExperimentPlan()
    if args.full_scale:
        plan = plan.full_scale()

    out_dir = Path(args.out_dir if args.out_dir else (plan.outputs or "."))
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.study == "consistency":
        header, rows = run_consistency_study(plan, workers=args.workers)
        write_csv(out_dir / "consistency.csv", header, rows)
    elif args.study == "variance":
        header, rows = run_variance_study(plan, workers=args.workers)
        write_csv(out_dir / "variance.csv", header, rows)
    else:
        long_t, summary_t, qq_t = run_normality_study(plan, k=args.k,
                                                      workers=args.workers)
        write_csv(out_dir / "normality.csv", *long_t)
        write_csv(out_dir / "normality_summary.csv", *summary_t)
        write_csv(out_dir / "normality_qq.csv", *qq_t)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pa-lab",
        description="Grow, simulate, and estimate preferential attachment trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="grow a tree and write its parent array")
    p.add_argument("--f", required=True, help="attachment function (JSON or path)")
    p.add_argument("--n", type=int, required=True, help="target node count")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--log", action="store_true",
                   help="also write chosen-degree log to <out>.log")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_generate)

    p = sub.add_parser("ctbp", help="run the clocked branching simulation")
    p.add_argument("--f", required=True)
    p.add_argument("--n", type=int, required=True, help="target population")
    p.add_argument("--k", type=int, default=1, help="tracked degree")
    p.add_argument("--mode", choices=("single_root", "two_roots"),
                   default="two_roots")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_ctbp)

    p = sub.add_parser("theory", help="solve the limit law for a function")
    p.add_argument("--f", required=True)
    p.add_argument("--tol", type=float, default=1e-10,
                   help="tolerance on |rho(lambda*) - 1|")
    p.add_argument("--tail-tol", type=float, default=1e-12,
                   help="certified residual tail mass at the horizon")
    p.add_argument("--max-k", type=int, default=500,
                   help="rows to emit (0 = the full horizon)")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_theory)

    p = sub.add_parser("estimate", help="estimate preferences from a snapshot")
    p.add_argument("--snapshot", help="parent-array text file")
    p.add_argument("--edges", help="whitespace-separated edge list file")
    p.add_argument("--log", help="chosen-degree log to cross-check")
    p.add_argument("--normalize", action="store_true",
                   help="normalize so the degree-1 estimate is 1")
    p.add_argument("--monotone", action="store_true",
                   help="apply the nondecreasing rearrangement")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_estimate)

    p = sub.add_parser("experiment", help="run a Monte Carlo study")
    p.add_argument("--plan", help="plan JSON or path (defaults: desk scale)")
    p.add_argument("--study", choices=("consistency", "variance", "normality"),
                   required=True)
    p.add_argument("--k", type=int, default=2,
                   help="tracked degree for the normality study")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--full-scale", action="store_true",
                   help="published-scale grid (hours of compute)")
    p.set_defaults(fn=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PALabError as exc:
        print(f"pa-lab: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

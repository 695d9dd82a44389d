"""Command-line front end: single runs, batch plans, bound tables, traces."""

import argparse
import math
import sys
from pathlib import Path

from .engine import spawn_scenario, run_simulation
from .harness import (ExperimentPlan, PlanError, bounds_table, make_policy,
                      parse_config, parse_kinematics, run_batch)
from .metrics import metrics_of
from .trvf import ALLOWED_LANE_COUNTS


def _add_run_flags(sub):
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--robots", type=int, default=20)
    sub.add_argument("--policy", choices=["sqf", "trvf", "baseline"],
                     default="sqf")
    sub.add_argument("--lanes", type=int, default=4,
                     choices=list(ALLOWED_LANE_COUNTS))
    sub.add_argument("--kinematics", choices=["holo", "nonholo"],
                     default="holo")
    sub.add_argument("--target-radius", type=float, default=3.0)
    sub.add_argument("--d-work", type=float, default=13.0)
    sub.add_argument("--timeout-s", type=float, default=3600.0)
    sub.add_argument("--dt", type=float, default=0.1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="targetflow",
        description="Deterministic 2D swarm congestion-control simulator")
    subs = parser.add_subparsers(dest="command", required=True)

    run = subs.add_parser("run", help="single simulation, print metrics")
    _add_run_flags(run)

    batch = subs.add_parser("batch", help="execute a plan file, emit CSVs")
    batch.add_argument("plan", type=Path)
    batch.add_argument("--out", type=Path, default=Path("."),
                       help="output directory for runs.csv and summary.csv")
    batch.add_argument("--workers", type=int, default=1)

    bounds = subs.add_parser("bounds", help="analytic throughput bound table")
    bounds.add_argument("--v", type=float, default=1.0)
    bounds.add_argument("--s", type=float, default=3.0)
    bounds.add_argument("--d", type=float, default=3.0)
    bounds.add_argument("--lanes", type=int, nargs="+",
                        default=list(ALLOWED_LANE_COUNTS))
    bounds.add_argument("--theta", type=float, nargs="+",
                        default=[math.pi / 6])
    bounds.add_argument("--out", type=Path, default=None,
                        help="write CSV here instead of stdout")

    trace = subs.add_parser("trace",
                            help="single simulation with per-step trace lines")
    _add_run_flags(trace)
    trace.add_argument("--out", type=Path, required=True)
    return parser


def _single_run(args, trace_out=None):
    plan = ExperimentPlan()
    policy = make_policy(args.policy, args.d_work, args.lanes, plan.fields,
                         plan.guidance)
    scenario, _ = spawn_scenario(args.seed, args.robots, args.target_radius,
                                 args.d_work, parse_kinematics(args.kinematics),
                                 args.dt, args.timeout_s)
    record = run_simulation(scenario, policy, plan.fields,
                            trace_out=trace_out)
    return record


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "run":
        record = _single_run(args)
        m = metrics_of(record)
        print(f"completed:      {m.completed}")
        print(f"throughput:     {m.throughput}")
        print(f"reaching_s:     {m.reaching_time}")
        print(f"avg_leaving_s:  {m.avg_leaving_time}")
        print(f"total_s:        {m.total_time}")
        print(f"mean_nn_dist_m: {m.mean_nn_dist:.6f}")
        print(f"mean_speed_mps: {m.mean_speed:.6f}")
        print(f"overlap_events: {m.overlap_events}")
        return 0

    if args.command == "batch":
        try:
            plan = parse_config(args.plan.read_text())
        except PlanError as exc:
            print(f"plan error: {exc}", file=sys.stderr)
            return 2
        args.out.mkdir(parents=True, exist_ok=True)
        runs_path = args.out / "runs.csv"
        summary_path = args.out / "summary.csv"
        with open(runs_path, "w", newline="") as runs_out, \
                open(summary_path, "w", newline="") as summary_out:
            n = run_batch(plan, runs_out, summary_out, workers=args.workers)
        print(f"wrote {n} run rows to {runs_path}")
        return 0

    if args.command == "bounds":
        if args.out is None:
            bounds_table(sys.stdout, v=args.v, s=args.s, d=args.d,
                         lanes=args.lanes, thetas=args.theta)
        else:
            with open(args.out, "w", newline="") as out:
                bounds_table(out, v=args.v, s=args.s, d=args.d,
                             lanes=args.lanes, thetas=args.theta)
        return 0

    if args.command == "trace":
        with open(args.out, "w") as out:
            out.write("step,robot,x,y,heading,mode\n")
            record = _single_run(args, trace_out=out)
        print(f"traced {record.steps} steps to {args.out}")
        return 0

    raise AssertionError


if __name__ == "__main__":
    sys.exit(main())

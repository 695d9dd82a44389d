"""Batch experiment harness.

Parses plan files, runs every (policy, robots, target radius, lanes, seed)
cell, and writes run-level and cell-level CSVs.  Output row order follows
the plan regardless of how many workers execute cells, so reruns of the
same plan are byte-identical.
"""

import configparser
import csv
import io
import math
import multiprocessing
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .engine import (BaselinePolicy, Kinematics, SqfPolicy, TrvfPolicy,
                     run_simulation, spawn_scenario)
from .fields import FieldParams
from .guidance import GuidanceParams
from .metrics import (BoundParams, RunMetrics, hex_packing_bound, metrics_of,
                      summarize, touch_and_run_bound)
from .trvf import ALLOWED_LANE_COUNTS, compute_turning_radius

POLICY_NAMES = ("sqf", "trvf", "baseline")

RUN_COLUMNS = ["policy", "kinematics", "n", "s", "K", "seed", "completed",
               "throughput", "reaching_s", "avg_leaving_s", "total_s",
               "mean_nn_dist_m", "mean_speed_mps", "overlap_events", "error"]

SUMMARY_COLUMNS = ["policy", "kinematics", "n", "s", "K", "n_runs",
                   "n_completed", "failure_fraction",
                   "throughput_mean", "throughput_std", "throughput_ci99",
                   "reaching_mean", "reaching_std", "reaching_ci99",
                   "avg_leaving_mean", "avg_leaving_std", "avg_leaving_ci99",
                   "total_mean", "total_std", "total_ci99"]

BOUND_COLUMNS = ["bound", "K", "theta", "v", "s", "d", "value", "feasible"]


class PlanError(ValueError):
    """Raised for malformed or out-of-range plan configuration."""


@dataclass(frozen=True)
class ExperimentPlan:
    policies: Tuple[str, ...] = ("sqf",)
    robots: Tuple[int, ...] = (20,)
    target_radius: Tuple[float, ...] = (3.0,)
    lanes: Tuple[int, ...] = (4,)
    seeds: int = 1
    base_seed: int = 0
    kinematics: Kinematics = Kinematics.HOLONOMIC
    timeout_s: float = 3600.0
    dt: float = 0.1
    d_work: float = 13.0
    fields: FieldParams = field(default_factory=FieldParams)
    guidance: GuidanceParams = field(default_factory=GuidanceParams)


_SWEEP_KEYS = {"policies", "robots", "target_radius", "lanes"}
_RUN_KEYS = {"seeds", "base_seed", "kinematics", "timeout_s", "dt", "d_work"}
_PARAM_KEYS = {"k_rep", "k_sqf", "k_trvf", "i_default", "i_min",
               "k_s", "k_o", "k_r", "v_max"}


def _split(raw: str) -> List[str]:
    return [tok.strip() for tok in raw.split(",") if tok.strip()]


def parse_kinematics(raw: str) -> Kinematics:
    try:
        return Kinematics(raw.strip())
    except ValueError:
        raise PlanError(f"kinematics: expected 'holo' or 'nonholo', got {raw!r}")


def parse_config(text: str) -> ExperimentPlan:
    """Build a plan from INI-style text; unset keys take the defaults."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise PlanError(f"malformed plan file: {exc}") from exc

    for section in cp.sections():
        if section not in ("sweep", "run", "params"):
            raise PlanError(f"unknown section [{section}]")
        allowed = {"sweep": _SWEEP_KEYS, "run": _RUN_KEYS,
                   "params": _PARAM_KEYS}[section]
        for key in cp[section]:
            if key not in allowed:
                raise PlanError(f"unknown key {key!r} in section [{section}]")

    kwargs: Dict[str, object] = {}
    sweep = cp["sweep"] if cp.has_section("sweep") else {}
    if "policies" in sweep:
        policies = tuple(_split(sweep["policies"]))
        for p in policies:
            if p not in POLICY_NAMES:
                raise PlanError(f"policies: unknown policy {p!r}")
        if not policies:
            raise PlanError("policies: empty sweep")
        kwargs["policies"] = policies
    if "robots" in sweep:
        try:
            robots = tuple(int(tok) for tok in _split(sweep["robots"]))
        except ValueError:
            raise PlanError("robots: expected integers")
        if not robots or any(n < 1 for n in robots):
            raise PlanError("robots: every count must be >= 1")
        kwargs["robots"] = robots
    if "target_radius" in sweep:
        try:
            radii = tuple(float(tok) for tok in _split(sweep["target_radius"]))
        except ValueError:
            raise PlanError("target_radius: expected numbers")
        if not radii or any(s <= 0 for s in radii):
            raise PlanError("target_radius: every radius must be positive")
        kwargs["target_radius"] = radii
    if "lanes" in sweep:
        try:
            lanes = tuple(int(tok) for tok in _split(sweep["lanes"]))
        except ValueError:
            raise PlanError("lanes: expected integers")
        if not lanes or any(k not in ALLOWED_LANE_COUNTS for k in lanes):
            raise PlanError(f"lanes: allowed values are {ALLOWED_LANE_COUNTS}")
        kwargs["lanes"] = lanes

    run = cp["run"] if cp.has_section("run") else {}
    if "seeds" in run:
        seeds = int(run["seeds"])
        if seeds < 1:
            raise PlanError("seeds: must be >= 1")
        kwargs["seeds"] = seeds
    if "base_seed" in run:
        kwargs["base_seed"] = int(run["base_seed"])
    if "kinematics" in run:
        kwargs["kinematics"] = parse_kinematics(run["kinematics"])
    if "timeout_s" in run:
        timeout = float(run["timeout_s"])
        if timeout <= 0:
            raise PlanError("timeout_s: must be positive")
        kwargs["timeout_s"] = timeout
    if "dt" in run:
        dt = float(run["dt"])
        if dt <= 0:
            raise PlanError("dt: must be positive")
        kwargs["dt"] = dt
    if "d_work" in run:
        d_work = float(run["d_work"])
        if d_work <= 0:
            raise PlanError("d_work: must be positive")
        kwargs["d_work"] = d_work

    params = cp["params"] if cp.has_section("params") else {}
    fdefault = FieldParams()
    gdefault = GuidanceParams()
    try:
        fparams = FieldParams(
            k_rep=float(params.get("k_rep", fdefault.k_rep)),
            k_sqf=float(params.get("k_sqf", fdefault.k_sqf)),
            k_trvf=float(params.get("k_trvf", fdefault.k_trvf)),
            i_default=float(params.get("i_default", fdefault.i_default)),
            i_min=float(params.get("i_min", fdefault.i_min)))
        gparams = GuidanceParams(
            k_s=float(params.get("k_s", gdefault.k_s)),
            k_o=float(params.get("k_o", gdefault.k_o)),
            k_r=float(params.get("k_r", gdefault.k_r)),
            v_max=float(params.get("v_max", gdefault.v_max)),
            i_default=float(params.get("i_default", fdefault.i_default)))
    except ValueError as exc:
        raise PlanError(f"params: {exc}") from exc
    kwargs["fields"] = fparams
    kwargs["guidance"] = gparams

    plan = ExperimentPlan(**kwargs)

    if "trvf" in plan.policies:
        for s in plan.target_radius:
            for k in plan.lanes:
                try:
                    compute_turning_radius(s, fparams.i_default,
                                           2.0 * math.pi / k)
                except ValueError as exc:
                    raise PlanError(
                        f"lanes: trvf infeasible for target_radius={s}, "
                        f"lanes={k}: {exc}") from exc
    return plan


def make_policy(name: str, d_work: float, k_lanes: int, fparams: FieldParams,
                gparams: GuidanceParams):
    if name == "sqf":
        return SqfPolicy(d_work, fparams)
    if name == "trvf":
        return TrvfPolicy(d_work, k_lanes, fparams, gparams)
    if name == "baseline":
        return BaselinePolicy(fparams)
    raise ValueError(f"unknown policy {name!r}")


def _cells(plan: ExperimentPlan) -> List[Dict[str, object]]:
    cells = []
    for policy in plan.policies:
        lane_values: Tuple[Optional[int], ...]
        lane_values = plan.lanes if policy == "trvf" else (None,)
        for n in plan.robots:
            for s in plan.target_radius:
                for k in lane_values:
                    cells.append({"policy": policy, "n": n, "s": s, "k": k})
    return cells


def execute_run(plan: ExperimentPlan, policy_name: str, n: int, s: float,
                k_lanes: Optional[int], seed: int):
    """Run one simulation; returns (RunMetrics or None, error string)."""
    try:
        policy = make_policy(policy_name, plan.d_work, k_lanes or 4,
                             plan.fields, plan.guidance)
        scenario, _ = spawn_scenario(seed, n, s, plan.d_work, plan.kinematics,
                                     plan.dt, plan.timeout_s)
        record = run_simulation(scenario, policy, plan.fields)
        return metrics_of(record), ""
    except Exception as exc:  # run failures become rows, not batch aborts
        return None, str(exc)


def _execute_cell(args):
    plan, cell = args
    results = []
    for seed in range(plan.base_seed, plan.base_seed + plan.seeds):
        results.append((seed,) + execute_run(plan, cell["policy"], cell["n"],
                                             cell["s"], cell["k"], seed))
    return results


def _fmt(value: Optional[float]) -> str:
    if value is None:
        return ""
    return f"{value:.6f}"


def run_batch(plan: ExperimentPlan, runs_out, summary_out,
              workers: int = 1) -> int:
    """Execute every cell of the plan; returns the number of run rows.

    `runs_out` and `summary_out` are writable text streams.
    """
    cells = _cells(plan)
    jobs = [(plan, cell) for cell in cells]
    if workers > 1 and len(jobs) > 1:
        with multiprocessing.Pool(workers) as pool:
            cell_results = pool.map(_execute_cell, jobs)
    else:
        cell_results = [_execute_cell(job) for job in jobs]

    run_writer = csv.writer(runs_out, lineterminator="\n")
    run_writer.writerow(RUN_COLUMNS)
    summary_writer = csv.writer(summary_out, lineterminator="\n")
    summary_writer.writerow(SUMMARY_COLUMNS)
    kin = plan.kinematics.value
    n_rows = 0

    for cell, results in zip(cells, cell_results):
        k_str = "" if cell["k"] is None else str(cell["k"])
        cell_metrics: List[RunMetrics] = []
        for seed, metrics, error in results:
            if metrics is None:
                run_writer.writerow([cell["policy"], kin, cell["n"],
                                     _fmt(cell["s"]), k_str, seed, "", "", "",
                                     "", "", "", "", "", error])
                n_rows += 1
                continue
            cell_metrics.append(metrics)
            run_writer.writerow([
                cell["policy"], kin, cell["n"], _fmt(cell["s"]), k_str, seed,
                str(metrics.completed).lower(), _fmt(metrics.throughput),
                _fmt(metrics.reaching_time), _fmt(metrics.avg_leaving_time),
                _fmt(metrics.total_time), _fmt(metrics.mean_nn_dist),
                _fmt(metrics.mean_speed), metrics.overlap_events, error])
            n_rows += 1
        if cell_metrics:
            summary = summarize(cell_metrics)
            row = [cell["policy"], kin, cell["n"], _fmt(cell["s"]), k_str,
                   summary["n_runs"], summary["n_completed"],
                   _fmt(summary["failure_fraction"])]
            for name in ("throughput", "reaching_time", "avg_leaving_time",
                         "total_time"):
                stats = summary[name]
                if stats is None:
                    row += ["", "", ""]
                else:
                    row += [_fmt(stats["mean"]), _fmt(stats["std"]),
                            _fmt(stats["ci99_half_width"])]
            summary_writer.writerow(row)
    return n_rows


def bounds_table(out, v: float = 1.0, s: float = 3.0, d: float = 3.0,
                 lanes=ALLOWED_LANE_COUNTS,
                 thetas=(math.pi / 6,), i_default: float = 3.0) -> None:
    """CSV of both analytic bounds over the requested K and theta values."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(BOUND_COLUMNS)
    for theta in thetas:
        value = hex_packing_bound(BoundParams(v=v, s=s, d=d, theta=theta))
        writer.writerow(["hex_packing", "", f"{theta:.6f}", _fmt(v), _fmt(s),
                         _fmt(d), _fmt(value), "true"])
    for k in lanes:
        params = BoundParams(v=v, s=s, d=d, k_lanes=k, i_default=i_default)
        try:
            value = touch_and_run_bound(params)
            writer.writerow(["touch_and_run", k, "", _fmt(v), _fmt(s),
                             _fmt(d), _fmt(value), "true"])
        except ValueError:
            writer.writerow(["touch_and_run", k, "", _fmt(v), _fmt(s),
                             _fmt(d), "", "false"])


def render_bounds_csv(**kwargs) -> str:
    buf = io.StringIO()
    bounds_table(buf, **kwargs)
    return buf.getvalue()

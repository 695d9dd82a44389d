"""Throughput and timing metrics plus the closed-form throughput bounds.

The two bounds are the hexagonal-packing corridor bound and the asymptotic
touch-and-run bound; simulation results are compared against them evaluated
at the run's measured mean inter-robot spacing and mean speed.
"""

import math
from dataclasses import dataclass
from statistics import mean, stdev
from typing import Dict, List, Optional, Sequence

from .engine import RunRecord
from .trvf import ALLOWED_LANE_COUNTS, compute_turning_radius

Z_99 = 2.5758293035489004  # two-sided 99% normal quantile

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class RunMetrics:
    throughput: Optional[float]
    reaching_time: Optional[float]
    avg_leaving_time: Optional[float]
    total_time: Optional[float]
    completed: bool
    mean_nn_dist: float
    mean_speed: float
    overlap_events: int


@dataclass(frozen=True)
class BoundParams:
    v: float
    s: float
    d: float
    theta: float = math.pi / 6
    k_lanes: int = 4
    i_default: float = 3.0


def throughput(arrival_times: Sequence[float]) -> float:
    """Inverse mean inter-arrival time over a finite run."""
    if len(arrival_times) < 2:
        raise ValueError("throughput needs at least two arrivals")
    times = list(arrival_times)
    for a, b in zip(times, times[1:]):
        if b <= a:
            raise ValueError("arrival times must be strictly increasing")
    return (len(times) - 1) / (times[-1] - times[0])


def reaching_time(record: RunRecord) -> float:
    """Time of the last robot's first arrival."""
    if not record.completed:
        raise ValueError("reaching time undefined for an incomplete run")
    return max(t for t in record.arrival_times if t is not None)


def avg_leaving_time(record: RunRecord, allow_partial: bool = False) -> float:
    """Mean per-robot time from arrival to crossing the working circle."""
    pairs = [(a, e) for a, e in zip(record.arrival_times, record.exit_times)
             if a is not None and e is not None]
    if not record.completed and not allow_partial:
        raise ValueError("incomplete run; pass allow_partial to average the "
                         "robots that finished")
    if not pairs:
        raise ValueError("no robot completed the leg")
    return mean(e - a for a, e in pairs)


def total_time(record: RunRecord) -> float:
    """Time of the last robot's exit from the working circle."""
    if not record.completed:
        raise ValueError("total time undefined for an incomplete run")
    return max(t for t in record.exit_times if t is not None)


def metrics_of(record: RunRecord) -> RunMetrics:
    arrivals = sorted(t for t in record.arrival_times if t is not None)
    # coincident arrivals (same step) are possible; keep throughput defined
    tp = None
    if len(arrivals) >= 2 and arrivals[-1] > arrivals[0]:
        tp = (len(arrivals) - 1) / (arrivals[-1] - arrivals[0])
    if record.completed:
        return RunMetrics(tp, reaching_time(record),
                          avg_leaving_time(record), total_time(record), True,
                          record.mean_nn_dist, record.mean_speed,
                          record.overlap_events)
    leave = None
    try:
        leave = avg_leaving_time(record, allow_partial=True)
    except ValueError:
        pass
    return RunMetrics(tp, None, leave, None, False, record.mean_nn_dist,
                      record.mean_speed, record.overlap_events)


def hex_packing_bound(params: BoundParams) -> float:
    """Least asymptotic throughput of the hexagonally packed corridor."""
    if params.d <= 0:
        raise ValueError("spacing d must be positive")
    v, s, d, theta = params.v, params.s, params.d, params.theta
    return (4.0 * v * s / (SQRT3 * d * d)
            - 2.0 * v * math.cos(theta - math.pi / 6) / (SQRT3 * d))


def touch_and_run_bound(params: BoundParams) -> float:
    """Asymptotic throughput K*v / max(d, d') of the curved-lane strategy.

    d' is the arc-plus-segments path length one lane consumes per robot; its
    two branches meet where twice the turning circle's chord equals d.
    """
    k = params.k_lanes
    if k not in ALLOWED_LANE_COUNTS:
        raise ValueError(f"lane count must be one of {ALLOWED_LANE_COUNTS}")
    v, s, d = params.v, params.s, params.d
    alpha = 2.0 * math.pi / k
    r = compute_turning_radius(s, d, alpha)
    if r > 0 and 2.0 * r * math.cos(alpha / 2.0) >= d:
        d_prime = 2.0 * r * math.asin(d / (2.0 * r))
    else:
        d_prime = (r * (math.pi - alpha)
                   + (d - 2.0 * r * math.cos(alpha / 2.0)) / math.sin(alpha / 2.0))
    return k * v / max(d, d_prime)


_METRIC_FIELDS = ("throughput", "reaching_time", "avg_leaving_time",
                  "total_time")


def summarize(runs: List[RunMetrics]) -> Dict[str, object]:
    """Per-metric mean/std/99% CI half-width over completed runs, plus the
    failure fraction."""
    if not runs:
        raise ValueError("nothing to summarize")
    completed = [r for r in runs if r.completed]
    out: Dict[str, object] = {
        "n_runs": len(runs),
        "n_completed": len(completed),
        "failure_fraction": (len(runs) - len(completed)) / len(runs),
    }
    for name in _METRIC_FIELDS:
        values = [getattr(r, name) for r in completed]
        values = [v for v in values if v is not None]
        if not values:
            out[name] = None
            continue
        m = mean(values)
        sd = stdev(values) if len(values) > 1 else 0.0
        half = Z_99 * sd / math.sqrt(len(values)) if len(values) > 1 else 0.0
        out[name] = {"mean": m, "std": sd, "ci99_half_width": half}
    return out

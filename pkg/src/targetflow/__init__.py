"""Deterministic 2D multi-robot congestion-control simulation.

Two decentralized policies for swarms converging on a common circular
target: a single-queue corridor former and a lane-based touch-and-run
vector-field follower, plus the analytic throughput bounds they are
benchmarked against.
"""

from .engine import (BaselinePolicy, Kinematics, RunRecord, Scenario,
                     SqfPolicy, TrvfPolicy, run_simulation, spawn_scenario)
from .fields import FieldParams
from .geometry import Pose, Vec2
from .guidance import GuidanceParams
from .metrics import (BoundParams, RunMetrics, hex_packing_bound, metrics_of,
                      summarize, throughput, touch_and_run_bound)

__all__ = [
    "BaselinePolicy", "BoundParams", "FieldParams", "GuidanceParams",
    "Kinematics", "Pose", "RunMetrics", "RunRecord", "Scenario", "SqfPolicy",
    "TrvfPolicy", "Vec2", "hex_packing_bound", "metrics_of", "run_simulation",
    "spawn_scenario", "summarize", "throughput", "touch_and_run_bound",
]

__version__ = "0.1.0"

"""Deterministic simulation engine.

Scenario generation, grid-accelerated neighbor sensing, holonomic and
unicycle stepping, and the synchronous main loop.  Every robot reads the
previous step's position snapshot and robots update in fixed id order, so a
run is a pure function of (scenario, policy, parameters).
"""

import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, TextIO, Tuple

import numpy as np

from .fields import FieldParams, attractive_force, repulsive_force
from .geometry import Pose, Vec2, heading_of, normalize_angle
from .guidance import GuidanceParams
from .sqf import SqfState, sqf_step
from .trvf import ALLOWED_LANE_COUNTS, TrvfState, trvf_step

SPAWN_RHO_MIN = 13.0
SPAWN_RHO_MAX = 21.0
ROBOT_RADIUS = 0.22

Target = Tuple[Vec2, float]


class Kinematics(Enum):
    HOLONOMIC = "holo"
    UNICYCLE = "nonholo"


@dataclass(frozen=True)
class Scenario:
    targets: List[Target]          # common target first
    d_work: float
    n_robots: int
    robot_radius: float
    kinematics: Kinematics
    seed: int
    dt: float
    timeout: float
    next_sides: Tuple[int, ...]    # +1 right / -1 left per robot

    def __post_init__(self):
        if self.dt <= 0 or self.timeout <= 0:
            raise ValueError("dt and timeout must be positive")
        for _, radius in self.targets:
            if self.d_work <= radius:
                raise ValueError("working radius must exceed target radii")

    def robot_targets(self, robot_id: int) -> List[Target]:
        """Per-robot target list: common target, then the far next goal."""
        o, s = self.targets[0]
        x_far = 2.0 * self.d_work + SPAWN_RHO_MAX
        side = self.next_sides[robot_id]
        return [(o, s), (Vec2(o.x + side * x_far, o.y), s)]


def spawn_scenario(seed: int, n_robots: int, s: float, d_work: float,
                   kinematics: Kinematics, dt: float = 0.1,
                   timeout: float = 3600.0) -> Tuple[Scenario, List[Pose]]:
    """Sample non-overlapping start poses on the annulus around the target.

    Radii are drawn uniformly in [13, 21] m and angles uniformly in [0, 2pi);
    a candidate overlapping an already placed robot is resampled, with a
    bounded total number of attempts.
    """
    if n_robots < 1:
        raise ValueError("need at least one robot")
    rng = random.Random(seed)
    origin = Vec2(0.0, 0.0)
    poses: List[Pose] = []
    sides: List[int] = []
    placed: List[Tuple[float, float]] = []
    min_sep = 2.0 * ROBOT_RADIUS
    budget = 1000 * n_robots
    for _ in range(n_robots):
        while True:
            if budget <= 0:
                raise ValueError(
                    f"could not place {n_robots} robots without overlap")
            budget -= 1
            theta = rng.uniform(0.0, 2.0 * math.pi)
            rho = rng.uniform(SPAWN_RHO_MIN, SPAWN_RHO_MAX)
            x, y = rho * math.cos(theta), rho * math.sin(theta)
            if all(math.hypot(x - px, y - py) >= min_sep for px, py in placed):
                break
        placed.append((x, y))
        heading = normalize_angle(rng.uniform(-math.pi, math.pi))
        poses.append(Pose(Vec2(x, y), heading))
        sides.append(1 if rng.random() < 0.5 else -1)
    scenario = Scenario(targets=[(origin, s)], d_work=d_work,
                        n_robots=n_robots, robot_radius=ROBOT_RADIUS,
                        kinematics=kinematics, seed=seed, dt=dt,
                        timeout=timeout, next_sides=tuple(sides))
    return scenario, poses


class SpatialGrid:
    """Uniform hash grid for neighbor queries.

    Cell size must be at least the largest query radius so a 3x3 cell
    neighborhood always covers the query disc.
    """

    def __init__(self, cell_size: float):
        if cell_size <= 0:
            raise ValueError("cell size must be positive")
        self.cell_size = cell_size
        self.cells: Dict[Tuple[int, int], List[int]] = {}
        self.positions: List[Vec2] = []

    def rebuild(self, positions: List[Vec2]):
        self.positions = positions
        cells: Dict[Tuple[int, int], List[int]] = {}
        inv = 1.0 / self.cell_size
        for i, p in enumerate(positions):
            key = (int(math.floor(p.x * inv)), int(math.floor(p.y * inv)))
            bucket = cells.get(key)
            if bucket is None:
                cells[key] = [i]
            else:
                bucket.append(i)
        self.cells = cells

    def neighbors_within(self, p: Vec2, radius: float,
                         exclude: int = -1) -> List[Vec2]:
        """Positions strictly closer than `radius` to p, excluding one id."""
        if radius > self.cell_size:
            raise ValueError("query radius exceeds the grid cell size")
        inv = 1.0 / self.cell_size
        cx = int(math.floor(p.x * inv))
        cy = int(math.floor(p.y * inv))
        out: List[Vec2] = []
        cells = self.cells
        positions = self.positions
        r2 = radius * radius
        for gx in (cx - 1, cx, cx + 1):
            for gy in (cy - 1, cy, cy + 1):
                bucket = cells.get((gx, gy))
                if not bucket:
                    continue
                for i in bucket:
                    if i == exclude:
                        continue
                    q = positions[i]
                    dx = q.x - p.x
                    dy = q.y - p.y
                    if dx * dx + dy * dy < r2:
                        out.append(q)
        return out


def sense_neighbors(robot_id: int, grid: SpatialGrid,
                    influence: float) -> List[Vec2]:
    if influence <= 0:
        raise ValueError("influence radius must be positive")
    return grid.neighbors_within(grid.positions[robot_id], influence,
                                 exclude=robot_id)


def step_holonomic(pose: Pose, force: Vec2, v_max: float, dt: float) -> Pose:
    """Move along the force direction at speed min(v_max, |force|)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    mag = force.norm()
    if mag == 0.0:
        return pose
    speed = min(v_max, mag)
    scale = speed * dt / mag
    p = pose.position
    return Pose(Vec2(p.x + force.x * scale, p.y + force.y * scale),
                heading_of(force))


def step_unicycle(pose: Pose, force: Vec2, v_max: float, k_r: float,
                  dt: float) -> Pose:
    """Forward-Euler unicycle: proportional turn toward the force heading,
    forward speed clamped by the heading error's cosine (never reversing)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    mag = force.norm()
    if mag == 0.0:
        return pose
    xi = pose.heading
    dxi = normalize_angle(heading_of(force) - xi)
    omega = k_r * dxi
    v = min(v_max, mag) * max(0.0, math.cos(dxi))
    p = pose.position
    return Pose(Vec2(p.x + v * math.cos(xi) * dt, p.y + v * math.sin(xi) * dt),
                normalize_angle(xi + omega * dt))


class SqfPolicy:
    name = "sqf"

    def __init__(self, d_work: float, fparams: FieldParams):
        self.d_work = d_work
        self.fparams = fparams

    def initial_state(self):
        return SqfState()

    def step(self, state, pose: Pose, targets: List[Target]):
        return sqf_step(state, pose.position, targets, self.d_work,
                        self.fparams)


class TrvfPolicy:
    name = "trvf"

    def __init__(self, d_work: float, k_lanes: int, fparams: FieldParams,
                 gparams: GuidanceParams):
        if k_lanes not in ALLOWED_LANE_COUNTS:
            raise ValueError(f"lane count must be one of {ALLOWED_LANE_COUNTS}")
        self.d_work = d_work
        self.k_lanes = k_lanes
        self.fparams = fparams
        self.gparams = gparams

    def initial_state(self):
        return TrvfState()

    def step(self, state, pose: Pose, targets: List[Target]):
        force, new_state = trvf_step(state, pose, targets, self.d_work,
                                     self.k_lanes, self.fparams, self.gparams)
        return force, self.fparams.i_default, new_state


class BaselinePolicy:
    """Attraction-only reference policy: no congestion control at all.

    The pull is a unit vector toward the goal (head there at v_max), so the
    only thing shaping the crowd is the shared neighbor repulsion.
    """

    name = "baseline"

    def __init__(self, fparams: FieldParams, k_att: float = 1.0):
        self.fparams = fparams
        self.k_att = k_att

    def initial_state(self):
        return 0  # current target index

    def step(self, state: int, pose: Pose, targets: List[Target]):
        j = state
        p = pose.position
        if j < len(targets):
            o, s = targets[j]
            if math.hypot(p.x - o.x, p.y - o.y) <= s:
                j += 1
        if j >= len(targets):
            return Vec2(0.0, 0.0), self.fparams.i_default, j
        o, _s = targets[j]
        force = attractive_force(p, o, self.k_att)
        return force, self.fparams.i_default, j


@dataclass
class RobotBody:
    id: int
    pose: Pose
    policy_state: object
    targets: List[Target]
    arrival_time: Optional[float] = None
    exit_time: Optional[float] = None

    @property
    def done(self) -> bool:
        return self.exit_time is not None


@dataclass
class RunRecord:
    n_robots: int
    arrival_times: List[Optional[float]]
    exit_times: List[Optional[float]]
    completed: bool
    steps: int
    sim_time: float
    mean_nn_dist: float
    mean_speed: float
    overlap_events: int


def run_simulation(scenario: Scenario, policy, fparams: FieldParams,
                   trace_out: Optional[TextIO] = None) -> RunRecord:
    """Run one deterministic simulation to completion or timeout.

    Arrival is the first step a robot's centre is within the target radius;
    exit is the first later step it is beyond the working radius.  Mean
    nearest-neighbor distance and mean realized speed are accumulated over
    robot-steps spent inside the working disc, where the throughput bounds
    apply.
    """
    # poses (and next-target sides) are re-derived from the seed so the run
    # depends on nothing but the scenario values themselves
    scen, poses = spawn_scenario(scenario.seed, scenario.n_robots,
                                 scenario.targets[0][1], scenario.d_work,
                                 scenario.kinematics, scenario.dt,
                                 scenario.timeout)
    robots = [RobotBody(i, poses[i], policy.initial_state(),
                        scen.robot_targets(i)) for i in range(scen.n_robots)]
    o0, s0 = scen.targets[0]
    d_work = scen.d_work
    dt = scen.dt
    n = scen.n_robots
    grid = SpatialGrid(fparams.i_default)
    unicycle = scen.kinematics is Kinematics.UNICYCLE
    gparams = getattr(policy, "gparams", None) or GuidanceParams(
        i_default=fparams.i_default)
    v_max = gparams.v_max
    k_r = gparams.k_r
    overlap_threshold = 2.0 * scen.robot_radius

    nn_sum = 0.0
    nn_count = 0
    speed_sum = 0.0
    speed_count = 0
    overlap_events = 0
    max_steps = int(math.ceil(scen.timeout / dt))
    step_idx = 0

    for step_idx in range(1, max_steps + 1):
        snapshot = [rb.pose.position for rb in robots]
        grid.rebuild(snapshot)

        xs = np.fromiter((p.x for p in snapshot), dtype=float, count=n)
        ys = np.fromiter((p.y for p in snapshot), dtype=float, count=n)
        inside = (xs - o0.x) ** 2 + (ys - o0.y) ** 2 <= d_work * d_work
        if n > 1:
            dx = xs[:, None] - xs[None, :]
            dy = ys[:, None] - ys[None, :]
            dist = np.sqrt(dx * dx + dy * dy)
            np.fill_diagonal(dist, np.inf)
            nn = dist.min(axis=1)
            if inside.any():
                nn_sum += float(nn[inside].sum())
                nn_count += int(inside.sum())
            overlap_events += int(
                np.count_nonzero(dist < overlap_threshold) // 2)

        for i, rb in enumerate(robots):
            force, influence, rb.policy_state = policy.step(
                rb.policy_state, rb.pose, rb.targets)
            neighbors = grid.neighbors_within(snapshot[i], influence,
                                              exclude=i)
            if neighbors:
                rep = repulsive_force(snapshot[i], neighbors, influence,
                                      fparams.k_rep)
                force = Vec2(force.x + rep.x, force.y + rep.y)
            if not (math.isfinite(force.x) and math.isfinite(force.y)):
                raise RuntimeError(
                    f"non-finite force for robot {i} at step {step_idx}")
            if unicycle:
                new_pose = step_unicycle(rb.pose, force, v_max, k_r, dt)
            else:
                new_pose = step_holonomic(rb.pose, force, v_max, dt)
            if inside[i]:
                moved = math.hypot(new_pose.position.x - snapshot[i].x,
                                   new_pose.position.y - snapshot[i].y)
                speed_sum += moved / dt
                speed_count += 1
            rb.pose = new_pose

        now = step_idx * dt
        all_done = True
        for rb in robots:
            p = rb.pose.position
            d_to_target = math.hypot(p.x - o0.x, p.y - o0.y)
            if rb.arrival_time is None:
                if d_to_target <= s0:
                    rb.arrival_time = now
            elif rb.exit_time is None and d_to_target > d_work:
                rb.exit_time = now
            if not rb.done:
                all_done = False

        if trace_out is not None:
            for rb in robots:
                mode = getattr(rb.policy_state, "mode", rb.policy_state)
                mode_name = getattr(mode, "value", mode)
                trace_out.write(
                    f"{step_idx},{rb.id},{rb.pose.position.x:.6f},"
                    f"{rb.pose.position.y:.6f},{rb.pose.heading:.6f},"
                    f"{mode_name}\n")

        if all_done:
            break

    completed = all(rb.done for rb in robots)
    return RunRecord(
        n_robots=n,
        arrival_times=[rb.arrival_time for rb in robots],
        exit_times=[rb.exit_time for rb in robots],
        completed=completed,
        steps=step_idx,
        sim_time=step_idx * dt,
        mean_nn_dist=nn_sum / nn_count if nn_count else float("nan"),
        mean_speed=speed_sum / speed_count if speed_count else float("nan"),
        overlap_events=overlap_events,
    )

import io
import math
import random

import pytest

from targetflow.engine import Kinematics, TrvfPolicy, run_simulation, spawn_scenario
from targetflow.fields import FieldParams
from targetflow.geometry import Pose, Vec2
from targetflow.guidance import GuidanceParams
from targetflow.trvf import (ALLOWED_LANE_COUNTS, TrvfMode, TrvfState,
                             _renormalized, compute_lane, compute_sector,
                             compute_turning_radius, trvf_step)

FP = FieldParams()
GP = GuidanceParams()
D = 13.0
TARGETS = [(Vec2(0, 0), 3.0), (Vec2(47, 0), 3.0)]


def test_sector_examples():
    o = Vec2(0, 0)
    assert compute_sector(Vec2(1, 1), o, 4) == 1
    assert compute_sector(Vec2(-1, 0), o, 4) == 3
    assert compute_sector(Vec2(0, -1), o, 4) == 4


def test_sector_rejects_bad_inputs():
    with pytest.raises(ValueError):
        compute_sector(Vec2(0, 0), Vec2(0, 0), 4)
    with pytest.raises(ValueError):
        compute_sector(Vec2(1, 0), Vec2(0, 0), 7)


@pytest.mark.parametrize("k", ALLOWED_LANE_COUNTS)
def test_sector_partition_is_uniform(k):
    rng = random.Random(k)
    counts = [0] * k
    n = 10_000
    for _ in range(n):
        a = rng.uniform(0.0, 2.0 * math.pi)
        sector = compute_sector(Vec2(math.cos(a), math.sin(a)), Vec2(0, 0), k)
        counts[sector - 1] += 1
    for count in counts:
        assert abs(count / n - 1.0 / k) < 0.02


def test_turning_radius_values():
    assert compute_turning_radius(3.0, 3.0, math.pi / 3) == 0.0
    assert compute_turning_radius(3.0, 3.0, math.pi / 2) == pytest.approx(
        2.12132, abs=1e-5)
    assert compute_turning_radius(3.0, 3.0, 2 * math.pi / 3) == pytest.approx(
        8.19615, abs=1e-5)


def test_turning_radius_errors():
    with pytest.raises(ValueError):
        compute_turning_radius(0.3, 3.0, math.pi / 2)  # r < 0: infeasible
    with pytest.raises(ValueError):
        compute_turning_radius(3.0, 3.0, 0.0)
    with pytest.raises(ValueError):
        compute_turning_radius(-1.0, 3.0, math.pi / 2)


def test_lane_geometry_k4_sector1():
    lane = compute_lane(Vec2(0, 0), 3.0, D, 3.0, 1, 4)
    assert lane.w1.x == pytest.approx(1.5, abs=1e-4)
    assert lane.w1.y == pytest.approx(13.0, abs=1e-4)
    assert lane.w2.x == pytest.approx(1.5, abs=1e-4)
    assert lane.w2.y == pytest.approx(3.62132, abs=1e-4)
    assert lane.w3.x == pytest.approx(3.62132, abs=1e-4)
    assert lane.w3.y == pytest.approx(-1.5, abs=1e-4)
    assert lane.w4.x == pytest.approx(13.0, abs=1e-4)
    assert lane.w4.y == pytest.approx(-1.5, abs=1e-4)
    assert lane.turn_centre.x == pytest.approx(3.62132, abs=1e-4)
    assert lane.turn_centre.y == pytest.approx(3.62132, abs=1e-4)


@pytest.mark.parametrize("k", (3, 4, 5))
@pytest.mark.parametrize("sector", (1, 2, 3))
def test_lane_geometry_invariants(k, sector):
    o = Vec2(2.0, -1.0)
    lane = compute_lane(o, 3.0, D, 3.0, sector, k)
    # turning circle tangent to the target circle
    assert abs((lane.turn_centre - o).norm() - lane.turn_radius - 3.0) < 1e-9
    # w2 and w3 both sit at radius d_r
    assert (lane.w2 - o).norm() == pytest.approx((lane.w3 - o).norm())
    # the outer waypoints project onto their rays at distance D
    half_i = 3.0 / 2.0
    alpha = 2.0 * math.pi / k
    for w, angle in ((lane.w1, lane.sector * alpha),
                     (lane.w4, (lane.sector - 1) * alpha)):
        offset = Vec2(half_i * math.sin(angle), -half_i * math.cos(angle))
        assert (w - o - offset).norm() == pytest.approx(D)


def test_blend_renormalization_example():
    k = 2.5
    f1 = Vec2(0.0, k)
    f2 = Vec2(-1.5 * k, 0.0)
    out = _renormalized(f1.x + f2.x, f1.y + f2.y, k)
    assert out.x == pytest.approx(k * -0.83205, abs=1e-5)
    assert out.y == pytest.approx(k * 0.55470, abs=1e-5)
    assert out.norm() == pytest.approx(k)


def test_step_needs_two_targets():
    with pytest.raises(ValueError):
        trvf_step(TrvfState(), Pose(Vec2(20, 0), 0.0), TARGETS[:1], D, 4, FP, GP)


def test_exhausted_index_is_terminal():
    state = TrvfState(mode=TrvfMode.GOING_TO_TARGET, target_index=2)
    force, new = trvf_step(state, Pose(Vec2(50, 0), 0.0), TARGETS, D, 4, FP, GP)
    assert (force.x, force.y) == (0.0, 0.0)
    assert new == state


def test_crossing_working_circle_enters_entrance_state():
    force, state = trvf_step(TrvfState(), Pose(Vec2(12.0, 0.1), math.pi),
                             TARGETS, D, 4, FP, GP)
    assert state.mode is TrvfMode.GOING_TO_ENTRANCE_STRAIGHT
    assert state.lane is not None
    assert force.norm() == pytest.approx(FP.k_trvf)


def test_far_robot_attracted_at_fixed_magnitude():
    force, state = trvf_step(TrvfState(), Pose(Vec2(20.0, 0.0), 0.0),
                             TARGETS, D, 4, FP, GP)
    assert state.mode is TrvfMode.GOING_TO_TARGET
    assert force.x == pytest.approx(-FP.k_trvf)
    assert force.y == pytest.approx(0.0)


def _trace_single_robot(k_lanes: int, seed: int = 0):
    scenario, _ = spawn_scenario(seed, 1, 3.0, D, Kinematics.HOLONOMIC)
    policy = TrvfPolicy(D, k_lanes, FP, GP)
    buf = io.StringIO()
    record = run_simulation(scenario, policy, FP, trace_out=buf)
    points = []
    for line in buf.getvalue().splitlines():
        parts = line.split(",")
        points.append((int(parts[0]), float(parts[2]), float(parts[3])))
    return record, points


@pytest.mark.parametrize("k", ALLOWED_LANE_COUNTS)
def test_single_robot_end_to_end(k):
    record, points = _trace_single_robot(k)
    assert record.completed
    closest = min(math.hypot(x, y) for _, x, y in points)
    assert closest <= 3.0 + 0.05
    exit_step = round(record.exit_times[0] / 0.1)
    for step, x, y in points:
        if step > exit_step:
            # never back inside the departed target's working disc
            assert math.hypot(x, y) >= D - 1e-6


def test_lane_immutable_within_target_index():
    scenario, poses = spawn_scenario(1, 1, 3.0, D, Kinematics.HOLONOMIC)
    pose = poses[0]
    state = TrvfState()
    targets = scenario.robot_targets(0)
    seen = None
    from targetflow.engine import step_holonomic
    for _ in range(3000):
        force, state = trvf_step(state, pose, targets, D, 4, FP, GP)
        if state.target_index != 0:
            break
        if state.lane is not None:
            if seen is None:
                seen = state.lane
            else:
                assert state.lane is seen
        pose = step_holonomic(pose, force, GP.v_max, 0.1)
    assert seen is not None


def test_forces_have_policy_magnitude_or_zero():
    scenario, poses = spawn_scenario(2, 1, 3.0, D, Kinematics.HOLONOMIC)
    pose = poses[0]
    state = TrvfState()
    targets = scenario.robot_targets(0)
    from targetflow.engine import step_holonomic
    for _ in range(3000):
        force, state = trvf_step(state, pose, targets, D, 4, FP, GP)
        n = force.norm()
        assert n == pytest.approx(FP.k_trvf) or n == 0.0
        if state.target_index >= len(targets):
            break
        if n > 0.0:
            pose = step_holonomic(pose, force, GP.v_max, 0.1)

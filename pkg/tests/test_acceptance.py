"""End-to-end acceptance checks.

Each test prints a single PASS/FAIL line for its criterion so the suite
output doubles as a checklist.  The K-comparison check is advisory: it
prints its outcome but never fails the build.
"""

import io
import math
import random

import pytest

from targetflow.engine import (BaselinePolicy, Kinematics, SpatialGrid,
                               SqfPolicy, TrvfPolicy, run_simulation,
                               spawn_scenario)
from targetflow.fields import (FieldParams, repulsive_force,
                               sqf_entry_rotational, sqf_exit_rotational,
                               target_disc_repulsion)
from targetflow.geometry import Pose, Vec2, cross2
from targetflow.guidance import (GuidanceParams, orbit_path_following,
                                 straight_path_following)
from targetflow.harness import parse_config, render_bounds_csv, run_batch
from targetflow.metrics import (BoundParams, hex_packing_bound, metrics_of,
                                touch_and_run_bound)
from targetflow.trvf import compute_lane, compute_turning_radius

FP = FieldParams()
GP = GuidanceParams()
D = 13.0

_run_cache = {}


def cached_run(policy_name, n, s, kinematics, seed, timeout=3600.0,
               lanes=4):
    key = (policy_name, n, s, kinematics, seed, timeout, lanes)
    if key not in _run_cache:
        scenario, _ = spawn_scenario(seed, n, s, D, kinematics,
                                     timeout=timeout)
        if policy_name == "sqf":
            policy = SqfPolicy(D, FP)
        elif policy_name == "trvf":
            policy = TrvfPolicy(D, lanes, FP, GP)
        else:
            policy = BaselinePolicy(FP)
        _run_cache[key] = run_simulation(scenario, policy, FP)
    return _run_cache[key]


def report(ok: bool, name: str, detail: str = ""):
    tag = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"{tag}: {name}{suffix}")
    assert ok, f"{name}{suffix}"


def test_bound_oracle_reference_values():
    rows = [line.split(",")
            for line in render_bounds_csv().strip().splitlines()[1:]]
    got = {int(r[1]): float(r[6]) for r in rows if r[0] == "touch_and_run"}
    expected = {3: 0.994, 4: 1.200, 5: 1.099, 6: 1.000}
    ok = all(abs(got[k] - v) <= 0.001 for k, v in expected.items())
    report(ok, "touch-and-run bound table matches reference values",
           ", ".join(f"K={k}: {got[k]:.4f}" for k in sorted(got)))


def test_degenerate_turning_radius():
    r = compute_turning_radius(3.0, 3.0, math.pi / 3)
    report(r == 0.0, "turning radius degenerates to exactly 0 at K=6",
           f"r={r!r}")


def test_hexagonal_bound_value():
    value = hex_packing_bound(BoundParams(v=1, s=3, d=3, theta=math.pi / 6))
    report(abs(value - 0.38490) <= 1e-4, "hexagonal packing bound value",
           f"{value:.6f}")


def test_waypoint_geometry():
    lane = compute_lane(Vec2(0, 0), 3.0, D, 3.0, 1, 4)
    ok = (abs(lane.w1.x - 1.5) <= 1e-4 and abs(lane.w1.y - 13.0) <= 1e-4
          and abs(lane.w2.x - 1.5) <= 1e-4
          and abs(lane.w2.y - 3.62132) <= 1e-4
          and abs(lane.turn_centre.x - 3.62132) <= 1e-4
          and abs(lane.turn_centre.y - 3.62132) <= 1e-4
          and abs(lane.turn_centre.norm() - lane.turn_radius - 3.0) <= 1e-9)
    report(ok, "K=4 lane waypoints and tangency",
           f"w2=({lane.w2.x:.5f}, {lane.w2.y:.5f})")


def test_bound_dominance():
    seeds = range(10)
    sqf_ok = 0
    trvf_ok = 0
    for seed in seeds:
        rec = cached_run("sqf", 40, 3.0, Kinematics.HOLONOMIC, seed)
        m = metrics_of(rec)
        bound = hex_packing_bound(BoundParams(v=m.mean_speed, s=3.0,
                                              d=m.mean_nn_dist))
        if m.throughput is not None and m.throughput <= bound:
            sqf_ok += 1
        rec = cached_run("trvf", 40, 3.0, Kinematics.HOLONOMIC, seed, lanes=5)
        m = metrics_of(rec)
        bound = touch_and_run_bound(BoundParams(v=m.mean_speed, s=3.0,
                                                d=m.mean_nn_dist, k_lanes=5))
        if m.throughput is not None and m.throughput <= bound:
            trvf_ok += 1
    ok = sqf_ok >= 9 and trvf_ok >= 9
    report(ok, "measured throughput below the analytic bounds",
           f"sqf {sqf_ok}/10, trvf(5) {trvf_ok}/10")


def test_small_target_robustness():
    sqf_done = 0
    base_failed = 0
    for seed in range(10):
        rec = cached_run("sqf", 30, 0.3, Kinematics.UNICYCLE, seed,
                         timeout=1200.0)
        if rec.completed:
            sqf_done += 1
        rec = cached_run("baseline", 30, 0.3, Kinematics.UNICYCLE, seed,
                         timeout=1200.0)
        if not rec.completed:
            base_failed += 1
    ok = sqf_done == 10 and base_failed >= 5
    report(ok, "small-target robustness (queue former vs plain attraction)",
           f"sqf completions {sqf_done}/10, baseline timeouts {base_failed}/10")


def test_batch_determinism():
    plan = parse_config("[sweep]\npolicies = sqf, trvf\nrobots = 2\n"
                        "[run]\nseeds = 2\n")
    outputs = []
    for _ in range(2):
        runs = io.StringIO()
        summary = io.StringIO()
        run_batch(plan, runs, summary)
        outputs.append((runs.getvalue(), summary.getvalue()))
    report(outputs[0] == outputs[1], "repeated batch runs are byte-identical")


def test_field_property_suite():
    rng = random.Random(99)
    failures = []

    # rotational-field perpendicularity (to floating-point rounding)
    for _ in range(1000):
        o = Vec2(rng.uniform(-5, 5), rng.uniform(-5, 5))
        p = Vec2(o.x + rng.uniform(-20, 20), o.y + rng.uniform(-20, 20))
        radial = p - o
        if radial.norm() < 1e-6:
            continue
        f = sqf_entry_rotational(p, o, 2.5)
        if abs(radial.dot(f)) > 4e-16 * radial.norm() * f.norm():
            failures.append("entry perpendicularity")
            break
    for _ in range(1000):
        o = Vec2(0.0, 0.0)
        side = rng.random() < 0.5
        cx = D if side else -D
        p = Vec2(rng.uniform(-30, 30), rng.uniform(-30, 30))
        radial = Vec2(p.x - cx, p.y)
        if radial.norm() < 1e-6:
            continue
        f = sqf_exit_rotational(p, o, D, side, 2.5)
        if abs(radial.dot(f)) > 4e-16 * radial.norm() * f.norm():
            failures.append("exit perpendicularity")
            break

    # straight-field on-path alignment; segment components are signed powers
    # of two so a point on the line has exactly zero cross-track offset
    for _ in range(1000):
        scale = float(2 ** rng.randrange(0, 5))
        dx, dy = rng.choice([(1, 0), (0, 1), (-1, 0), (0, -1),
                             (1, 1), (1, -1), (-1, 1), (-1, -1)])
        seg = Vec2(dx * scale, dy * scale)
        # integer endpoints and a dyadic fraction keep every intermediate
        # value exactly representable, so the cross-track offset is zero
        w_i = Vec2(float(rng.randrange(-10, 11)), float(rng.randrange(-10, 11)))
        w_f = Vec2(w_i.x + seg.x, w_i.y + seg.y)
        u = rng.randrange(0, 922) / 1024.0
        p = Vec2(w_i.x + seg.x * u, w_i.y + seg.y * u)
        heading = math.atan2(seg.y, seg.x)
        out = straight_path_following(2.5, Pose(p, heading), w_i, w_f, GP)
        if (abs(cross2(seg, out.force)) > 1e-9 * seg.norm()
                or seg.dot(out.force) <= 0):
            failures.append("on-path alignment")
            break

    # orbit tangency on exactly-on-circle points (integer Pythagorean triples)
    for _ in range(1000):
        m = rng.randrange(2, 40)
        n = rng.randrange(1, m)
        a, b = float(m * m - n * n), float(2 * m * n)
        radius = float(m * m + n * n)
        if rng.random() < 0.5:
            a, b = b, a
        if rng.random() < 0.5:
            a = -a
        if rng.random() < 0.5:
            b = -b
        c = Vec2(1.0, -2.0)
        q = Vec2(a, b)
        pos = Vec2(c.x + q.x, c.y + q.y)
        heading = math.atan2(q.x, q.y)
        w_f = Vec2(c.x - q.y, c.y + q.x)
        out = orbit_path_following(2.5, c, radius, Pose(pos, heading), w_f, GP)
        if (out.progress <= 0.0 or cross2(q, out.force) <= 0.0
                or abs(q.dot(out.force)) > 2e-15 * radius * 2.5):
            failures.append("orbit tangency")
            break

    # neighbor repulsion vanishes continuously at the influence radius;
    # the exact-boundary case uses axis-aligned offsets so the distance
    # equals the influence with no rounding
    for _ in range(1000):
        influence = rng.uniform(0.5, 5.0)
        dx, dy = rng.choice([(1, 0), (-1, 0), (0, 1), (0, -1)])
        at = Vec2(dx * influence, dy * influence)
        if repulsive_force(Vec2(0, 0), [at], influence, 0.5).norm() != 0.0:
            failures.append("repulsion boundary")
            break
        ang = rng.uniform(0, 2 * math.pi)
        d = influence - 1e-7
        near = Vec2(d * math.cos(ang), d * math.sin(ang))
        if repulsive_force(Vec2(0, 0), [near], influence, 0.5).norm() > 1e-5:
            failures.append("repulsion continuity")
            break

    # visited-disc repulsion vanishes continuously at twice the disc radius
    for _ in range(1000):
        dx, dy = rng.choice([(1, 0), (-1, 0), (0, 1), (0, -1)])
        edge = Vec2(dx * 2 * D, dy * 2 * D)
        if target_disc_repulsion(edge, Vec2(0, 0), D, 0.5).norm() != 0.0:
            failures.append("disc boundary")
            break
        ang = rng.uniform(0, 2 * math.pi)
        r = 2 * D - 1e-6
        near = Vec2(r * math.cos(ang), r * math.sin(ang))
        if target_disc_repulsion(near, Vec2(0, 0), D, 0.5).norm() > 1e-5:
            failures.append("disc continuity")
            break

    report(not failures, "field property suite (1000 configurations each)",
           "; ".join(failures))


def test_sensing_oracle():
    scenario, _ = spawn_scenario(4, 20, 3.0, D, Kinematics.HOLONOMIC)
    buf = io.StringIO()
    run_simulation(scenario, SqfPolicy(D, FP), FP, trace_out=buf)
    by_step = {}
    for line in buf.getvalue().splitlines():
        parts = line.split(",")
        by_step.setdefault(int(parts[0]), []).append(
            Vec2(float(parts[2]), float(parts[3])))
    grid = SpatialGrid(FP.i_default)
    steps_checked = 0
    mismatch = None
    for step in sorted(by_step):
        if steps_checked >= 500:
            break
        pts = by_step[step]
        grid.rebuild(pts)
        for i, p in enumerate(pts):
            for radius in (FP.i_min, 2.0, FP.i_default):
                got = sorted((q.x, q.y)
                             for q in grid.neighbors_within(p, radius, i))
                want = sorted(
                    (q.x, q.y) for j, q in enumerate(pts)
                    if j != i and math.hypot(q.x - p.x, q.y - p.y) < radius)
                if got != want:
                    mismatch = (step, i, radius)
        steps_checked += 1
    report(mismatch is None and steps_checked == 500,
           "grid sensing equals brute force over a 20-robot, 500-step run",
           f"checked {steps_checked} steps")


def test_directional_k_comparison_advisory():
    means = {}
    for k in (3, 5):
        values = []
        for seed in range(10):
            rec = cached_run("trvf", 60, 3.0, Kinematics.HOLONOMIC, seed,
                             lanes=k)
            m = metrics_of(rec)
            if m.throughput is not None:
                values.append(m.throughput)
        means[k] = sum(values) / len(values)
    ok = means[5] >= means[3]
    tag = "PASS" if ok else "ADVISORY"
    print(f"{tag}: five-lane throughput vs three-lane "
          f"(K=5 {means[5]:.4f}, K=3 {means[3]:.4f})"
          + ("" if ok else " -- seed-sensitive, not build-failing"))

"""Touch and Run Vector Fields policy.

The plane around the target is split into K angular lanes.  A robot commits
to the lane it first approaches, follows a straight entry segment, a turning
circle tangent to the target, and a straight exit segment, all via the
vector-field guidance functions.  Near the target the orbit force is blended
with a stronger attraction so neighbor repulsion cannot eject the robot from
the curve.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

from .fields import FieldParams, attractive_force, target_disc_repulsion
from .geometry import Pose, Vec2, heading_of
from .guidance import GuidanceParams, orbit_path_following, straight_path_following

TWO_PI = 2.0 * math.pi
ALLOWED_LANE_COUNTS = (3, 4, 5, 6)


class TrvfMode(Enum):
    GOING_TO_TARGET = "going_to_target"
    GOING_TO_ENTRANCE_STRAIGHT = "going_to_entrance_straight"
    ON_ENTRANCE_STRAIGHT = "on_entrance_straight"
    ON_ENTRANCE_CURVED = "on_entrance_curved"
    ON_EXIT_CURVED = "on_exit_curved"
    ON_EXIT_STRAIGHT = "on_exit_straight"


@dataclass(frozen=True)
class LaneGeometry:
    sector: int
    w1: Vec2
    w2: Vec2
    w3: Vec2
    w4: Vec2
    turn_centre: Vec2
    turn_radius: float


@dataclass(frozen=True)
class TrvfState:
    mode: TrvfMode = TrvfMode.GOING_TO_TARGET
    target_index: int = 0
    lane: Optional[LaneGeometry] = None
    lane_index: int = -1  # target index the lane was computed for


Target = Tuple[Vec2, float]


def compute_sector(p: Vec2, o: Vec2, k_lanes: int) -> int:
    """Lane index in 1..K from the angular position of p about o."""
    if k_lanes not in ALLOWED_LANE_COUNTS:
        raise ValueError(f"lane count must be one of {ALLOWED_LANE_COUNTS}")
    eta = heading_of(p - o)
    if eta < 0.0:
        eta += TWO_PI
    alpha = TWO_PI / k_lanes
    sector = int(eta // alpha) + 1
    return min(sector, k_lanes)


def compute_turning_radius(s: float, i_default: float, alpha: float) -> float:
    """Radius of the arc tangent to the target circle inside one lane.

    Zero is legal (the arc degenerates to a point); a negative result means
    the lane geometry is infeasible for these radii.
    """
    if not (0 < alpha < math.pi):
        raise ValueError("lane angle must be in (0, pi)")
    if s <= 0 or i_default <= 0:
        raise ValueError("radii must be positive")
    half = math.sin(alpha / 2.0)
    r = (s * half - i_default / 2.0) / (1.0 - half)
    if r < -1e-12:
        raise ValueError(
            f"infeasible lane geometry: s={s}, i_default={i_default}, "
            f"alpha={alpha} give turning radius {r}")
    return max(r, 0.0)


def compute_lane(o: Vec2, s: float, d_work: float, i_default: float,
                 sector: int, k_lanes: int) -> LaneGeometry:
    """Waypoints and turning circle for one lane.

    The entering ray has angle sector*alpha, the exiting ray (sector-1)*alpha;
    both waypoint pairs are shifted half an influence radius to the inside of
    their ray so opposing traffic in adjacent lanes stays separated.
    """
    if d_work <= s:
        raise ValueError("working radius must exceed the target radius")
    alpha = TWO_PI / k_lanes
    r = compute_turning_radius(s, i_default, alpha)
    d_r = math.sqrt((r + s) ** 2 - (r + i_default / 2.0) ** 2)
    half_i = i_default / 2.0

    def on_ray(angle: float, radial: float) -> Vec2:
        c, sn = math.cos(angle), math.sin(angle)
        return Vec2(o.x + radial * c + half_i * sn,
                    o.y + radial * sn - half_i * c)

    a_in = sector * alpha
    a_out = (sector - 1) * alpha
    w1 = on_ray(a_in, d_work)
    w2 = on_ray(a_in, d_r)
    w3 = on_ray(a_out, d_r)
    w4 = on_ray(a_out, d_work)
    mid = (sector - 0.5) * alpha
    centre = Vec2(o.x + (r + s) * math.cos(mid), o.y + (r + s) * math.sin(mid))
    return LaneGeometry(sector, w1, w2, w3, w4, centre, r)


def _renormalized(fx: float, fy: float, k: float) -> Vec2:
    n = math.hypot(fx, fy)
    if n == 0.0:
        raise ValueError("cannot renormalize a zero force sum")
    return Vec2(k * fx / n, k * fy / n)


def trvf_step(state: TrvfState, pose: Pose, targets: List[Target],
              d_work: float, k_lanes: int, fparams: FieldParams,
              gparams: GuidanceParams) -> Tuple[Vec2, TrvfState]:
    """One control update: returns (force, new state).

    State transitions fall through within a single call, mirroring how the
    checks are chained: a robot crossing the working circle picks up the
    entrance orbit force on the same update.
    """
    if len(targets) < 2:
        raise ValueError("need at least two targets")
    j = state.target_index
    if j >= len(targets):
        return Vec2(0.0, 0.0), state

    k = fparams.k_trvf
    mode = state.mode
    lane = state.lane
    lane_index = state.lane_index
    o, s = targets[j]
    p = pose.position

    if mode is TrvfMode.GOING_TO_TARGET and lane_index != j:
        # lane committed once per target, from the first approach direction
        sector = compute_sector(p, o, k_lanes)
        lane = compute_lane(o, s, d_work, fparams.i_default, sector, k_lanes)
        lane_index = j

    def pack(force: Vec2, new_mode: TrvfMode) -> Tuple[Vec2, TrvfState]:
        return force, TrvfState(new_mode, j, lane, lane_index)

    if mode is TrvfMode.GOING_TO_TARGET:
        if math.hypot(p.x - o.x, p.y - o.y) <= d_work:
            mode = TrvfMode.GOING_TO_ENTRANCE_STRAIGHT
        else:
            att = (o - p).unit()
            fx, fy = k * att.x, k * att.y
            if j > 0:
                prev = targets[j - 1][0]
                # crowd repulsion can shove a departing robot back across the
                # working circle; the disc force is only defined outside it
                if math.hypot(p.x - prev.x, p.y - prev.y) > d_work:
                    rep = target_disc_repulsion(p, prev, d_work, fparams.k_rep)
                    fx += rep.x
                    fy += rep.y
            return pack(_renormalized(fx, fy, k), mode)

    if mode is TrvfMode.GOING_TO_ENTRANCE_STRAIGHT:
        force, t = orbit_path_following(k, o, d_work, pose, lane.w1, gparams)
        if t <= 0.0:
            mode = TrvfMode.ON_ENTRANCE_STRAIGHT
        else:
            return pack(force, mode)

    if mode is TrvfMode.ON_ENTRANCE_STRAIGHT:
        force, t = straight_path_following(k, pose, lane.w1, lane.w2, gparams)
        if t >= 1.0:
            mode = TrvfMode.ON_ENTRANCE_CURVED
        else:
            return pack(force, mode)

    if mode is TrvfMode.ON_ENTRANCE_CURVED:
        if math.hypot(p.x - o.x, p.y - o.y) <= s:
            j += 1
            mode = TrvfMode.ON_EXIT_CURVED
        elif lane.turn_radius == 0.0:
            # degenerate arc: the straight lanes already touch the target
            return pack(attractive_force(p, o, k), mode)
        else:
            f1, _t = orbit_path_following(k, lane.turn_centre,
                                          lane.turn_radius, pose, lane.w3,
                                          gparams)
            att = (o - p).unit()
            return pack(_renormalized(f1.x + 1.5 * k * att.x,
                                      f1.y + 1.5 * k * att.y, k), mode)

    if mode in (TrvfMode.ON_EXIT_CURVED, TrvfMode.ON_EXIT_STRAIGHT):
        o_prev = targets[j - 1][0]
        if math.hypot(p.x - o_prev.x, p.y - o_prev.y) > d_work:
            mode = TrvfMode.GOING_TO_TARGET
            o, s = targets[j]
            att = (o - p).unit()
            rep = target_disc_repulsion(p, o_prev, d_work, fparams.k_rep)
            return pack(_renormalized(k * att.x + rep.x, k * att.y + rep.y, k),
                        mode)
        if mode is TrvfMode.ON_EXIT_CURVED:
            if lane.turn_radius == 0.0:
                mode = TrvfMode.ON_EXIT_STRAIGHT
            else:
                f1, t = orbit_path_following(k, lane.turn_centre,
                                             lane.turn_radius, pose, lane.w3,
                                             gparams)
                if t > 0.0:
                    att = (lane.w3 - p).unit()
                    return pack(_renormalized(f1.x + 1.5 * k * att.x,
                                              f1.y + 1.5 * k * att.y, k),
                                mode)
                mode = TrvfMode.ON_EXIT_STRAIGHT
        force, _t = straight_path_following(k, pose, lane.w3, lane.w4, gparams)
        return pack(force, mode)

    raise AssertionError(f"unhandled mode {mode}")

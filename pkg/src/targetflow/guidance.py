"""Vector-field path following: straight segments and anti-clockwise orbits.

Both functions return a force of fixed magnitude plus a progress scalar.
Progress past the end of the segment (t >= 1) or past the orbit's exit ray
(t <= 0) yields the exact zero vector so callers can key state transitions
on it.

Fractional powers of negative bases are not real numbers; wherever that can
happen the power is computed, tested, and replaced by zero.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

from .geometry import Pose, Vec2, cross2

_XI_E = math.pi / 2  # entry heading for the straight-line field


@dataclass(frozen=True)
class GuidanceParams:
    k_s: float = 1.1
    k_o: float = 1.1
    k_r: float = 3.0
    v_max: float = 1.0
    i_default: float = 3.0

    def __post_init__(self):
        if self.k_s <= 1 or self.k_o <= 1:
            raise ValueError("exponentiation constants must exceed 1")
        if self.k_r <= 0 or self.v_max <= 0:
            raise ValueError("k_r and v_max must be positive")


class GuidanceOutput(NamedTuple):
    force: Vec2
    progress: float


def _guarded_pow(base: float, exp: float) -> float:
    # negative base with fractional exponent has no real value; use 0
    try:
        r = math.pow(base, exp)
    except ValueError:
        return 0.0
    return 0.0 if math.isnan(r) else r


def straight_path_following(k_force: float, pose: Pose, w_i: Vec2, w_f: Vec2,
                            params: GuidanceParams) -> GuidanceOutput:
    """Field that steers onto the segment w_i -> w_f and along it.

    The heading command relaxes from perpendicular approach (far from the
    line) to the segment heading, with a rate term proportional to the
    robot's current heading to keep the proportional turn controller stable.
    """
    wfi = w_f - w_i
    denom = wfi.norm_sq()
    if denom == 0.0:
        raise ValueError("degenerate segment: w_i == w_f")
    p = pose.position
    rel = p - w_i
    t = rel.dot(wfi) / denom
    if t >= 1.0:
        return GuidanceOutput(Vec2(0.0, 0.0), t)
    xi_f = math.atan2(wfi.y, wfi.x)
    eps = (rel - wfi * t).norm()
    rho = -1.0 if cross2(wfi, rel) < 0.0 else 1.0
    tau = params.i_default / 5.0
    if eps > tau:
        xi_c = xi_f - rho * _XI_E
    else:
        eps = rho * eps
        p1 = _guarded_pow(eps / tau, params.k_s)
        p2 = _guarded_pow(eps, params.k_s - 1.0)
        rate = params.k_s * _XI_E * params.v_max / (params.k_r * tau ** params.k_s)
        xi_c = xi_f - _XI_E * p1 - rate * p2 * math.sin(pose.heading)
    force = Vec2(k_force * math.cos(xi_c), k_force * math.sin(xi_c))
    return GuidanceOutput(force, t)


def orbit_path_following(k_force: float, c: Vec2, radius: float, pose: Pose,
                         w_f: Vec2, params: GuidanceParams) -> GuidanceOutput:
    """Anti-clockwise orbit of the given centre and radius, terminated at the
    ray from c through w_f.

    The internal angle gamma uses a swapped atan2 (clockwise-from-y-axis
    convention inherited from the orbit field's derivation); the returned
    force converts back with pi/2 - xi_c.
    """
    if radius <= 0.0:
        raise ValueError("orbit radius must be positive")
    exit_ray = w_f - c
    if exit_ray.x == 0.0 and exit_ray.y == 0.0:
        raise ValueError("exit waypoint coincides with the orbit centre")
    q = pose.position - c
    t = cross2(q, exit_ray)
    if t <= 0.0:
        return GuidanceOutput(Vec2(0.0, 0.0), t)
    nq = q.norm()
    if nq == 0.0:
        raise ValueError("robot at the orbit centre")
    gamma = math.atan2(q.x, q.y)
    xi = pose.heading
    if nq > 2.0 * radius:
        xi_c = gamma - 5.0 * math.pi / 6.0 + (params.v_max / nq) * math.sin(xi - gamma)
    else:
        p1 = _guarded_pow((nq - radius) / radius, params.k_o)
        p2 = _guarded_pow(nq - radius, params.k_o - 1.0)
        rate = params.k_o * params.v_max * math.pi / (3.0 * radius ** params.k_o * params.k_r)
        xi_c = (gamma - math.pi / 2.0
                - (math.pi / 3.0) * p1
                - (params.v_max / (params.k_r * nq)) * math.sin(xi - gamma)
                - rate * p2 * math.cos(xi - gamma))
    out = math.pi / 2.0 - xi_c
    force = Vec2(k_force * math.cos(out), k_force * math.sin(out))
    return GuidanceOutput(force, t)

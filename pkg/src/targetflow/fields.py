"""Artificial potential field primitives.

Attraction toward a goal, inverse-square inter-robot repulsion, the paired
rotational fields used to funnel robots into and out of the target corridor,
and the disc-shaped repulsion that keeps robots away from an already-visited
target region.
"""

import math
from dataclasses import dataclass
from typing import Iterable

from .geometry import Vec2


@dataclass(frozen=True)
class FieldParams:
    """Gains and influence radii for the potential fields."""

    k_rep: float = 0.5
    k_sqf: float = 2.5
    k_trvf: float = 2.5
    i_default: float = 3.0
    i_min: float = 1.0

    def __post_init__(self):
        if self.k_rep <= 0 or self.k_sqf <= 0 or self.k_trvf <= 0:
            raise ValueError("field gains must be positive")
        if not (0 < self.i_min < self.i_default):
            raise ValueError("need 0 < i_min < i_default")


def attractive_force(p: Vec2, goal: Vec2, k: float) -> Vec2:
    """Constant-magnitude pull of strength k from p toward goal."""
    dx = goal.x - p.x
    dy = goal.y - p.y
    d = math.hypot(dx, dy)
    if d == 0.0:
        raise ValueError("attraction undefined at the goal itself")
    return Vec2(k * dx / d, k * dy / d)


def repulsive_force(p: Vec2, neighbors: Iterable[Vec2], influence: float,
                    k_rep: float) -> Vec2:
    """Summed inverse-square repulsion from every neighbor closer than
    `influence`.  Each term points from the neighbor toward p; neighbors at
    or beyond the influence radius contribute nothing."""
    if influence <= 0:
        raise ValueError("influence radius must be positive")
    fx = 0.0
    fy = 0.0
    for q in neighbors:
        dx = q.x - p.x
        dy = q.y - p.y
        d = math.hypot(dx, dy)
        if d == 0.0:
            raise ValueError("coincident neighbor: repulsion is singular")
        if d < influence:
            m = -k_rep * (1.0 / d - 1.0 / influence) / (d * d * d)
            fx += m * dx
            fy += m * dy
    return Vec2(fx, fy)


def sqf_entry_rotational(p: Vec2, o: Vec2, k_sqf: float) -> Vec2:
    """Rotational field that circulates robots toward the corridor above the
    target: anti-clockwise on the right half-plane, clockwise on the left.
    The tie p.x == o.x goes to the right-hand field."""
    dx = p.x - o.x
    dy = p.y - o.y
    d = math.hypot(dx, dy)
    if d == 0.0:
        raise ValueError("rotational field undefined at the target centre")
    if dx >= 0.0:
        return Vec2(-k_sqf * dy / d, k_sqf * dx / d)
    return Vec2(k_sqf * dy / d, -k_sqf * dx / d)


def sqf_exit_rotational(p: Vec2, o: Vec2, d_work: float, next_is_right: bool,
                        k_sqf: float) -> Vec2:
    """Rotational field that carries a departing robot out of the working
    circle: anti-clockwise about Q = o + (D, 0) when the next goal is to the
    right, clockwise about P = o - (D, 0) otherwise."""
    if next_is_right:
        cx, cy = o.x + d_work, o.y
        dx = p.x - cx
        dy = p.y - cy
        d = math.hypot(dx, dy)
        if d == 0.0:
            raise ValueError("exit field undefined at its rotation centre")
        return Vec2(-k_sqf * dy / d, k_sqf * dx / d)
    cx, cy = o.x - d_work, o.y
    dx = p.x - cx
    dy = p.y - cy
    d = math.hypot(dx, dy)
    if d == 0.0:
        raise ValueError("exit field undefined at its rotation centre")
    return Vec2(k_sqf * dy / d, -k_sqf * dx / d)


def target_disc_repulsion(p: Vec2, o_prev: Vec2, d_work: float,
                          k_rep: float) -> Vec2:
    """Repulsion from the whole working disc of a previously visited target,
    treated as one large obstacle.  The influence range equals the disc
    radius, so the force vanishes beyond twice d_work from the centre."""
    dx = p.x - o_prev.x
    dy = p.y - o_prev.y
    dist = math.hypot(dx, dy)
    d = dist - d_work
    if d <= 0.0:
        raise ValueError("robot on or inside the avoided disc")
    if d >= d_work:
        return Vec2(0.0, 0.0)
    m = k_rep * (1.0 / d - 1.0 / d_work) / (d * d)
    return Vec2(m * dx / dist, m * dy / dist)

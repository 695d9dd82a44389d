"""Single Queue Former policy.

Robots circulate around the target under a rotational field until they enter
a vertical corridor above it, queue down the corridor under pure attraction,
and leave through a second rotational field centred beside the target.  The
repulsion influence radius shrinks inside the corridor so the queue can pack
tightly near small targets.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

from .fields import (FieldParams, attractive_force, sqf_entry_rotational,
                     sqf_exit_rotational)
from .geometry import Vec2


class SqfMode(Enum):
    GOING_TO_TARGET = "going_to_target"
    GOING_TO_CORRIDOR = "going_to_corridor"
    LEAVING_TARGET = "leaving_target"


@dataclass(frozen=True)
class SqfState:
    mode: SqfMode = SqfMode.GOING_TO_TARGET
    target_index: int = 0
    exit_right: bool = True


Target = Tuple[Vec2, float]


def sqf_step(state: SqfState, p: Vec2, targets: List[Target], d_work: float,
             params: FieldParams) -> Tuple[Vec2, float, SqfState]:
    """One control update: returns (force, influence radius, new state).

    A robot whose target list is exhausted is finished and receives zero
    force.
    """
    if not targets:
        raise ValueError("empty target list")
    j = state.target_index
    if j >= len(targets):
        return Vec2(0.0, 0.0), params.i_min, state

    mode = state.mode
    exit_right = state.exit_right
    o, s = targets[j]

    if math.hypot(p.x - o.x, p.y - o.y) <= s:
        mode = SqfMode.LEAVING_TARGET
        j += 1
        if j < len(targets):
            # side of the exit field follows the next goal's side; ties right
            exit_right = targets[j][0].x >= o.x
            o, s = targets[j]
        else:
            done = SqfState(mode, j, exit_right)
            return Vec2(0.0, 0.0), params.i_min, done

    if mode is not SqfMode.LEAVING_TARGET:
        dist = math.hypot(p.x - o.x, p.y - o.y)
        if dist <= d_work and (p.y < o.y or abs(p.x - o.x) > s):
            mode = SqfMode.GOING_TO_CORRIDOR
            force = sqf_entry_rotational(p, o, params.k_sqf)
        else:
            mode = SqfMode.GOING_TO_TARGET
            force = attractive_force(p, o, params.k_sqf)
    else:
        o_prev = targets[j - 1][0]
        if math.hypot(p.x - o_prev.x, p.y - o_prev.y) <= d_work:
            force = sqf_exit_rotational(p, o_prev, d_work, exit_right,
                                        params.k_sqf)
        else:
            mode = SqfMode.GOING_TO_TARGET
            force = attractive_force(p, o, params.k_sqf)

    if mode is SqfMode.GOING_TO_TARGET or mode is SqfMode.LEAVING_TARGET:
        influence = params.i_min
    elif p.y > o.y and abs(p.x - o.x) < params.i_default - params.i_min:
        influence = params.i_min + abs(p.x - o.x)
    else:
        influence = params.i_default

    return force, influence, SqfState(mode, j, exit_right)

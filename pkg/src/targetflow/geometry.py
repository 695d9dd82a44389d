"""Planar vector and angle primitives shared by the rest of the library.

Kept deliberately small: a `Vec2` value type, a `Pose` (position + heading)
and the handful of angle helpers the navigation code needs.  All angles are
radians in (-pi, pi].
"""

import math

TWO_PI = 2.0 * math.pi


class Vec2:
    """Immutable-by-convention 2D vector with finite components."""

    __slots__ = ("x", "y")

    def __init__(self, x: float, y: float):
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"Vec2 components must be finite, got ({x}, {y})")
        self.x = x
        self.y = y

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vec2) and self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.x, self.y))

    def __repr__(self):
        return f"Vec2({self.x}, {self.y})"

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def norm_sq(self) -> float:
        return self.x * self.x + self.y * self.y

    def unit(self) -> "Vec2":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return Vec2(self.x / n, self.y / n)

    def rotated(self, phi: float) -> "Vec2":
        c, s = math.cos(phi), math.sin(phi)
        return Vec2(c * self.x - s * self.y, s * self.x + c * self.y)


class Pose:
    """Position plus heading, heading normalized into (-pi, pi]."""

    __slots__ = ("position", "heading")

    def __init__(self, position: Vec2, heading: float):
        self.position = position
        self.heading = normalize_angle(heading)

    def __repr__(self):
        return f"Pose({self.position!r}, {self.heading})"


def normalize_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta}")
    wrapped = theta % TWO_PI  # [0, 2*pi)
    if wrapped > math.pi:
        wrapped -= TWO_PI
    return wrapped


def cross2(a: Vec2, b: Vec2) -> float:
    """z-component of the 3D cross product of two planar vectors."""
    return a.x * b.y - a.y * b.x


def heading_of(v: Vec2) -> float:
    """Angle of a non-zero vector with the +x axis, in (-pi, pi]."""
    if v.x == 0.0 and v.y == 0.0:
        raise ValueError("heading of the zero vector is undefined")
    return math.atan2(v.y, v.x)

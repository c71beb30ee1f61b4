"""3D geometry, trajectories and speed-limited motion."""
from __future__ import annotations

import bisect
import math
from collections import namedtuple
from dataclasses import dataclass
from typing import Sequence, Union

from uavfpg import InvalidTrajectoryError


class Vec3(namedtuple("_Vec3", "x y z")):
    """Position in meters. Components must be finite."""

    __slots__ = ()

    def __new__(cls, x, y, z):
        x, y, z = float(x), float(y), float(z)
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
            raise ValueError(f"non-finite Vec3 component: ({x}, {y}, {z})")
        return super().__new__(cls, x, y, z)

    def __add__(self, other):
        return Vec3(self.x + other[0], self.y + other[1], self.z + other[2])

    def __sub__(self, other):
        return Vec3(self.x - other[0], self.y - other[1], self.z - other[2])

    def scale(self, c: float) -> "Vec3":
        return Vec3(self.x * c, self.y * c, self.z * c)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def dist(self, other) -> float:
        return math.sqrt((self.x - other[0]) ** 2 + (self.y - other[1]) ** 2 + (self.z - other[2]) ** 2)

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.z]


def as_vec3(v) -> Vec3:
    if isinstance(v, Vec3):
        return v
    if len(v) != 3:
        raise ValueError(f"expected 3 components, got {len(v)}")
    return Vec3(*v)


@dataclass(frozen=True)
class WorldBounds:
    x_max: float = 1500.0
    y_max: float = 1500.0
    z_max: float = 600.0

    def __post_init__(self):
        if min(self.x_max, self.y_max, self.z_max) <= 0:
            raise ValueError("world bounds must be positive")

    def contains(self, p, eps: float = 1e-9) -> bool:
        return (-eps <= p[0] <= self.x_max + eps and -eps <= p[1] <= self.y_max + eps
                and -eps <= p[2] <= self.z_max + eps)

    def clamp(self, p) -> Vec3:
        return Vec3(min(max(p[0], 0.0), self.x_max),
                    min(max(p[1], 0.0), self.y_max),
                    min(max(p[2], 0.0), self.z_max))


@dataclass(frozen=True)
class MotionLimits:
    max_speed: float = 10.0
    dt: float = 1.0

    def __post_init__(self):
        if self.max_speed <= 0 or self.dt <= 0:
            raise ValueError("max_speed and dt must be positive")

    @property
    def step_length(self) -> float:
        return self.max_speed * self.dt


# -- trajectory specs -------------------------------------------------------

@dataclass(frozen=True)
class BezierSpec:
    control_points: tuple
    round_trip: bool = True
    kind = "bezier"


@dataclass(frozen=True)
class TriangleSpec:
    vertices: tuple
    kind = "triangle"


@dataclass(frozen=True)
class CircleSpec:
    center: Vec3
    radius: float
    kind = "circle"


@dataclass(frozen=True)
class RectangleSpec:
    corners: tuple
    kind = "rectangle"


@dataclass(frozen=True)
class PlannedSpec:
    source: str = "planner"
    kind = "planned"


TrajectorySpec = Union[BezierSpec, TriangleSpec, CircleSpec, RectangleSpec, PlannedSpec]


def trajectory_from_dict(d: dict) -> TrajectorySpec:
    """Build a trajectory spec from its config-file mapping."""
    d = dict(d)
    kind = d.pop("kind", None)
    try:
        if kind == "bezier":
            spec = BezierSpec(tuple(as_vec3(p) for p in d.pop("control_points")),
                              bool(d.pop("round_trip", True)))
        elif kind == "triangle":
            spec = TriangleSpec(tuple(as_vec3(p) for p in d.pop("vertices")))
        elif kind == "circle":
            spec = CircleSpec(as_vec3(d.pop("center")), float(d.pop("radius")))
        elif kind == "rectangle":
            spec = RectangleSpec(tuple(as_vec3(p) for p in d.pop("corners")))
        elif kind == "planned":
            spec = PlannedSpec(str(d.pop("source", "planner")))
        else:
            raise InvalidTrajectoryError(f"unknown trajectory kind {kind!r}")
    except KeyError as exc:
        raise InvalidTrajectoryError(f"{kind} trajectory missing field {exc}") from None
    if d:
        raise InvalidTrajectoryError(f"unknown {kind} trajectory keys: {sorted(d)}")
    return spec


def trajectory_to_dict(spec: TrajectorySpec) -> dict:
    if isinstance(spec, BezierSpec):
        return {"kind": "bezier", "control_points": [p.as_list() for p in spec.control_points],
                "round_trip": spec.round_trip}
    if isinstance(spec, TriangleSpec):
        return {"kind": "triangle", "vertices": [p.as_list() for p in spec.vertices]}
    if isinstance(spec, CircleSpec):
        return {"kind": "circle", "center": spec.center.as_list(), "radius": spec.radius}
    if isinstance(spec, RectangleSpec):
        return {"kind": "rectangle", "corners": [p.as_list() for p in spec.corners]}
    return {"kind": "planned", "source": spec.source}


def validate_trajectory(spec: TrajectorySpec, bounds: WorldBounds) -> None:
    """Raise InvalidTrajectoryError unless spec is well formed and inside bounds."""
    if isinstance(spec, BezierSpec):
        if len(spec.control_points) < 2:
            raise InvalidTrajectoryError("bezier needs at least 2 control points")
        pts = spec.control_points
    elif isinstance(spec, TriangleSpec):
        if len(spec.vertices) != 3:
            raise InvalidTrajectoryError("triangle needs exactly 3 vertices")
        pts = spec.vertices
    elif isinstance(spec, RectangleSpec):
        if len(spec.corners) != 4:
            raise InvalidTrajectoryError("rectangle needs exactly 4 corners")
        pts = spec.corners
    elif isinstance(spec, CircleSpec):
        c, r = spec.center, spec.radius
        if r <= 0:
            raise InvalidTrajectoryError("circle radius must be positive")
        pts = [Vec3(c.x - r, c.y - r, c.z), Vec3(c.x + r, c.y + r, c.z)]
    else:
        return
    for p in pts:
        if not bounds.contains(p):
            raise InvalidTrajectoryError(f"trajectory point {tuple(p)} outside world bounds")


# -- evaluation --------------------------------------------------------------

def bezier_point(controls: Sequence, u: float) -> Vec3:
    """Evaluate a Bezier curve at parameter ``u`` with de Casteljau's scheme."""
    if len(controls) == 0:
        raise InvalidTrajectoryError("empty control point list")
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u={u} outside [0, 1]")
    pts = [list(p) for p in controls]
    n = len(pts)
    for j in range(1, n):
        for i in range(n - j):
            a, b = pts[i], pts[i + 1]
            pts[i] = [(1.0 - u) * a[k] + u * b[k] for k in range(3)]
    return Vec3(*pts[0])


class BezierPath:
    """Arc-length parametrized Bezier curve.

    The curve is sampled densely once; ``position_at`` interpolates the
    inverse arc-length table. With ``round_trip`` the curve is traversed
    forward then backward, repeating.
    """

    def __init__(self, controls: Sequence, round_trip: bool = True, samples: int = 2048):
        if len(controls) < 2:
            raise InvalidTrajectoryError("bezier needs at least 2 control points")
        self.controls = [as_vec3(p) for p in controls]
        self.round_trip = round_trip
        self._u = [i / samples for i in range(samples + 1)]
        self._pts = [bezier_point(self.controls, u) for u in self._u]
        cum = [0.0]
        for a, b in zip(self._pts, self._pts[1:]):
            cum.append(cum[-1] + a.dist(b))
        self._cum = cum
        self.length = cum[-1]
        if self.length <= 0:
            raise InvalidTrajectoryError("degenerate bezier curve (zero length)")

    @property
    def start(self) -> Vec3:
        return self._pts[0]

    def position_at(self, s: float) -> Vec3:
        L = self.length
        if self.round_trip:
            s = s % (2 * L)
            if s > L:
                s = 2 * L - s
        else:
            s = min(max(s, 0.0), L)
        i = bisect.bisect_right(self._cum, s) - 1
        i = min(max(i, 0), len(self._cum) - 2)
        seg = self._cum[i + 1] - self._cum[i]
        w = 0.0 if seg == 0 else (s - self._cum[i]) / seg
        a, b = self._pts[i], self._pts[i + 1]
        return Vec3(a.x + w * (b.x - a.x), a.y + w * (b.y - a.y), a.z + w * (b.z - a.z))


def _pattern_polygon(spec) -> list[Vec3]:
    if isinstance(spec, TriangleSpec):
        return [as_vec3(p) for p in spec.vertices]
    if isinstance(spec, RectangleSpec):
        return [as_vec3(p) for p in spec.corners]
    raise InvalidTrajectoryError(f"{getattr(spec, 'kind', spec)!r} is not a closed polygon pattern")


def pattern_perimeter(spec) -> float:
    if isinstance(spec, CircleSpec):
        return 2 * math.pi * spec.radius
    poly = _pattern_polygon(spec)
    return sum(poly[i].dist(poly[(i + 1) % len(poly)]) for i in range(len(poly)))


def pattern_start(spec) -> Vec3:
    return pattern_waypoint(spec, 0.0)


def pattern_waypoint(spec, s: float) -> Vec3:
    """Point reached after traveling arc length ``s`` along a closed pattern.

    Polygons are walked through their vertices in listed order; circles run
    counterclockwise from angle 0 in the plane z = center.z.
    """
    if s < 0:
        raise ValueError("arc length must be non-negative")
    perimeter = pattern_perimeter(spec)
    if not perimeter > 0:
        raise InvalidTrajectoryError("degenerate pattern (zero perimeter)")
    s = math.fmod(s, perimeter)
    if isinstance(spec, CircleSpec):
        theta = s / spec.radius
        c = spec.center
        return Vec3(c.x + spec.radius * math.cos(theta), c.y + spec.radius * math.sin(theta), c.z)
    poly = _pattern_polygon(spec)
    for i in range(len(poly)):
        a, b = poly[i], poly[(i + 1) % len(poly)]
        edge = a.dist(b)
        if s <= edge and edge > 0:
            w = s / edge
            return Vec3(a.x + w * (b.x - a.x), a.y + w * (b.y - a.y), a.z + w * (b.z - a.z))
        s -= edge
    return poly[0]


def step_motion(pos, desired, limits: MotionLimits, bounds: WorldBounds) -> Vec3:
    """Move from ``pos`` toward ``desired`` by at most max_speed*dt, then clamp."""
    pos = as_vec3(pos)
    delta = as_vec3(desired) - pos
    d = delta.norm()
    if d == 0.0:
        return pos
    reach = limits.step_length
    if d > reach:
        delta = delta.scale(reach / d)
    return bounds.clamp(pos + delta)

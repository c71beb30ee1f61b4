import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uavfpg import InvalidTrajectoryError
from uavfpg.world import (
    BezierPath, BezierSpec, CircleSpec, MotionLimits, RectangleSpec, TriangleSpec, Vec3,
    WorldBounds, bezier_point, pattern_perimeter, pattern_start, pattern_waypoint, step_motion,
    trajectory_from_dict, trajectory_to_dict, validate_trajectory,
)

B = WorldBounds()
L = MotionLimits(10.0, 1.0)
coord = st.floats(-2000, 2000, allow_nan=False)
inside = st.tuples(st.floats(0, 1500), st.floats(0, 1500), st.floats(0, 600))


def close(a, b, tol=1e-9):
    return all(abs(x - y) <= tol for x, y in zip(a, b))


def test_bezier_linear_endpoints_and_midpoint():
    c = [(0, 0, 0), (100, 0, 0)]
    assert close(bezier_point(c, 0.0), (0, 0, 0))
    assert close(bezier_point(c, 0.5), (50, 0, 0))


def test_bezier_quadratic_matches_bernstein():
    c = [(0, 0, 0), (0, 100, 0), (100, 100, 0)]
    assert close(bezier_point(c, 0.5), (25, 75, 0))
    for u in np.linspace(0, 1, 11):
        bern = [(1 - u) ** 2 * c[0][i] + 2 * u * (1 - u) * c[1][i] + u * u * c[2][i] for i in range(3)]
        assert close(bezier_point(c, u), bern, 1e-9)


def test_bezier_empty_and_out_of_range():
    with pytest.raises(InvalidTrajectoryError):
        bezier_point([], 0.5)
    with pytest.raises(ValueError):
        bezier_point([(0, 0, 0), (1, 1, 1)], 1.5)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(coord, coord, coord), min_size=2, max_size=6))
def test_bezier_within_convex_hull(controls):
    # every point is a convex combination of the controls: check it stays
    # inside the axis-aligned box and satisfies all supporting halfplanes
    # along random directions
    pts = np.array(controls)
    rng = np.random.default_rng(0)
    dirs = rng.normal(size=(20, 3))
    bound = (pts @ dirs.T).max(axis=0)
    for u in np.linspace(0, 1, 1000):
        p = np.array(bezier_point(controls, u))
        assert np.all(p >= pts.min(axis=0) - 1e-6) and np.all(p <= pts.max(axis=0) + 1e-6)
        assert np.all(dirs @ p <= bound + 1e-6)


def test_circle_pattern_examples():
    c = CircleSpec(Vec3(0, 0, 100), 10.0)
    assert close(pattern_waypoint(c, 0.0), (10, 0, 100))
    assert close(pattern_waypoint(c, math.pi * 10), (-10, 0, 100))
    assert close(pattern_start(c), (10, 0, 100))


def test_triangle_pattern_first_edge():
    t = TriangleSpec((Vec3(0, 0, 0), Vec3(30, 0, 0), Vec3(0, 40, 0)))
    assert close(pattern_waypoint(t, 30.0), (30, 0, 0))
    assert pattern_perimeter(t) == pytest.approx(120.0)


def test_rectangle_pattern_walks_corners():
    r = RectangleSpec((Vec3(0, 0, 5), Vec3(10, 0, 5), Vec3(10, 20, 5), Vec3(0, 20, 5)))
    assert close(pattern_waypoint(r, 10), (10, 0, 5))
    assert close(pattern_waypoint(r, 15), (10, 5, 5))
    assert close(pattern_waypoint(r, 40), (0, 20, 5))


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1e4), st.sampled_from(["circle", "triangle", "rectangle"]))
def test_pattern_periodic(s, kind):
    spec = {"circle": CircleSpec(Vec3(750, 750, 250), 400.0),
            "triangle": TriangleSpec((Vec3(100, 100, 100), Vec3(900, 100, 100), Vec3(500, 800, 300))),
            "rectangle": RectangleSpec((Vec3(0, 0, 0), Vec3(300, 0, 0), Vec3(300, 200, 0), Vec3(0, 200, 0)))}[kind]
    a = pattern_waypoint(spec, s)
    b = pattern_waypoint(spec, s + pattern_perimeter(spec))
    assert close(a, b, 1e-9 * max(1.0, s))


def test_degenerate_pattern_rejected():
    with pytest.raises(InvalidTrajectoryError):
        pattern_waypoint(TriangleSpec((Vec3(1, 1, 1),) * 3), 1.0)


def test_step_motion_examples():
    assert close(step_motion((0, 0, 0), (100, 0, 0), L, B), (10, 0, 0))
    assert close(step_motion((0, 0, 0), (3, 4, 0), L, B), (3, 4, 0))
    assert close(step_motion((1495, 0, 0), (1600, 0, 0), L, B), (1500, 0, 0))


@settings(max_examples=500, deadline=None)
@given(inside, st.tuples(coord, coord, coord))
def test_step_motion_speed_and_bounds(p, d):
    q = step_motion(p, d, L, B)
    assert math.dist(p, q) <= L.step_length + 1e-9
    assert B.contains(q, eps=0.0)


def test_bezier_path_round_trip_returns_and_stays_inside():
    spec = BezierSpec((Vec3(100, 100, 300), Vec3(600, 1400, 300), Vec3(1000, 100, 300), Vec3(1400, 1400, 300)))
    path = BezierPath(spec.control_points, round_trip=True)
    assert close(path.position_at(0.0), spec.control_points[0], 1e-9)
    assert close(path.position_at(path.length), spec.control_points[-1], 1e-6)
    assert close(path.position_at(2 * path.length), spec.control_points[0], 1e-6)
    prev = path.position_at(0)
    for s in np.arange(10, 3 * path.length, 10):
        p = path.position_at(s)
        assert B.contains(p)
        assert math.dist(prev, p) <= 10 + 1e-6
        prev = p


def test_trajectory_dict_round_trip_and_validation():
    d = {"kind": "triangle", "vertices": [[0, 0, 0], [30, 0, 0], [0, 40, 0]]}
    spec = trajectory_from_dict(d)
    assert trajectory_from_dict(trajectory_to_dict(spec)) == spec
    with pytest.raises(InvalidTrajectoryError):
        trajectory_from_dict({"kind": "spiral"})
    with pytest.raises(InvalidTrajectoryError):
        trajectory_from_dict({"kind": "circle", "center": [0, 0, 0]})
    with pytest.raises(InvalidTrajectoryError):
        validate_trajectory(CircleSpec(Vec3(100, 100, 100), 500.0), B)


def test_vec3_rejects_non_finite():
    with pytest.raises(ValueError):
        Vec3(float("nan"), 0, 0)

import io

import numpy as np
import pytest

from caloric.errors import DegenerateError
from caloric.spacetime import (
    IndependentSet, ParabolicBall, ParabolicPlane, SpaceTimePoint, as_points, basis_from_independent,
    covering_radius, independence_check, parabolic_distance, plane_distance, read_points_csv,
    write_points_csv,
)


def P(x, t):
    return SpaceTimePoint(tuple(x), t)


def test_distance_identity():
    a = P((0.3, -1.0), 0.5)
    assert parabolic_distance(a, a) == 0.0


def test_distance_time_gap():
    assert parabolic_distance(P((0,), 0), P((0,), 0.04)) == pytest.approx(0.2, abs=1e-15)


def test_distance_max_formula():
    assert parabolic_distance(P((0, 0), 0), P((3, 4), -0.25)) == pytest.approx(5.0)


def test_distance_batch_matches_scalar(rng):
    A = rng.normal(size=(20, 3))
    B = rng.normal(size=(20, 3))
    d = parabolic_distance(A, B)
    for a, b, v in zip(A, B, d):
        assert v == pytest.approx(max(np.linalg.norm(a[:2] - b[:2]), np.sqrt(abs(a[2] - b[2]))))


def test_dilation_scales_distance():
    a, b = P((0.1, 0.2), 0.3), P((-0.4, 0.5), -0.1)
    o = SpaceTimePoint.origin(2)
    assert parabolic_distance(a.dilate(3, o), b.dilate(3, o)) == pytest.approx(3 * parabolic_distance(a, b))


def test_ball_contains_cylinder():
    B = ParabolicBall(P((0,), 0), 0.5)
    pts = as_points([[0.49, 0.24], [0.49, 0.26], [0.51, 0.0]], 1)
    assert list(B.contains(pts)) == [True, False, False]


def test_plane_distance_on_plane():
    V = ParabolicPlane(P((0, 0), 0), np.array([[1.0, 0.0]]), vertical=False)
    assert plane_distance(P((0.7, 0), 0), V) == pytest.approx(0.0)


def test_plane_distance_vertical_ignores_time():
    V = ParabolicPlane(P((0, 0), 0), np.array([[0.0, 1.0]]), vertical=True)
    assert plane_distance(P((0.3, 0), 0.9), V) == pytest.approx(0.3)


def test_plane_distance_horizontal():
    V = ParabolicPlane(P((0, 0), 0), np.array([[1.0, 0.0]]), vertical=False)
    assert plane_distance(P((0.3, 0.4), 0.09), V) == pytest.approx(0.4)


def test_plane_dimension_counts_time_twice():
    V = ParabolicPlane(P((0, 0, 0), 0), np.array([[1.0, 0, 0]]), vertical=True)
    assert V.k == 3
    H = ParabolicPlane(P((0, 0, 0), 0), np.array([[1.0, 0, 0], [0, 1.0, 0]]), vertical=False)
    assert H.k == 2


def test_independent_pair():
    alpha = 0.1
    S = independence_check(as_points([[0.0, 0.0], [3 * alpha, 0.0]], 1), 1, alpha)
    assert isinstance(S, IndependentSet)


def test_points_on_one_line_give_counterexample():
    pts = as_points([[0, 0, 0], [1, 1, 0], [2, 2, 0]], 2)
    V = independence_check(pts, 2, 0.1)
    assert isinstance(V, ParabolicPlane)
    for p in pts:
        assert plane_distance(p, V) < 1e-9


def test_triangle_is_independent():
    pts = as_points([[0, 0, 0], [1, 0, 0], [0, 1, 0]], 2)
    assert isinstance(independence_check(pts, 2, 0.1), IndependentSet)


def test_basis_axis_aligned():
    pts = as_points([[0, 0, 0], [1, 0, 0], [0, 1, 0]], 2)
    B = basis_from_independent(independence_check(pts, 2, 0.1))
    assert B.coord_bound == pytest.approx(1.0)


def test_basis_rejects_nearly_collinear():
    th = 1e-3
    pts = as_points([[0, 0, 0], [1, 0, 0], [np.cos(th), np.sin(th), 0]], 2)
    S = IndependentSet(pts, 2, 1e-6, temporal=False)
    with pytest.raises(DegenerateError):
        basis_from_independent(S)


def test_basis_recombination(rng):
    pts = np.zeros((3, 3))
    pts[1:, :2] = rng.normal(size=(2, 2))
    B = basis_from_independent(independence_check(pts, 2, 0.05))
    y = rng.normal(size=2)
    q = np.linalg.solve(B.offsets[:, :2].T, y)
    assert np.abs(q @ B.offsets[:, :2] - y).max() < 1e-12


def test_covering_radius_of_plane_points():
    pts = as_points([[t, 0.0, 0.0] for t in np.linspace(-1, 1, 9)], 2)
    rad, V = covering_radius(pts, 2)
    assert rad < 1e-9 and V is not None


def test_csv_roundtrip(rng):
    pts = rng.normal(size=(5, 3))
    buf = io.StringIO()
    write_points_csv(pts, buf)
    back = read_points_csv("# comment\n" + buf.getvalue())
    assert np.allclose(back, pts)

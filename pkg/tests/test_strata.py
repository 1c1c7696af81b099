import numpy as np
import pytest

from caloric.caloricpoly import CaloricPolynomial, heat_polynomial
from caloric.errors import InputError, PreconditionError
from caloric.spacetime import ParabolicBall, SpaceTimePoint
from caloric.strata import (
    GridRegion, StratumSpec, dilate, dimension_fit, effective_nodal, effective_region, effective_singular,
    minkowski_content, nodal_region, singular_region, stratum_membership, stratum_region, time_slice_measures,
)


def unit_ball(n):
    return ParabolicBall(SpaceTimePoint.origin(n), 1.0)


def test_h1_origin_is_nodal_member():
    assert effective_nodal(heat_polynomial(1), [[0.0, 0.0]], 1e-3)[0]


def test_constant_is_never_nodal():
    pts = np.array([[0.0, 0.0], [0.3, -0.2]])
    member, margin = effective_nodal(CaloricPolynomial.constant(1, 1), pts, 0.01, return_margin=True)
    assert not member.any() and np.all(margin > 0)


def test_h2_off_zero_is_not_nodal():
    assert not effective_nodal(heat_polynomial(2), [[1.0, 0.0]], 1e-3)[0]


def test_singular_membership(xy):
    assert effective_singular(xy, [[0.0, 0.0, 0.3]], 1e-3)[0]
    assert not effective_singular(heat_polynomial(1), [[0.0, 0.0]], 1e-3)[0]
    assert effective_singular(heat_polynomial(2), [[0.0, 0.0]], 1e-3)[0]


def test_nodal_region_h1_is_line():
    h = 2.0 ** -4
    reg = nodal_region(heat_polynomial(1), h, unit_ball(1))
    assert set(reg.columns) == {(0,)}
    lo, hi = reg.time_range()
    assert reg.columns[(0,)] == [(lo, hi)]


def test_effective_region_contains_nodal(xy):
    h = 2.0 ** -3
    Z = nodal_region(xy, h, unit_ball(2))
    Zr = effective_region(xy, h, 0.25, "nodal", unit_ball(2))
    assert Z.difference_count(Zr) == 0
    S = singular_region(xy, h, C=0.5, bounds=unit_ball(2))
    assert set(S.columns) == {(0, 0)}
    Sr = effective_region(xy, h, 0.25, "singular", unit_ball(2))
    assert S.count() > 0 and S.difference_count(Sr) == 0


def test_rle_roundtrip():
    reg = GridRegion.from_nodes(2, 0.25, np.array([[0, 0, 1], [0, 0, 2], [1, -1, 0], [0, 0, 5]]))
    back = GridRegion.from_rle(reg.to_rle())
    assert back.columns == reg.columns and back.h == reg.h and back.count() == 4


def test_set_operations():
    a = GridRegion.from_nodes(1, 0.5, np.array([[0, 0], [0, 1], [1, 0]]))
    b = GridRegion.from_nodes(1, 0.5, np.array([[0, 1], [2, 0]]))
    assert a.union(b).count() == 4
    assert a.intersection(b).count() == 1
    assert a.difference_count(b) == 2


def test_stratum_constant_is_empty():
    spec = StratumSpec(k=1, eps=1e-3, r1=0.1)
    assert not stratum_membership(CaloricPolynomial.constant(1, 1), spec, [[0.0, 0.0]], n_scales=4).any()


def test_stratum_h1_zero_set():
    spec = StratumSpec(k=2, eps=1e-3, r1=0.1)
    pts = np.array([[0.0, t] for t in (-0.5, 0.0, 0.5)])
    assert stratum_membership(heat_polynomial(1), spec, pts, n_scales=4).all()


def test_stratum_xy_singular_line(xy):
    spec = StratumSpec(k=2, eps=1e-3, r1=0.1)
    S = singular_region(xy, 0.25, bounds=unit_ball(2))
    out = stratum_region(xy, spec, S, n_scales=3)
    assert out.count() == S.count()


def test_stratum_k_guard():
    with pytest.raises(InputError):
        stratum_membership(heat_polynomial(1), StratumSpec(k=3, eps=0.1, r1=0.1), [[0.0, 0.0]])


def test_dilate_line():
    h = 2.0 ** -5
    Z = nodal_region(heat_polynomial(1), h, unit_ball(1))
    D = dilate(Z, 0.25)
    cols = np.array(sorted(D.columns))[:, 0]
    assert cols.min() == -7 and cols.max() == 7


def test_minkowski_guard():
    Z = nodal_region(heat_polynomial(1), 0.25, unit_ball(1))
    with pytest.raises(PreconditionError):
        minkowski_content(Z, 0.5)


def test_dimension_fit_exact_power_law():
    r = np.geomspace(0.01, 0.5, 6)
    fit = dimension_fit(np.column_stack([r, 3 * r ** 1.5]), n_boot=200)
    assert fit.slope == pytest.approx(1.5, abs=1e-12)
    assert fit.ci_low <= 1.5 <= fit.ci_high


def test_dimension_fit_needs_a_decade():
    r = np.geomspace(0.1, 0.5, 5)
    with pytest.raises(InputError):
        dimension_fit(np.column_stack([r, r]))


def test_time_slice_vertical_line():
    h = 2.0 ** -5
    Z = nodal_region(heat_polynomial(1), h, unit_ball(1))
    rep = time_slice_measures(Z, 2, 4 * h)
    assert rep["lhs"] == pytest.approx(rep["rhs"], rel=0.1)

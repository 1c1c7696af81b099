import io

import numpy as np
import pytest

from caloric.errors import DegenerateError, InputError
from caloric.measures import (
    WeightedCloud, ahlfors_check, beta_number, beta_number_bruteforce, best_vertical_plane, carleson_energy,
    covariance, kappa_number,
)
from caloric.spacetime import ParabolicBall, SpaceTimePoint


def ball(r=1.0, n=2):
    return ParabolicBall(SpaceTimePoint.origin(n), r)


def vertical_lattice(h=0.05, R=1.0):
    """Samples of H^3 on the vertical plane span(e1) x R in n = 2, weight = cell volume."""
    xs = np.arange(-R, R + h / 2, h)
    ts = np.arange(-R * R, R * R + h * h / 2, h * h)
    X, T = np.meshgrid(xs, ts, indexing="ij")
    P = np.column_stack([X.ravel(), np.zeros(X.size), T.ravel()])
    return WeightedCloud(P, np.full(len(P), h ** 3))


def test_single_point_covariance():
    xcm, Q, (lam, _) = covariance(WeightedCloud([[0.2, 0.1, 0.0]]), ball())
    assert np.allclose(xcm, [0.2, 0.1]) and np.all(Q == 0)


def test_two_point_covariance():
    xcm, Q, _ = covariance(WeightedCloud([[1, 0, 0], [-1, 0, 0]]), ball())
    assert np.allclose(xcm, 0) and np.allclose(Q, np.diag([1, 0]))


def test_planar_cloud_rank(rng):
    n = 3
    P = np.zeros((20, n + 1))
    P[:, 0] = rng.uniform(-0.5, 0.5, 20)
    _, _, (lam, _) = covariance(WeightedCloud(P), ball(n=n))
    assert np.sum(lam < 1e-14) == n - 1


def test_beta_zero_on_vertical_plane():
    assert beta_number(vertical_lattice(0.1), (0, 0, 0), 1.0, 3).value == pytest.approx(0, abs=1e-14)


def test_beta_two_points():
    mu = WeightedCloud([[1, 0, 0], [-1, 0, 0]])
    b = beta_number(mu, (0, 0, 0), 1.0, 3)
    assert b.value == pytest.approx(0, abs=1e-12)
    assert beta_number_bruteforce(mu, (0, 0, 0), 1.0, 3) == pytest.approx(0, abs=1e-9)


def test_beta_pca_vs_bruteforce(rng):
    for n in (2, 3):
        for _ in range(5):
            mu = WeightedCloud(rng.uniform(-0.6, 0.6, size=(50, n + 1)), rng.uniform(0.5, 2, 50))
            for k in (n, n + 1):
                pca = beta_number(mu, np.zeros(n + 1), 1.0, k).value
                brute = beta_number_bruteforce(mu, np.zeros(n + 1), 1.0, k)
                assert pca <= brute + 1e-9
                assert brute - pca <= 1e-9


def test_best_vertical_plane_direction():
    mu = vertical_lattice(0.1)
    V = best_vertical_plane(mu, (0, 0, 0), 1.0, 3)
    assert V.vertical and np.allclose(np.abs(V.spatial_basis), [[1, 0]])


def test_beta_k_range():
    with pytest.raises(InputError):
        beta_number(WeightedCloud([[0, 0, 0]]), (0, 0, 0), 1.0, 5)


def test_empty_ball():
    with pytest.raises(DegenerateError):
        beta_number(WeightedCloud([[5, 0, 0]]), (0, 0, 0), 1.0, 3)


def test_kappa_affine_is_zero(rng):
    Y = rng.uniform(-1, 1, size=(200, 2))
    F = 3 * Y[:, 0] - 0.5
    assert kappa_number(Y, F, (0, 0), 1.0, 3) == pytest.approx(0, abs=1e-20)


def test_kappa_time_variance():
    t = np.linspace(-1, 1, 4001)
    val = kappa_number(t[:, None], t, (0,), 1.0, 2)
    assert val == pytest.approx(2 / 3, rel=1e-3)


def test_kappa_quadratic_scaling():
    rs = np.array([0.4, 0.2, 0.1, 0.05])
    vals = []
    for r in rs:
        y = np.linspace(-r, r, 201)
        t = np.linspace(-r * r, r * r, 21)
        Y, T = np.meshgrid(y, t, indexing="ij")
        C = np.column_stack([Y.ravel(), T.ravel()])
        vals.append(kappa_number(C, C[:, 0] ** 2, (0, 0), r, 3))
    slope = np.polyfit(np.log(rs), np.log(vals), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.01)


def test_ahlfors_plane_is_regular():
    mu = vertical_lattice(0.02)
    rep = ahlfors_check(mu, 3, np.geomspace(0.1, 0.4, 5), centers=[[0, 0, 0], [0.2, 0, 0.1]])
    assert rep["regular"] and rep["spread"] < 2


def test_ahlfors_single_atom_irregular():
    rep = ahlfors_check(WeightedCloud([[0, 0, 0]], [2.0]), 3, np.geomspace(1e-3, 1, 7))
    assert not rep["regular"]
    assert rep["max"] == pytest.approx(2.0 / 1e-9)


def test_carleson_zero_on_plane():
    mu = vertical_lattice(0.2)
    assert carleson_energy(mu, 3, (0, 0, 0), 0.5, levels=3) == pytest.approx(0, abs=1e-20)


def test_carleson_decreases_with_lipschitz_constant():
    base = vertical_lattice(0.2)
    energies = []
    for delta in (0.4, 0.2, 0.1):
        P = base.points.copy()
        P[:, 1] = delta * np.abs(P[:, 0])
        energies.append(carleson_energy(WeightedCloud(P, base.weights), 3, (0, 0, 0), 0.5, levels=3))
    assert energies[0] > energies[1] > energies[2] > 0


def test_carleson_outlier_dominates():
    base = vertical_lattice(0.2)
    with_outlier = base.concat(WeightedCloud([[0.1, 0.3, 0.0]], [base.weights[0]]))
    assert carleson_energy(with_outlier, 3, (0, 0, 0), 0.5, levels=3) > 0


def test_rescale_invariance(rng):
    mu = WeightedCloud(rng.uniform(-0.5, 0.5, size=(40, 3)))
    b = beta_number(mu, (0, 0, 0), 1.0, 3).value
    lam = 0.3
    b2 = beta_number(mu.rescale(lam, weight_power=3), (0, 0, 0), lam, 3).value
    assert b2 == pytest.approx(b, rel=1e-10)


def test_csv_roundtrip(rng):
    mu = WeightedCloud(rng.normal(size=(6, 3)), rng.uniform(1, 2, 6))
    buf = io.StringIO()
    mu.to_csv(buf)
    back = WeightedCloud.from_csv(buf.getvalue())
    assert np.allclose(back.points, mu.points) and np.allclose(back.weights, mu.weights)


def test_weights_must_be_positive():
    with pytest.raises(InputError):
        WeightedCloud([[0, 0]], [0.0])

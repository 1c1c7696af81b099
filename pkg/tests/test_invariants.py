"""Cross-module invariants: symmetry covariance, frequency lemmas on random
families, beta restriction, Minkowski monotonicity, epsilon-regularity,
decomposition ledger bounds and BMO invariances."""
import math
from fractions import Fraction

import numpy as np
import pytest

from caloric.caloricpoly import CaloricPolynomial, heat_polynomial, random_caloric
from caloric.cli import load_function
from caloric.frequency import doubling_gradient_check, frequency, nearest_integer
from caloric.gaussquad import HeatKernelMeasure, integrate_fn
from caloric.graph import bmo_norm, graph_from_centers
from caloric.measures import WeightedCloud, beta_number
from caloric.neck import greedy_neck_decomposition
from caloric.spacetime import ParabolicBall, ParabolicPlane, SpaceTimePoint
from caloric.strata import minkowski_content, nodal_region
from caloric.symmetry import best_symmetry_plane, symmetry_score


def rotation(a=3, b=4, c=5):
    """Exact rational rotation from a Pythagorean triple."""
    return np.array([[Fraction(a, c), Fraction(-b, c)], [Fraction(b, c), Fraction(a, c)]], dtype=object)


def test_symmetry_score_rotation_covariant(rng):
    Q = rotation()
    for _ in range(10):
        u = random_caloric(2, 5, rng)
        uQ = u.linear_substitute(Q)  # uQ(x) = u(Qx)
        v = rng.normal(size=2)
        for vertical in (False, True):
            V = ParabolicPlane.through(SpaceTimePoint.origin(2), [v], vertical)
            VQ = ParabolicPlane.through(SpaceTimePoint.origin(2), [Q.T.astype(float) @ v], vertical)
            a = symmetry_score(u, (0, 0, 0), 0.7, V).score
            b = symmetry_score(uQ, (0, 0, 0), 0.7, VQ).score
            assert b == pytest.approx(a, rel=1e-10, abs=1e-12)


def test_symmetry_score_invariant_under_amplitude(rng):
    for _ in range(10):
        u = random_caloric(2, 5, rng)
        V = ParabolicPlane.through(SpaceTimePoint.origin(2), [rng.normal(size=2)], bool(rng.integers(2)))
        a = symmetry_score(u, (0.1, 0, 0), 0.5, V).score
        b = symmetry_score(u * Fraction(-37, 3), (0.1, 0, 0), 0.5, V).score
        assert b == pytest.approx(a, rel=1e-10, abs=1e-12)


def test_best_plane_beats_supplied_planes(rng):
    for i in range(50):
        n = 1 + i % 3
        u = random_caloric(n, 4, rng)
        k = int(rng.integers(2, n + 2))
        best = best_symmetry_plane(u, np.zeros(n + 1), 1.0, k)
        # a supplied plane of the same mode and dimension
        d = k - 2 if best.mode == "temporal" else k
        V = ParabolicPlane.through(SpaceTimePoint.origin(n), rng.normal(size=(d, n)) if d else [],
                                   best.mode == "temporal")
        assert best.score <= symmetry_score(u, np.zeros(n + 1), 1.0, V).score + 1e-10


def test_small_drop_locks_frequency_to_an_integer(rng):
    checked = 0
    for i in range(20):
        u = random_caloric(1 + i % 2, 5, rng)
        base = np.zeros(u.n + 1)
        for tau in np.geomspace(1e-2, 1e2, 15):
            N = frequency(u, base, np.linspace(tau / 2, tau, 21))[0]
            delta = N[-1] - N[0]
            if delta >= 0.1:
                continue
            checked += 1
            m = nearest_integer(N[-1])
            assert np.max(np.abs(N - m)) <= 6 * delta + 1e-9
    assert checked > 50


def test_doubling_gradient_bound(rng):
    for i in range(20):
        n = 1 + i % 3
        u = random_caloric(n, 5, rng)
        L = rng.normal(size=(1 + i % n, n))
        rep = doubling_gradient_check(u, rng.uniform(-0.3, 0.3, n + 1), float(rng.uniform(0.1, 2)), L)
        assert rep["lhs"] <= rep["rhs"] * (1 + 1e-6) + 1e-12


def test_beta_decreases_under_restriction(rng):
    for i in range(30):
        n = 1 + i % 3
        m = int(rng.integers(4, 40))
        mu = WeightedCloud(rng.uniform(-0.6, 0.6, (m, n + 1)), rng.uniform(0.5, 2, m))
        keep = rng.random(m) < 0.5
        keep[0] = True
        sub = WeightedCloud(mu.points[keep], mu.weights[keep])
        for k in ([2] if n == 1 else [n, n + 1]):
            assert beta_number(sub, np.zeros(n + 1), 1.0, k).value <= \
                beta_number(mu, np.zeros(n + 1), 1.0, k).value + 1e-14


def test_minkowski_content_monotone_and_bounded():
    Z = nodal_region(heat_polynomial(1), 2.0 ** -7, ParabolicBall(SpaceTimePoint.origin(1), 1.0))
    radii = 2.0 ** -np.arange(2, 5)
    vols = np.array([minkowski_content(Z, r) for r in radii])
    assert np.all(np.diff(vols) < 0)
    ratios = vols / radii
    assert ratios.max() / ratios.min() < 1.5


def test_epsilon_regularity_near_constants(rng):
    # almost spatially symmetric in every direction => u^2 stays above H/8 nearby
    I = np.eye(2)
    seen = 0
    for _ in range(20):
        u = CaloricPolynomial.constant(2, 1) + random_caloric(2, 3, rng) * Fraction(1, 50)
        x = np.append(rng.uniform(-0.3, 0.3, 2), rng.uniform(-0.1, 0.1))
        r = 0.5
        V = ParabolicPlane.through(SpaceTimePoint.origin(2), I, False)
        if symmetry_score(u, x, r, V).score > 1e-2:
            continue
        seen += 1
        H = _H(u, x, r * r)
        P = ParabolicBall(SpaceTimePoint.from_array(x), r / 16).lattice(9)
        assert np.min(u.evaluate(P) ** 2) > H / 8
    assert seen > 10


def _H(u, x, tau):
    return integrate_fn(lambda P: u.evaluate(P) ** 2, HeatKernelMeasure.at(tuple(x), tau))[0]


@pytest.mark.parametrize("name,n", [("h1", 1), ("xy", 2)])
def test_decomposition_ledger_stays_bounded(name, n):
    u = load_function(name)
    ball = ParabolicBall(SpaceTimePoint.origin(n), 1.0)
    totals = [greedy_neck_decomposition(u, ball, 2, 2.0 ** -j).ledger["total"] for j in range(4, 8)]
    assert all(math.isfinite(t) for t in totals)
    assert max(totals) <= 10 * totals[0]


def test_bmo_invariant_under_constants_and_parabolic_rescaling(rng):
    for shape in ((64,), (9, 64)):
        g = rng.normal(size=shape)
        ref = bmo_norm(g, 0.1, 0.01)
        assert bmo_norm(g + 4.2, 0.1, 0.01) == pytest.approx(ref, rel=1e-12)
        for lam in (3.0, 0.7):
            assert bmo_norm(g, 0.1 * lam, 0.01 * lam * lam) == pytest.approx(ref, rel=1e-12)


def test_graph_lipschitz_tracks_displacement():
    t = np.linspace(-1, 1, 257)
    V = ParabolicPlane(SpaceTimePoint.origin(1), np.zeros((0, 1)), True)
    ests = []
    for delta in (1e-3, 1e-2, 1e-1):
        C = np.column_stack([delta * np.sin(3 * t), t])
        ests.append(graph_from_centers(C, V).lipschitz_est / delta)
    assert max(ests) / min(ests) < 1.01

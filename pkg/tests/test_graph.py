import io
import math

import numpy as np
import pytest

from caloric.errors import CoverageError, InputError, NonGraphicalError, NumericError
from caloric.graph import (
    C_BREVE, C_BREVE_ANALYTIC, PartitionOfUnity, bmo_norm, calibrate_c_breve, graph_from_centers,
    half_time_derivative, kappa_carleson, pairwise_lipschitz, regularity_report, whitney_extension,
)
from caloric.spacetime import ParabolicPlane, SpaceTimePoint


def vplane(rows, n):
    return ParabolicPlane(SpaceTimePoint.origin(n), np.array(rows, dtype=float).reshape(-1, n), True)


def line_centers(slope, m=41):
    """Centres (v, slope * v, 0) over the vertical plane span(e1) x R in n = 2."""
    v = np.linspace(-1, 1, m)
    return np.column_stack([v, slope * v, np.zeros(m)])


def test_flat_centres_have_zero_lipschitz():
    G = graph_from_centers(line_centers(0.0), vplane([[1, 0]], 2))
    assert G.lipschitz_est == 0 and G.k == 3 and G.coords.shape == (41, 2)


def test_tilted_centres_lipschitz_is_tangent():
    th = 0.2
    G = graph_from_centers(line_centers(math.tan(th)), vplane([[1, 0]], 2))
    assert G.lipschitz_est == pytest.approx(math.tan(th), rel=1e-12)


def test_time_axis_graph():
    t = np.linspace(-1, 1, 101)
    C = np.column_stack([0.1 * np.sqrt(np.abs(t)), t])
    G = graph_from_centers(C, vplane(np.zeros((0, 1)), 1))
    assert G.lipschitz_est == pytest.approx(0.1, rel=1e-9)


def test_collision_raises_with_witnesses():
    C = np.array([[0.0, 0.0, 0.0], [0.0, 0.5, 0.0], [0.5, 0.0, 0.0]])
    with pytest.raises(NonGraphicalError) as exc:
        graph_from_centers(C, vplane([[1, 0]], 2))
    assert len(exc.value.witnesses) == 1


def test_duplicates_merge():
    C = np.vstack([line_centers(0.1), line_centers(0.1)[:3]])
    assert len(graph_from_centers(C, vplane([[1, 0]], 2)).coords) == 41


def test_horizontal_plane_rejected():
    V = ParabolicPlane(SpaceTimePoint.origin(2), np.array([[1.0, 0.0]]), False)
    with pytest.raises(InputError):
        graph_from_centers(line_centers(0.0), V)


def test_graph_csv():
    G = graph_from_centers(line_centers(0.5, 5), vplane([[1, 0]], 2))
    text = G.to_csv()
    assert text.splitlines()[0] == "v1,t,offset1" and len(text.splitlines()) == 6


def test_pairwise_lipschitz_pair():
    Y = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    F = np.array([0.0, 0.0, 3.0])
    val, pair = pairwise_lipschitz(Y, F)
    assert val == 3.0 and set(pair) == {1, 2}


def test_partition_of_unity_sums_to_one(rng):
    Z = np.column_stack([np.linspace(-1, 1, 9), np.zeros(9)])
    pou = PartitionOfUnity(Z, np.full(9, 0.3))
    Y = np.column_stack([rng.uniform(-1, 1, 200), rng.uniform(-0.05, 0.05, 200)])
    psi, cov = pou(Y)
    assert cov.all() and np.abs(psi.sum(1) - 1).max() < 1e-14
    assert pou.overlap(Y).max() <= pou.overlap_bound


def test_partition_rejects_zero_radius():
    with pytest.raises(InputError):
        PartitionOfUnity(np.zeros((1, 2)), [0.0])


def grid_sample(fn, holes=()):
    v = np.linspace(-1, 1, 41)
    t = np.linspace(-1, 1, 41)
    V, T = np.meshgrid(v, t, indexing="ij")
    keep = np.ones(V.size, dtype=bool)
    for z, r in holes:
        keep &= np.maximum(np.abs(V.ravel() - z[0]), np.sqrt(np.abs(T.ravel() - z[1]))) >= r
    P = np.column_stack([V.ravel(), fn(V.ravel()), T.ravel()])[keep]
    return graph_from_centers(P, vplane([[1, 0]], 2))


def test_extension_reproduces_affine_data():
    hole = (np.array([0.2, 0.1]), 0.15)
    G = grid_sample(lambda v: 0.3 * v - 0.1, [hole])
    grid = np.array([[0.2, 0.1], [0.25, 0.11], [5.0, 0.0]])
    ext = whitney_extension(G, [hole[0]], [hole[1]], grid=grid)
    assert np.allclose(ext.values[:2, 0], 0.3 * grid[:2, 0] - 0.1, atol=1e-12)
    assert ext.covered.tolist() == [True, True, False] and np.isnan(ext.values[2, 0])


def test_extension_on_samples_is_exact():
    G = grid_sample(lambda v: v ** 2)
    ext = whitney_extension(G, [[0.0, 0.0]], [0.1], grid=G.coords[:10])
    assert np.array_equal(ext.values, G.offsets[:10])


def test_extension_quadratic_hole_bounded():
    hole = (np.array([0.0, 0.0]), 0.15)
    G = grid_sample(lambda v: v ** 2, [hole])
    ext = whitney_extension(G, [hole[0]], [hole[1]], grid=np.array([[0.0, 0.0]]), gamma=0.5)
    # deviation from the true value 0 is second order in the fitting radius r / gamma
    assert 0 < ext.values[0, 0] < (0.15 / 0.5) ** 2


def test_extension_without_samples_raises():
    G = grid_sample(lambda v: v)
    with pytest.raises(CoverageError):
        whitney_extension(G, [[50.0, 0.0]], [0.1])


@pytest.mark.parametrize("m", [1, 3, 17, 100])
def test_half_derivative_tones(m):
    T = 1024
    dt = 2 * np.pi / T
    t = np.arange(T) * dt
    out = half_time_derivative(np.cos(m * t), dt)
    assert np.abs(out - math.sqrt(m) * np.cos(m * t)).max() < 1e-11


def test_half_derivative_composes_to_modulus_multiplier():
    T = 512
    dt = 2 * np.pi / T
    t = np.arange(T) * dt
    phi = np.sin(3 * t) + 0.5 * np.cos(7 * t)
    twice = half_time_derivative(half_time_derivative(phi, dt), dt)
    assert np.abs(twice - (3 * np.sin(3 * t) + 3.5 * np.cos(7 * t))).max() < 1e-10


def test_backends_agree(rng):
    T = 1024
    dt = 1 / T
    spec = np.zeros(T // 2 + 1, dtype=complex)
    spec[1:20] = rng.normal(size=19) + 1j * rng.normal(size=19)
    phi = np.fft.irfft(spec, n=T)
    F, S = half_time_derivative(phi, dt, backend="both")
    assert np.linalg.norm(F - S) / np.linalg.norm(F) < 1e-3


def test_calibrated_constant_near_analytic():
    assert C_BREVE == pytest.approx(C_BREVE_ANALYTIC, rel=1e-5)
    assert calibrate_c_breve(T=256, tones=range(1, 9)) == pytest.approx(C_BREVE_ANALYTIC, rel=1e-4)


def test_half_derivative_rejects_nonfinite():
    with pytest.raises(NumericError):
        half_time_derivative([0.0, np.inf, 1.0], 0.1)


def test_unknown_backend():
    with pytest.raises(InputError):
        half_time_derivative(np.zeros(8), 0.1, backend="wavelet")


def test_bmo_of_constant_is_zero():
    assert bmo_norm(np.full((9, 64), 3.5), h=0.1, dt=0.01) == 0.0


def test_bmo_of_step():
    g = np.where(np.arange(64) < 32, -3.0, 3.0)
    assert bmo_norm(g, dt=1.0) == pytest.approx(3.0)


def test_kappa_carleson_zero_for_affine():
    v = np.linspace(-1, 1, 17)
    f = np.repeat((2 * v - 1)[:, None], 64, axis=1)
    assert kappa_carleson(f, v[1] - v[0], 1 / 64, 3, levels=2, depth=2) == pytest.approx(0, abs=1e-20)


def test_kappa_carleson_dimension_guard():
    with pytest.raises(InputError):
        kappa_carleson(np.zeros((4, 4)), 0.1, 0.1, 4)


def test_regularity_report_small():
    v = (np.arange(9) - 4) / 8
    t = (np.arange(64) - 32) / 64
    V, T = np.meshgrid(v, t, indexing="ij")
    rep = regularity_report(0.05 * np.sin(2 * np.pi * T) * np.cos(np.pi * V), 1 / 8, 1 / 64, 3, delta=1.0, levels=2)
    assert rep["verdict"] and rep["delta_regular"]
    assert rep["carleson_energy"] > 0 and rep["bmo_half_derivative"] > 0

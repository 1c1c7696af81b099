"""Acceptance suite: one test per criterion, each recording a pass/fail line
that is repeated in the terminal summary."""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from caloric.caloricpoly import (
    CaloricPolynomial, DriftOperator, commutator_residuals, heat_basis, heat_polynomial, heat_residual,
    random_caloric, random_polynomial,
)
from caloric.cli import load_function, minkowski_volumes
from caloric.frequency import (
    find_pinched_scale, frequency, frequency_derivative, functionals, profile, refined_monotonicity,
)
from caloric.gaussquad import HeatKernelMeasure, integrate_poly
from caloric.graph import bmo_norm, graph_from_centers, half_time_derivative, regularity_report
from caloric.measures import WeightedCloud, ahlfors_check, beta_number, beta_number_bruteforce
from caloric.neck import greedy_neck_decomposition, packing_measure, verify_neck
from caloric.spacetime import ParabolicBall, SpaceTimePoint
from caloric.strata import (
    StratumSpec, dimension_fit, effective_region, nodal_region, stratum_region, time_slice_measures,
)

pytestmark = pytest.mark.slow


def unit_ball(n):
    return ParabolicBall(SpaceTimePoint.origin(n), 1.0)


def rational_point(rng, n):
    return tuple(Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 8))) for _ in range(n + 1))


def test_exact_spectral_algebra(criterion):
    c = criterion(1, "exact spectral algebra")
    t0 = time.perf_counter()
    failures = []
    for n in (1, 2, 3):
        mu = HeatKernelMeasure.at((0,) * (n + 1), 1)
        A = DriftOperator((0,) * (n + 1))
        for axis in range(n):
            H = [heat_polynomial(m, axis=axis, n=n) for m in range(11)]
            for m, h in enumerate(H):
                if not heat_residual(h).is_zero():
                    failures.append(("residual", n, axis, m))
                if A(h) != h * (-m):
                    failures.append(("eigen", n, axis, m))
                for k in range(m, 11):
                    want = math.factorial(m) * 2 ** m if k == m else 0
                    if integrate_poly(h * H[k], mu) != want:
                        failures.append(("orth", n, axis, m, k))
    # multi-index heat polynomials in n = 2
    alphas = [(a, b) for a in range(5) for b in range(5) if a + b <= 4]
    mu2 = HeatKernelMeasure.at((0, 0, 0), Fraction(1, 3))
    for i, a in enumerate(alphas):
        for b in alphas[i + 1:]:
            if integrate_poly(heat_basis(a) * heat_basis(b), mu2) != 0:
                failures.append(("orth2", a, b))
    dt = time.perf_counter() - t0
    ok = c(not failures and dt < 10, f"{len(failures)} failures, {dt:.2f} s (limit 10 s)")
    assert ok, failures[:5]


def test_commutator_identities(criterion):
    c = criterion(2, "commutator identities")
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    bad_s = bad_t = 0
    for i in range(200):
        n = 1 + i % 3
        s, _ = commutator_residuals(random_polynomial(n, 6, rng), rational_point(rng, n), rational_point(rng, n))
        bad_s += not s.is_zero()
        _, t = commutator_residuals(random_caloric(n, 6, rng), rational_point(rng, n), rational_point(rng, n))
        bad_t += not t.is_zero()
    dt = time.perf_counter() - t0
    ok = c(bad_s == 0 and bad_t == 0 and dt < 30,
           f"nonzero spatial {bad_s}/200, temporal {bad_t}/200, {dt:.2f} s (limit 30 s)")
    assert ok


def test_frequency_calculus(criterion):
    c = criterion(3, "frequency calculus")
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    err_hm = 0.0
    for m in range(11):
        for n, axis in ((1, 0), (2, 1), (3, 2)):
            for tau in (1e-3, 0.5, 1.0, 20.0):
                N = functionals(heat_polynomial(m, axis=axis, n=n), (0.0,) * (n + 1), tau).N
                err_hm = max(err_hm, abs(N - m))
    u = heat_polynomial(2) + 1
    err_cf = 0.0
    for tau in (0.1, 0.5, 1.0, 2.0, 4.0):
        for method in ("spectral", "quadrature"):
            f = functionals(u, (0.0, 0.0), tau, method=method)
            err_cf = max(err_cf, abs(f.N - 16 * tau ** 2 / (1 + 8 * tau ** 2)))
    for method in ("spectral", "quadrature"):
        err_cf = max(err_cf, abs(functionals(u, (0.0, 0.0), 1.0, method=method).D - math.log2(33 / 9)))
    sandwich, slope_min, rel_fd = 0.0, np.inf, 0.0
    taus = np.geomspace(1e-2, 1e2, 20)
    for i in range(50):
        n = 1 + i % 3
        w = random_caloric(n, 6, rng)
        base = np.zeros(n + 1)
        prof = profile(w, base, taus)
        N2 = frequency(w, base, 2 * taus)[0]
        sandwich = max(sandwich, float(np.max(prof.N - prof.D)), float(np.max(prof.D - N2)))
        slope_min = min(slope_min, float(np.min(np.diff(prof.N) / np.diff(taus))))
        for tau in taus:
            a, fd = frequency_derivative(w, base, tau)
            rel_fd = max(rel_fd, abs(a - fd) / max(abs(a), 1e-12))
    dt = time.perf_counter() - t0
    ok = c(err_hm < 1e-10 and err_cf < 1e-9 and sandwich <= 1e-9 and slope_min >= -1e-9 and rel_fd < 1e-6
           and dt < 120,
           f"|N(h_m)-m| {err_hm:.1e}, closed forms {err_cf:.1e}, sandwich excess {sandwich:.1e}, "
           f"min slope {slope_min:.1e}, N' rel err {rel_fd:.1e}, {dt:.1f} s (limit 120 s)")
    assert ok


def mixtures(rng):
    """15 explicit sums of heat polynomials and 15 random caloric polynomials (shifted bases)."""
    out = []
    for i in range(15):
        coef = rng.uniform(-1, 1, 6) * 10.0 ** rng.uniform(-2, 0, 6)
        u = CaloricPolynomial(1)
        for m, cm in enumerate(coef):
            u = u + heat_polynomial(m) * Fraction(cm).limit_denominator(10 ** 6)
        out.append(u)
    for i in range(15):
        out.append(random_caloric(1 + i % 2, 6, rng))
    return out


def test_refined_monotonicity(criterion):
    c = criterion(4, "refined monotonicity")
    rng = np.random.default_rng(4)
    worst = np.inf
    pinched_ok, pinched_total = 0, 0
    for u in mixtures(rng):
        base = np.zeros(u.n + 1)
        for tau in np.geomspace(1e-3, 1e3, 40):
            rep = refined_monotonicity(u, base, tau)
            worst = min(worst, rep["drop"] - rep["eps"])
        for eps in (0.05, 0.08):
            lam = float(frequency(u, base, [1.0])[0, 0])  # N(r2^2) - N(r1^2) <= N(1) since N >= 0
            r1 = eps ** (4 * lam + 10)
            pinched_total += 1
            s = find_pinched_scale(u, base, r1, 1.0, eps)
            if s is not None:
                N = frequency(u, base, [s * s / eps ** 2, eps ** 2 * s * s])[0]
                pinched_ok += bool(r1 < s < 1.0 and N[0] - N[1] < eps)
    ok = c(worst >= -1e-9 and pinched_ok == pinched_total,
           f"min (drop - eps) {worst:.2e}, pinched scale found {pinched_ok}/{pinched_total}")
    assert ok


def test_beta_numbers(criterion):
    c = criterion(5, "beta-number correctness")
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    pca_err = rescale_err = 0.0
    planar_max, generic_min = 0.0, np.inf
    for i in range(100):
        n = 1 + i % 3
        m = int(rng.integers(3, 65))
        mu = WeightedCloud(rng.uniform(-0.7, 0.7, size=(m, n + 1)), rng.uniform(0.2, 3, m))
        ks = [2] if n == 1 else [n, n + 1]
        for k in ks:
            pca = beta_number(mu, np.zeros(n + 1), 1.0, k).value
            pca_err = max(pca_err, abs(pca - beta_number_bruteforce(mu, np.zeros(n + 1), 1.0, k)))
            lam = float(rng.uniform(0.1, 10))
            b2 = beta_number(mu.rescale(lam, weight_power=k), np.zeros(n + 1), lam, k).value
            rescale_err = max(rescale_err, abs(b2 - pca))
            if k - 2 < n and m > k - 1:  # m <= k - 1 points always fit a spatial (k-2)-plane
                generic_min = min(generic_min, pca)
        if n >= 2:
            # the same cloud pushed onto a random vertical (n + 1)-plane
            L, _ = np.linalg.qr(rng.normal(size=(n, n - 1)))
            P = mu.points.copy()
            P[:, :n] = (P[:, :n] @ L) @ L.T + 0.1
            flat = WeightedCloud(P, mu.weights)
            planar_max = max(planar_max, beta_number(flat, np.zeros(n + 1), 1.0, n + 1).value)
    dt = time.perf_counter() - t0
    ok = c(pca_err < 1e-9 and planar_max < 1e-10 and generic_min > 1e-10 and rescale_err < 1e-10 and dt < 120,
           f"|PCA - brute| {pca_err:.1e}, planar max {planar_max:.1e}, generic min {generic_min:.1e}, "
           f"rescaling {rescale_err:.1e}, {dt:.1f} s (limit 120 s)")
    assert ok


@pytest.mark.parametrize("name,kind,target,tol", [("h1", "nodal", 1.0, 0.10), ("xy", "singular", 2.0, 0.15)])
def test_minkowski_scaling(criterion, name, kind, target, tol):
    c = criterion(6, f"Minkowski scaling {name}")
    t0 = time.perf_counter()
    vols = minkowski_volumes(load_function(name), kind, [2.0 ** -j for j in range(3, 8)], h_factor=0.125)
    fit = dimension_fit(vols, n_boot=500)
    dt = time.perf_counter() - t0
    ok = c(abs(fit.slope - target) <= tol and dt < 300,
           f"slope {fit.slope:.4f} (target {target} +/- {tol}), CI [{fit.ci_low:.3f}, {fit.ci_high:.3f}], "
           f"{dt:.1f} s (limit 300 s)")
    assert ok


@pytest.mark.parametrize("name,kind", [("h1", "nodal"), ("xy", "singular")])
def test_containment(criterion, name, kind):
    c = criterion(7, f"containment {name}")
    u = load_function(name)
    k = u.n + 1 if kind == "nodal" else u.n
    r, h = 2.0 ** -4, 2.0 ** -6
    reg = effective_region(u, h, r, kind, unit_ball(u.n))
    strat = stratum_region(u, StratumSpec(k, 1e-3, r), reg)
    violations = reg.difference_count(strat)
    ok = c(reg.count() > 0 and violations == 0,
           f"{reg.count()} grid points of the effective set, stratum k={k}, violations {violations}")
    assert ok


def test_neck_pipeline(criterion):
    c = criterion(8, "neck pipeline end-to-end")
    t0 = time.perf_counter()
    u = load_function("h1")
    r_star = 2.0 ** -5
    dec = greedy_neck_decomposition(u, unit_ball(1), 2, r_star)
    nk = dec.necks[0]
    rep = verify_neck(u, nk)
    margins = {a: rep[a].margin for a in ("n1", "n2", "n3", "n4a", "n4b")}
    mu = packing_measure(nk)
    interior = nk.centers[np.abs(nk.centers[:, -1]) <= 1.0][::64]
    ahl = ahlfors_check(mu, 2, np.geomspace(4 * r_star, 0.5, 6), centers=interior)
    G = graph_from_centers(nk.centers, nk.plane)
    dt = time.perf_counter() - t0
    ok = c(len(dec.necks) >= 1 and min(margins.values()) > 0 and ahl["spread"] < 4 and G.lipschitz_est < 0.1
           and dt < 300,
           f"{len(nk.centers)} centres, min margin {min(margins.values()):.3f}, Ahlfors spread {ahl['spread']:.3f}, "
           f"graph Lipschitz {G.lipschitz_est:.2e}, {dt:.1f} s (limit 300 s)")
    assert ok, margins


def test_half_derivative_and_bmo(criterion):
    c = criterion(9, "half-derivative and BMO")
    T = 1024
    dt = 2 * np.pi / T
    t = np.arange(T) * dt
    tone_err = max(float(np.abs(half_time_derivative(np.cos(m * t), dt) - math.sqrt(m) * np.cos(m * t)).max())
                   for m in range(1, 65))
    rng = np.random.default_rng(9)
    spec = np.zeros(T // 2 + 1, dtype=complex)
    spec[1:25] = rng.normal(size=24) + 1j * rng.normal(size=24)
    phi = np.fft.irfft(spec, n=T)
    F, S = half_time_derivative(phi, 1.0 / T, backend="both")
    backend_rel = float(np.linalg.norm(F - S) / np.linalg.norm(F))
    const_bmo = max(bmo_norm(np.full(shape, v), 0.1, 0.01) for shape, v in (((64,), 2.0), ((9, 64), -1.5),
                                                                           ((5, 5, 32), 7.0)))
    h, dtt = 1 / 8, 1 / 64
    V, Tt = np.meshgrid((np.arange(17) - 8) * h, (np.arange(256) - 128) * dtt, indexing="ij")
    ratios = []
    for delta in (0.02, 0.05, 0.1, 0.2):
        f = delta * np.sin(2 * np.pi * Tt) * np.cos(np.pi * V) + delta ** 2 * np.cos(4 * np.pi * Tt)
        rep = regularity_report(f, h, dtt, 3)
        ratios.append(rep["bmo_half_derivative"] / math.sqrt(rep["carleson_energy"]))
    spread = max(ratios) / min(ratios)
    ok = c(tone_err < 1e-10 and backend_rel < 1e-3 and const_bmo == 0 and spread < 3,
           f"tone error {tone_err:.1e}, backend discrepancy {backend_rel:.1e}, bmo(const) {const_bmo}, "
           f"bmo/sqrt(energy) {min(ratios):.3f}..{max(ratios):.3f} (spread {spread:.2f}, limit 3)")
    assert ok


def poly(n, terms):
    return CaloricPolynomial.from_spec({"n": n, "terms": [{"alpha": a, "k": k, "coef": q} for a, k, q in terms]})


def test_disintegration(criterion):
    c = criterion(10, "disintegration")
    sets = [
        (load_function("h1"), 2),
        (poly(1, [([1], 0, "1"), ([0], 0, "-3/10")]), 2),
        (load_function("h2"), 2),
        (load_function("heat:3"), 2),
        (poly(1, [([1], 0, "1"), ([0], 1, "1/2")]), 2),
        (load_function("heat:1:0:2"), 3),
        (poly(2, [([1, 0], 0, "1"), ([0, 1], 0, "1/2")]), 3),
        (load_function("xy"), 3),
        (load_function("heat:2:0:2"), 3),
        (poly(2, [([1, 1], 0, "1"), ([0, 0], 0, "1/10")]), 3),
    ]
    h = 2.0 ** -5
    reps = [time_slice_measures(nodal_region(u, h, unit_ball(u.n)), k, 4 * h) for u, k in sets]
    ratios = np.array([r["ratio"] for r in reps])
    C_box = float(ratios.max())
    holds = all(r["lhs"] <= C_box * r["rhs"] * (1 + 1e-12) for r in reps)
    spread = float(ratios.max() / ratios.min())
    ok = c(holds and spread < 2, f"C_box {C_box:.3f}, per-set ratios {ratios.min():.3f}..{ratios.max():.3f} "
                                 f"(spread {spread:.2f}, limit 2)")
    assert ok

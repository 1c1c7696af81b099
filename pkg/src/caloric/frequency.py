"""Parabolic frequency functionals and their calculus.

For a caloric polynomial u and a base point (x0, t0) write nu_tau for the
conjugate heat kernel measure on the slice t = t0 - tau and

    H(tau) = int u^2 dnu_tau,      E(tau) = 2 tau int |grad u|^2 dnu_tau,
    N = E / H,                     D(tau) = log2(H(2 tau) / H(tau)).

If u = sum_m p_m is the split into homogeneous caloric pieces at the base and
a_m = int p_m^2 dnu_1, then H(tau) = sum a_m tau^m and E(tau) = sum m a_m tau^m.
Everything below is evaluated through these masses, which are computed once
per base point; quadrature is available as an independent route.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .caloricpoly import CaloricPolynomial, DriftOperator, spectral_decompose
from .errors import DegenerateError, InputError, PreconditionError, UnsupportedInputError
from .gaussquad import DEFAULT_ORDER, HeatKernelMeasure, LocalExpansion, integrate_fn
from .spacetime import IndependentSet, SpaceTimePoint, as_points, covering_radius

TOL_ZERO = 1e-300
TOL_MONO = 1e-9


# ---------------------------------------------------------------------------
# spectral model
# ---------------------------------------------------------------------------

class SpectralModel:
    """Cached local expansions of u and of its first derivatives."""

    def __init__(self, u: CaloricPolynomial):
        if u.is_zero():
            raise DegenerateError("u is identically zero")
        if not u.is_caloric:
            raise UnsupportedInputError("frequency functionals require a caloric polynomial")
        self.u = u
        self.n = u.n
        self.value = LocalExpansion(u)
        self._deriv: LocalExpansion | None = None

    @property
    def deriv(self) -> LocalExpansion:
        if self._deriv is None:
            self._deriv = LocalExpansion([self.u.diff(i) for i in range(self.n + 1)])
        return self._deriv

    def masses(self, bases) -> np.ndarray:
        """a_m at each base, shape (P, M + 1)."""
        return np.clip(self.value.masses(bases)[:, 0, :], 0.0, None)

    def derivative_gram(self, bases) -> np.ndarray:
        """G[p, i, j, m]: block-m integrals of d_i u d_j u at tau = 1 (index n is d_t)."""
        return self.deriv.gram(bases)

    def keys(self, bases, decimals: int = 11) -> np.ndarray:
        """Rounded local coefficients; equal keys mean identical local polynomials."""
        C = self.value.coefficients(bases)[:, 0, :]
        scale = max(float(np.max(np.abs(C))), 1e-300)
        return np.round(C / scale, decimals) + 0.0


@lru_cache(maxsize=64)
def model(u: CaloricPolynomial) -> SpectralModel:
    return SpectralModel(u)


def _powers(taus: np.ndarray, M: int) -> np.ndarray:
    taus = np.asarray(taus, dtype=float)
    return taus[..., None] ** np.arange(M + 1)


def mass_H(a: np.ndarray, taus) -> np.ndarray:
    """H(tau) from masses a (P, M+1) at taus (S,) -> (P, S)."""
    return a @ _powers(taus, a.shape[-1] - 1).T


def _energy_from_masses(a: np.ndarray, taus) -> np.ndarray:
    m = np.arange(a.shape[-1])
    return (a * m) @ _powers(taus, a.shape[-1] - 1).T


def frequency_from_masses(a: np.ndarray, taus) -> np.ndarray:
    H = mass_H(a, taus)
    if np.any(H <= TOL_ZERO):
        raise DegenerateError("H vanishes")
    return _energy_from_masses(a, taus) / H


def _base_array(base, n: int) -> np.ndarray:
    return as_points(base, n)


# ---------------------------------------------------------------------------
# functionals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrequencyValues:
    H: float
    E: float
    N: float
    D: float


@dataclass(frozen=True)
class FrequencyProfile:
    """H, E, N, D of u at one base point over a grid of scales."""

    base: SpaceTimePoint
    taus: np.ndarray
    H: np.ndarray
    E: np.ndarray
    N: np.ndarray
    D: np.ndarray

    def rows(self):
        for i in range(len(self.taus)):
            yield self.taus[i], self.H[i], self.E[i], self.N[i], self.D[i]


def functionals(u: CaloricPolynomial, base, tau: float, method: str = "spectral",
                order: int = DEFAULT_ORDER) -> FrequencyValues:
    """H, E, N and D of u at ``base`` and scale tau.

    ``method="quadrature"`` integrates u^2 and |grad u|^2 with Gauss-Hermite rules
    instead of the spectral masses.
    """
    if tau <= 0:
        raise InputError("tau must be positive")
    B = _base_array(base, u.n)
    if method == "spectral":
        a = model(u).masses(B)
        H = mass_H(a, [tau, 2 * tau])[0]
        if H[0] <= TOL_ZERO:
            raise DegenerateError("H vanishes")
        E = _energy_from_masses(a, [tau])[0, 0]
        return FrequencyValues(float(H[0]), float(E), float(E / H[0]), float(np.log2(H[1] / H[0])))
    if method == "quadrature":
        grad = u.gradient()
        sq = lambda P: u.evaluate(P) ** 2
        gsq = lambda P: sum(g.evaluate(P) ** 2 for g in grad)
        b = SpaceTimePoint.from_array(B[0])
        H = integrate_fn(sq, HeatKernelMeasure(b, tau), order)[0]
        H2 = integrate_fn(sq, HeatKernelMeasure(b, 2 * tau), order)[0]
        if H <= TOL_ZERO:
            raise DegenerateError("H vanishes")
        E = 2 * tau * integrate_fn(gsq, HeatKernelMeasure(b, tau), order)[0]
        return FrequencyValues(H, E, E / H, math.log2(H2 / H))
    raise InputError(f"unknown method {method!r}")


def geometric_taus(tau_min: float, tau_max: float, ratio: float = 2 ** 0.125) -> np.ndarray:
    if not 0 < tau_min <= tau_max:
        raise InputError("need 0 < tau_min <= tau_max")
    k = int(math.floor(math.log(tau_max / tau_min) / math.log(ratio) + 1e-9))
    return tau_min * ratio ** np.arange(k + 1)


def profile(u: CaloricPolynomial, base, taus) -> FrequencyProfile:
    """Frequency profile over the given scales."""
    taus = np.asarray(taus, dtype=float)
    B = _base_array(base, u.n)
    a = model(u).masses(B)
    H = mass_H(a, taus)[0]
    if np.any(H <= TOL_ZERO):
        raise DegenerateError("H vanishes")
    E = _energy_from_masses(a, taus)[0]
    H2 = mass_H(a, 2 * taus)[0]
    return FrequencyProfile(SpaceTimePoint.from_array(B[0]), taus, H, E, E / H, np.log2(H2 / H))


def frequency(u: CaloricPolynomial, bases, taus) -> np.ndarray:
    """N at many base points and scales: array (P, S)."""
    return frequency_from_masses(model(u).masses(_base_array(bases, u.n)), np.atleast_1d(taus))


def directional(u: CaloricPolynomial, base, s: float, L) -> tuple[float, float]:
    """(N_{s;L}, T_s) = (2s int |pi_L grad u|^2 / H_s, 2 s^2 int |d_t u|^2 / H_s)."""
    n = u.n
    B = _base_array(base, n)
    L = np.asarray(L, dtype=float).reshape(-1, n) if np.size(L) else np.zeros((0, n))
    Pm = L.T @ np.linalg.pinv(L.T) if L.shape[0] else np.zeros((n, n))
    mdl = model(u)
    H = mass_H(mdl.masses(B), [s])[0, 0]
    if H <= TOL_ZERO:
        raise DegenerateError("H vanishes")
    G = mdl.derivative_gram(B)[0]
    pw = s ** np.arange(G.shape[-1])
    Gs = G @ pw
    NL = 2 * s * float(np.sum(Pm * Gs[:n, :n])) / H
    T = 2 * s * s * float(Gs[n, n]) / H
    return NL, T


def directional_batch(u: CaloricPolynomial, bases, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Spatial gradient Gram matrices and time energy at scale s, normalized by H_s.

    Returns ``(G, T)`` with G[p] = int grad u (x) grad u dnu_s / H_s (n x n) and
    T[p] = int (d_t u)^2 dnu_s / H_s.
    """
    B = _base_array(bases, u.n)
    mdl = model(u)
    H = mass_H(mdl.masses(B), [s])[:, 0]
    Gr = mdl.derivative_gram(B) @ (s ** np.arange(mdl.deriv.max_degree + 1))
    n = u.n
    return Gr[:, :n, :n] / H[:, None, None], Gr[:, n, n] / H


@lru_cache(maxsize=256)
def _drift_expansion(u: CaloricPolynomial, base: tuple) -> LocalExpansion:
    """Expansion of (A u)^2, (A u) u and u^2 for the drift operator A based at ``base``."""
    Au = DriftOperator(SpaceTimePoint.from_array(np.array(base)))(u)
    return LocalExpansion([Au * Au, Au * u, u * u])


def frequency_derivative(u: CaloricPolynomial, base, tau: float, rel_step: float = 1e-3) -> tuple[float, float]:
    """N'(tau) from the squared drift residual, and by Richardson-extrapolated differences.

    The analytic value is (4 tau / H) int (Delta_f u + N u / (2 tau))^2 dnu, with
    2 tau Delta_f = A the drift operator, integrated exactly from products of
    polynomials.
    """
    if tau <= 0:
        raise InputError("tau must be positive")
    B = _base_array(base, u.n)
    I = _drift_expansion(u, tuple(B[0].tolist())).integrals(B, [tau])[0, :, 0]
    H = I[2]
    if H <= TOL_ZERO:
        raise DegenerateError("H vanishes")
    N = functionals(u, B, tau).N
    # Delta_f u + N u / (2 tau) = (A u + N u) / (2 tau)
    resid = (I[0] + 2 * N * I[1] + N * N * I[2]) / (4 * tau * tau)
    analytic = 4 * tau / H * resid
    a = model(u).masses(B)

    def Nf(t):
        return float(frequency_from_masses(a, [t])[0, 0])

    h = rel_step * tau
    d1 = (Nf(tau + h) - Nf(tau - h)) / (2 * h)
    d2 = (Nf(tau + h / 2) - Nf(tau - h / 2)) / h
    fd = (4 * d2 - d1) / 3
    return float(analytic), float(fd)


# ---------------------------------------------------------------------------
# pinching
# ---------------------------------------------------------------------------

def pinching_values(u: CaloricPolynomial, bases, r: float) -> np.ndarray:
    """E_r = N(8 r^2) - N(r^2 / 8) at many base points."""
    N = frequency(u, bases, [8 * r * r, r * r / 8])
    return N[:, 0] - N[:, 1]


def pinching(u: CaloricPolynomial, base, r: float) -> float:
    return float(pinching_values(u, base, r)[0])


@dataclass(frozen=True)
class PinchingReport:
    r: float
    E_r: float
    kalpha_pinching: float
    witness_set: IndependentSet | None
    search_failed: bool = False
    n_candidates: int = 0


def pinching_candidates(n: int, r: float, alpha: float, k: int, seed: int = 0,
                        max_candidates: int = 4000) -> np.ndarray:
    """Offsets (relative to the base) sampling P(0, r/10).

    A parabolic lattice of spacing alpha r / 40 (coarsened if it would exceed
    ``max_candidates`` points) plus 10 k seeded random points.
    """
    R = r / 10
    h = alpha * r / 40
    while True:
        m = int(math.ceil(R / h)) - 1
        mt = int(math.ceil(R * R / (h * h))) - 1
        count = (2 * m + 1) ** n * (2 * mt + 1)
        if count <= max_candidates:
            break
        h *= 1.25
    ax = np.arange(-m, m + 1) * h
    tt = np.arange(-mt, mt + 1) * h * h
    grids = np.meshgrid(*([ax] * n + [tt]), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    pts = pts[np.linalg.norm(pts[:, :-1], axis=1) < R]
    rng = np.random.default_rng(seed)
    extra = max(10 * k, 0)
    if extra:
        d = rng.normal(size=(extra, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        rad = R * rng.uniform(0, 1, size=(extra, 1)) ** (1 / n)
        tr = rng.uniform(-R * R, R * R, size=(extra, 1)) * (1 - 1e-9)
        pts = np.vstack([pts, np.column_stack([d * rad * (1 - 1e-9), tr])])
    return pts


def _min_independent_level(P: np.ndarray, vals: np.ndarray, K: int, thr: float, eps_cert: float):
    """Smallest level v such that {vals <= v} is not within thr of any Aff_P(K) plane."""
    order = np.argsort(vals, kind="stable")
    Ps, vs = P[order], vals[order]
    cut = thr * (1 + eps_cert)

    def independent(j):  # prefix [0, j]
        rad, W = covering_radius(Ps[: j + 1], K)
        return W is None or rad > cut, rad

    ok, rad = independent(len(Ps) - 1)
    if not ok:
        return np.inf, None, rad
    # distinct levels: the answer is the value at a prefix ending on a level change
    lo, hi = 0, len(Ps) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if independent(mid)[0]:
            hi = mid
        else:
            lo = mid + 1
    j = lo
    # include all ties of the critical level
    while j + 1 < len(vs) and vs[j + 1] == vs[j]:
        j += 1
    rad = independent(j)[1]
    return float(vs[lo]), Ps[: j + 1], rad


def kalpha_pinching(u: CaloricPolynomial, base, r: float, k: int, alpha: float, candidates=None,
                    seed: int = 0, eps_cert: float = 1e-3) -> PinchingReport:
    """(k, alpha r)-pinching: min over sampled (k, alpha r / 20)-independent subsets
    of P(base, r/10) of the largest single-point pinching E_r.

    The value is an upper bound for the infimum over all subsets.  When no
    independent subset exists among the candidates the report has
    ``search_failed=True`` and value inf.
    """
    n = u.n
    B = _base_array(base, n)[0]
    if candidates is None:
        offs = pinching_candidates(n, r, alpha, k, seed)
        C = B + offs
    else:
        C = as_points(candidates, n)
        inside = np.maximum(np.linalg.norm(C[:, :-1] - B[:-1], axis=1),
                            np.sqrt(np.abs(C[:, -1] - B[-1]))) < r / 10 * (1 + 1e-12)
        if not inside.all():
            raise PreconditionError("candidates must lie in P(x, r/10)")
    E = pinching_values(u, C, r)
    val, S, rad = _min_independent_level(C, E, k - 1, alpha * r / 20, eps_cert)
    witness = None
    if S is not None:
        dt = S[:, -1].max() - S[:, -1].min()
        witness = IndependentSet(S, k, alpha * r / 20, bool(dt >= (alpha * r / 20) ** 2), float(rad))
    return PinchingReport(r, pinching(u, B, r), val, witness, S is None, len(C))


def kalpha_pinching_many(u: CaloricPolynomial, bases, r: float, k: int, alpha: float,
                         seed: int = 0, cache: dict | None = None) -> np.ndarray:
    """kalpha pinching values at many bases, sharing work between base points at
    which u has the same local expansion."""
    B = _base_array(bases, u.n)
    keys = model(u).keys(B)
    out = np.empty(len(B))
    cache = {} if cache is None else cache
    for i, key in enumerate(map(lambda row: (r, k, alpha, row.tobytes()), keys)):
        if key not in cache:
            cache[key] = kalpha_pinching(u, B[i], r, k, alpha, seed=seed).kalpha_pinching
        out[i] = cache[key]
    return out


# ---------------------------------------------------------------------------
# scale search, eigen residuals, homogeneous approximation
# ---------------------------------------------------------------------------

def find_pinched_scale(u: CaloricPolynomial, base, r1: float, r2: float, eps: float) -> float | None:
    """First scale s = r2 eps^(2j+1) in (r1, r2) with N(s^2/eps^2) - N(eps^2 s^2) < eps.

    The windows [eps^2 s^2, s^2 / eps^2] are the consecutive intervals between
    the scales tau_j = r2^2 eps^(4j); the scan runs from coarse to fine.
    """
    if not 0 < r1 < r2:
        raise InputError("need 0 < r1 < r2")
    if not 0 < eps < 1:
        raise InputError("eps must lie in (0, 1)")
    a = model(u).masses(_base_array(base, u.n))
    j = 0
    while True:
        s = r2 * eps ** (2 * j + 1)
        if s <= r1:
            return None
        N = frequency_from_masses(a, [s * s / (eps * eps), eps * eps * s * s])[0]
        if N[0] - N[1] < eps:
            return float(s)
        j += 1


def nearest_integer(N: float) -> int:
    """Nearest integer with ties broken downward."""
    return int(math.ceil(N - 0.5))


@dataclass(frozen=True)
class EigenResidual:
    m: int
    residual: float
    gap_product: float
    rhs: float
    slack: float


def eigen_residual(u: CaloricPolynomial, base, tau: float) -> EigenResidual:
    """Distance of u from the nearest eigenspace, checked against the residual bound

        (N - j)(j + 1 - N) H + int (u - p_m)^2 <= 20 tau^2 int (Delta_f u + N u / (2 tau))^2

    ``residual`` is int (u - p_m)^2 / H; ``slack`` is (rhs - lhs) / H.
    """
    B = _base_array(base, u.n)
    b = SpaceTimePoint.from_array(B[0])
    f = functionals(u, B, tau)
    m = nearest_integer(f.N)
    j = int(math.floor(f.N))
    gap = (f.N - j) * (j + 1 - f.N)
    pieces = dict(spectral_decompose(u, b))
    w = u - pieces.get(m, CaloricPolynomial(u.n))
    Au = DriftOperator(b)(u)
    I = LocalExpansion([w * w, Au * Au, Au * u, u * u]).integrals(B, [tau])[0, :, 0]
    rhs = 5.0 * (I[1] + 2 * f.N * I[2] + f.N * f.N * I[3])  # 20 tau^2 * (...)/(4 tau^2)
    lhs = gap * f.H + I[0]
    return EigenResidual(m, float(I[0] / f.H), float(gap), float(rhs / f.H), float((rhs - lhs) / f.H))


def _derivative_polys(w: CaloricPolynomial, l: int, j: int) -> list:
    p = w
    for _ in range(l):
        p = p.dt()
    polys = [p]
    for _ in range(j):
        polys = [q.diff(i) for q in polys for i in range(w.n)]
    return polys


def homogeneous_error(u: CaloricPolynomial, base, tau1: float, tau2: float, delta: float | None = None,
                      n_taus: int = 8, orders=((0, 0), (0, 1), (0, 2), (1, 0))) -> dict:
    """Ratios tau^{2l+j} int |d_t^l grad^j (u - p_m)|^2 dnu_tau / (delta H(tau2)) for tau <= tau1/2.

    Hypotheses: tau1 < tau2 / 2 and N(tau2) - N(tau1) <= delta < 1/10; delta
    defaults to the observed drop.  m is the integer nearest to N(tau2).
    """
    if not 0 < tau1 < tau2 / 2:
        raise PreconditionError("need 0 < tau1 < tau2 / 2")
    B = _base_array(base, u.n)
    b = SpaceTimePoint.from_array(B[0])
    a = model(u).masses(B)
    N1, N2 = frequency_from_masses(a, [tau1, tau2])[0]
    drop = N2 - N1
    if delta is None:
        delta = max(drop, 0.0)
    if drop > delta + 1e-12:
        raise PreconditionError(f"frequency drop {drop:.3e} exceeds delta {delta:.3e}")
    if not delta < 0.1:
        raise PreconditionError("delta must be < 1/10")
    m = nearest_integer(N2)
    H2 = float(mass_H(a, [tau2])[0, 0])
    pieces = dict(spectral_decompose(u, b))
    w = u - pieces.get(m, CaloricPolynomial(u.n))
    taus = (tau1 / 2) * 2.0 ** (-np.arange(n_taus))
    table = {}
    for (l, j) in orders:
        polys = [p for p in _derivative_polys(w, l, j) if not p.is_zero()]
        if not polys:
            lhs = np.zeros(n_taus)
        else:
            sq = LocalExpansion(polys).masses(B)[0]  # (Q, M+1)
            lhs = (sq.sum(axis=0) @ _powers(taus, sq.shape[-1] - 1).T) * taus ** (2 * l + j)
        if delta > 0:
            ratio = lhs / (delta * H2)
        else:
            ratio = np.where(lhs <= 1e-300, 0.0, np.inf)
        table[(l, j)] = {"lhs": lhs, "ratio": ratio}
    return {"m": m, "delta": float(delta), "H_tau2": H2, "taus": taus, "table": table}


# ---------------------------------------------------------------------------
# checks of the monotonicity package
# ---------------------------------------------------------------------------

def doubling_gradient_check(u: CaloricPolynomial, base, s: float, L, h: float | None = None) -> dict:
    """s |pi_L grad D_s|^2 versus C (N_{2s;L} + N_{s;L}) with C = 4 / (log 2)^2.

    grad D_s is the spatial gradient in the base point, by central differences.
    """
    n = u.n
    B = _base_array(base, n)[0]
    L = np.asarray(L, dtype=float).reshape(-1, n)
    h = h or 1e-5 * math.sqrt(s)
    grads = np.zeros(n)
    shifts = []
    for i in range(n):
        e = np.zeros(n + 1)
        e[i] = h
        shifts += [B + e, B - e]
    a = model(u).masses(np.array(shifts))
    H = mass_H(a, [s, 2 * s])
    D = np.log2(H[:, 1] / H[:, 0])
    grads = (D[0::2] - D[1::2]) / (2 * h)
    Q, _ = np.linalg.qr(L.T)
    g = Q.T @ grads
    lhs = s * float(g @ g)
    N1 = directional(u, B, s, L)[0]
    N2 = directional(u, B, 2 * s, L)[0]
    C = 4 / math.log(2) ** 2
    return {"lhs": lhs, "rhs": C * (N1 + N2), "C": C}


def refined_monotonicity(u: CaloricPolynomial, base, tau: float) -> dict:
    """Data for the two refined-monotonicity statements at scale tau."""
    N, Nh = frequency(u, base, [tau, tau / 2])[0]
    eps = min(abs(N - k) for k in range(int(math.floor(N)), int(math.floor(N)) + 2)) / 5
    return {"N": float(N), "N_half": float(Nh), "drop": float(N - Nh), "eps": float(eps)}


__all__ = [
    "SpectralModel", "model", "FrequencyValues", "FrequencyProfile", "PinchingReport", "EigenResidual",
    "functionals", "profile", "frequency", "directional", "directional_batch", "frequency_derivative",
    "pinching", "pinching_values", "kalpha_pinching", "kalpha_pinching_many", "pinching_candidates",
    "find_pinched_scale", "eigen_residual", "homogeneous_error", "doubling_gradient_check",
    "refined_monotonicity", "nearest_integer", "geometric_taus", "mass_H", "frequency_from_masses",
]

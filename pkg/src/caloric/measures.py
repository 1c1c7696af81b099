"""Weighted point clouds: covariance, parabolic beta and kappa numbers,
Ahlfors regularity and discrete Carleson energies.

beta^2_{P,k}(x, r; mu) = inf_{V in Aff_P(k)} r^{-k} int_{P(x,r)} (d_P(y, V) / r)^2 dmu(y).

For vertical planes V = x_cm + L^{k-2} x R the distance is spatial, so the
infimum is the sum of the n + 2 - k smallest eigenvalues of the covariance
of mu restricted to the ball, times mu(P(x,r)) / r^{k+2}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.spatial import cKDTree

from .errors import DegenerateError, InputError
from .spacetime import ParabolicBall, ParabolicPlane, SpaceTimePoint, as_points, read_points_csv, write_points_csv


class WeightedCloud:
    """Finite measure sum_i w_i delta_{p_i} on space-time."""

    def __init__(self, points, weights=None):
        P = as_points(points)
        w = np.ones(len(P)) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
        if len(w) != len(P):
            raise InputError("weights and points differ in length")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise InputError("weights must be positive")
        self.points = P
        self.weights = w

    @property
    def n(self) -> int:
        return self.points.shape[1] - 1

    def __len__(self) -> int:
        return len(self.points)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def mask(self, ball: ParabolicBall) -> np.ndarray:
        return ball.contains(self.points, closed=True)

    def restrict(self, ball: ParabolicBall) -> "WeightedCloud":
        m = self.mask(ball)
        if not m.any():
            raise DegenerateError("empty restriction")
        return WeightedCloud(self.points[m], self.weights[m])

    def rescale(self, lam: float, center=None, weight_power: float = 0.0) -> "WeightedCloud":
        """Parabolic dilation about ``center``; weights multiplied by lam^weight_power."""
        c = np.zeros(self.n + 1) if center is None else as_points(center, self.n)[0]
        d = self.points - c
        d[:, :-1] *= lam
        d[:, -1] *= lam * lam
        return WeightedCloud(c + d, self.weights * lam ** weight_power)

    def concat(self, other: "WeightedCloud") -> "WeightedCloud":
        return WeightedCloud(np.vstack([self.points, other.points]), np.concatenate([self.weights, other.weights]))

    def to_csv(self, fh) -> None:
        write_points_csv(self.points, fh, weights=self.weights)

    @classmethod
    def from_csv(cls, path_or_text) -> "WeightedCloud":
        P, w = read_points_csv(path_or_text, weights=True)
        return cls(P, w)


def _ball(center, r: float, n: int) -> ParabolicBall:
    c = center if isinstance(center, SpaceTimePoint) else SpaceTimePoint.from_array(as_points(center, n)[0])
    return ParabolicBall(c, r)


def _sign_fix(vecs: np.ndarray) -> np.ndarray:
    """Columns with first nonzero component positive."""
    out = vecs.copy()
    for j in range(out.shape[1]):
        nz = np.flatnonzero(np.abs(out[:, j]) > 1e-12)
        if nz.size and out[nz[0], j] < 0:
            out[:, j] *= -1
    return out


def covariance(mu: WeightedCloud, ball: ParabolicBall):
    """Spatial mean, covariance and ascending eigenpairs of mu restricted to the ball,
    normalized to a probability measure."""
    sub = mu.restrict(ball)
    p = sub.weights / sub.weights.sum()
    X = sub.points[:, :-1]
    xcm = p @ X
    D = X - xcm
    Q = (D * p[:, None]).T @ D
    Q = (Q + Q.T) / 2
    lam, vecs = np.linalg.eigh(Q)
    return xcm, Q, (np.clip(lam, 0.0, None), _sign_fix(vecs))


@dataclass(frozen=True)
class BetaNumber:
    center: SpaceTimePoint
    r: float
    k: int
    value: float  # beta^2
    best_plane: ParabolicPlane | None


def _check_k(k: int, n: int):
    if not 0 <= k <= n + 2:
        raise InputError(f"k must lie in [0, {n + 2}]")


def best_vertical_plane(mu: WeightedCloud, x, r: float, k: int) -> ParabolicPlane:
    """Minimizing plane of Aff_P(k) among vertical planes: x_cm + (top k-2 eigenvectors) x R."""
    n = mu.n
    if not 2 <= k <= n + 2:
        raise InputError("vertical planes need 2 <= k <= n + 2")
    ball = _ball(x, r, n)
    xcm, _, (lam, vecs) = covariance(mu, ball)
    L = vecs[:, n - (k - 2):].T[::-1] if k > 2 else np.zeros((0, n))
    return ParabolicPlane(SpaceTimePoint(tuple(xcm), ball.center.t), L, True)


def _vertical_beta(sub: WeightedCloud, r: float, k: int, n: int):
    p = sub.weights / sub.weights.sum()
    X = sub.points[:, :-1]
    xcm = p @ X
    D = X - xcm
    Q = (D * p[:, None]).T @ D
    lam, vecs = np.linalg.eigh((Q + Q.T) / 2)
    lam = np.clip(lam, 0.0, None)
    vecs = _sign_fix(vecs)
    val = sub.mass * float(lam[: n + 2 - k].sum()) / r ** (k + 2)
    L = vecs[:, n - (k - 2):].T[::-1] if k > 2 else np.zeros((0, n))
    return val, xcm, L


def _horizontal_cost(sub: WeightedCloud, b: np.ndarray, C: np.ndarray, t0: float) -> float:
    d = (sub.points[:, :-1] - b) @ C.T if C.shape[0] else np.zeros((len(sub), 0))
    sp = np.sum(d * d, axis=1)
    return float(sub.weights @ np.maximum(sp, np.abs(sub.points[:, -1] - t0)))


def _horizontal_beta(sub: WeightedCloud, center: SpaceTimePoint, r: float, k: int, n: int, steps: int = 64):
    """Horizontal planes b + L^k x {t0}: L and b from the spatial PCA, t0 scanned."""
    p = sub.weights / sub.weights.sum()
    X = sub.points[:, :-1]
    xcm = p @ X
    D = X - xcm
    Q = (D * p[:, None]).T @ D
    _, vecs = np.linalg.eigh((Q + Q.T) / 2)
    vecs = _sign_fix(vecs)
    L = vecs[:, n - k:].T[::-1] if k else np.zeros((0, n))
    C = vecs[:, : n - k].T if k < n else np.zeros((0, n))
    grid = center.t + np.linspace(-r * r, r * r, steps + 1)
    costs = np.array([_horizontal_cost(sub, xcm, C, t0) for t0 in grid])
    i = int(np.argmin(costs))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, steps)]
    res = minimize_scalar(lambda t0: _horizontal_cost(sub, xcm, C, t0), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-14 * max(r * r, 1e-300)})
    t0, cost = (res.x, res.fun) if res.fun < costs[i] else (grid[i], costs[i])
    return cost / r ** (k + 2), ParabolicPlane(SpaceTimePoint(tuple(xcm), float(t0)), L, False)


def beta_number(mu: WeightedCloud, center, r: float, k: int, family: str = "vertical") -> BetaNumber:
    """beta^2_{P,k}(center, r; mu) over vertical planes (exact) or all planes.

    For ``family="all"`` horizontal planes through the spatial PCA frame are
    also scanned over 64 time offsets with local refinement, which gives an
    upper bound for the horizontal part.
    """
    n = mu.n
    _check_k(k, n)
    if r <= 0:
        raise InputError("r must be positive")
    if family not in ("vertical", "all"):
        raise InputError("family must be 'vertical' or 'all'")
    ball = _ball(center, r, n)
    sub = mu.restrict(ball)
    best = (np.inf, None)
    if 2 <= k <= n + 2:
        val, xcm, L = _vertical_beta(sub, r, k, n)
        best = (val, ParabolicPlane(SpaceTimePoint(tuple(xcm), ball.center.t), L, True))
    if (family == "all" or k < 2) and k <= n:
        val, plane = _horizontal_beta(sub, ball.center, r, k, n)
        if val < best[0]:
            best = (val, plane)
    return BetaNumber(ball.center, float(r), k, float(best[0]), best[1])


def _unit(angles: np.ndarray) -> np.ndarray:
    """Point on S^{d-1} from d-1 spherical angles."""
    d = len(angles) + 1
    v = np.ones(d)
    for i, a in enumerate(angles):
        v[i] *= math.cos(a)
        v[i + 1:] *= math.sin(a)
    return v


def beta_number_bruteforce(mu: WeightedCloud, center, r: float, k: int, grid: int = 90) -> float:
    """Vertical-family beta^2 by direct search over planes, without eigendecomposition.

    The plane is parametrized by a single unit vector (its direction when
    dim L = 1, its normal when dim L = n - 1), scanned on an angle grid and
    polished with Nelder-Mead.  Covers n <= 3 and k in {n, n + 1}.
    """
    n = mu.n
    d = k - 2
    sub = mu.restrict(_ball(center, r, n))
    w = sub.weights
    X = sub.points[:, :-1]
    D = X - (w @ X) / w.sum()
    total = float(w @ np.sum(D * D, axis=1))
    if d == 0:
        return total / r ** (k + 2)
    if d == n:
        return 0.0
    if d == n - 1:
        cost = lambda v: float(w @ (D @ v) ** 2)  # normal direction
    elif d == 1:
        cost = lambda v: total - float(w @ (D @ v) ** 2)
    else:
        raise InputError("brute force supports dim L in {0, 1, n-1, n}")
    if n == 1:
        return 0.0 if d == 1 else total / r ** (k + 2)
    axes = [np.linspace(0, np.pi, grid, endpoint=False)] * (n - 1)
    mesh = np.meshgrid(*axes, indexing="ij")
    A = np.stack([g.ravel() for g in mesh], axis=1)
    vals = np.array([cost(_unit(a)) for a in A])
    best = np.inf
    for i in np.argsort(vals)[:3]:
        res = minimize(lambda a: cost(_unit(a)), A[i], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 4000})
        best = min(best, res.fun, vals[i])
    return float(max(best, 0.0)) / r ** (k + 2)


def kappa_number(coords, values, center, r: float, k: int, weights=None) -> float:
    """kappa^2(x, r) = inf_l r^{-k} int_{P^V(x, r)} (|F - l| / r)^2 over spatially affine l.

    ``coords`` are samples (m, k - 1) in plane coordinates (k - 2 spatial, then t),
    ``values`` the graph offsets (m,) or (m, q).  Without ``weights`` each sample
    carries |P^V(x, r)| / (number of samples in the ball).
    """
    Y = np.asarray(coords, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    d = k - 2
    if Y.shape[1] != d + 1:
        raise InputError("coords must have k - 1 columns")
    F = np.asarray(values, dtype=float)
    F = F[:, None] if F.ndim == 1 else F
    c = np.asarray(center, dtype=float).reshape(-1)
    inside = (np.linalg.norm(Y[:, :d] - c[:d], axis=1) <= r) & (np.abs(Y[:, d] - c[d]) <= r * r)
    Y, F = Y[inside], F[inside]
    if len(Y) < d + 1:
        raise DegenerateError("fewer samples than affine parameters")
    if weights is None:
        vol = math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r ** d * 2 * r * r
        wts = np.full(len(Y), vol / len(Y))
    else:
        wts = np.asarray(weights, dtype=float)[inside]
    A = np.column_stack([np.ones(len(Y)), Y[:, :d] - c[:d]])
    sw = np.sqrt(wts)[:, None]
    if np.linalg.matrix_rank(A * sw) < A.shape[1]:
        raise DegenerateError("rank-deficient sample configuration")
    coef, *_ = np.linalg.lstsq(A * sw, F * sw, rcond=None)
    R = F - A @ coef
    return float(np.sum(wts[:, None] * R * R) / r ** (k + 2))


def _ball_masses(mu: WeightedCloud, centers: np.ndarray, s: float) -> np.ndarray:
    """mu(closed P(c, s)) for each centre."""
    P = mu.points
    Z = P.copy()
    Z[:, -1] /= s  # time box |dt| <= s^2 becomes |dt / s| <= s
    tree = cKDTree(Z)
    C = centers.copy()
    C[:, -1] /= s
    out = np.empty(len(C))
    for i, idx in enumerate(tree.query_ball_point(C, s * (1 + 1e-12), p=np.inf)):
        idx = np.asarray(idx, dtype=int)
        if idx.size:
            ok = np.linalg.norm(P[idx, :-1] - centers[i, :-1], axis=1) <= s * (1 + 1e-12)
            out[i] = mu.weights[idx[ok]].sum()
        else:
            out[i] = 0.0
    return out


def ahlfors_check(mu: WeightedCloud, k: int, scales, centers=None, n_centers: int = 32,
                  seed: int = 0, band: float = 4.0) -> dict:
    """Ratios mu(P(x, s)) / s^k over sample centres on supp mu and the given scales."""
    scales = np.asarray(scales, dtype=float)
    if centers is None:
        rng = np.random.default_rng(seed)
        idx = np.arange(len(mu)) if len(mu) <= n_centers else np.sort(rng.choice(len(mu), n_centers, replace=False))
        C = mu.points[idx]
    else:
        C = as_points(centers, mu.n)
    R = np.stack([_ball_masses(mu, C, s) / s ** k for s in scales], axis=1)
    lo, hi = float(R.min()), float(R.max())
    spread = hi / lo if lo > 0 else np.inf
    return {
        "ratios": R,
        "min": lo,
        "max": hi,
        "spread": spread,
        "constant": max(hi, 1 / lo) if lo > 0 else np.inf,
        "regular": bool(spread < band),
    }


def carleson_energy(mu: WeightedCloud, k: int, center, r: float, s_max: float | None = None,
                    levels: int = 12, scale_factor: float = 1.0, family: str = "vertical") -> float:
    """r^{-k} sum over atoms y in P(center, r) and dyadic s_i = s_max 2^{-i} of
    w_y beta^2(y, scale_factor * s_i) log 2."""
    n = mu.n
    s_max = r if s_max is None else s_max
    ball = _ball(center, r, n)
    m = mu.mask(ball)
    total = 0.0
    for i in range(levels):
        s = scale_factor * s_max * 2.0 ** (-i)
        for j in np.flatnonzero(m):
            b = beta_number(mu, mu.points[j], s, k, family).value
            total += mu.weights[j] * b * math.log(2)
    return total / r ** k


__all__ = [
    "WeightedCloud", "BetaNumber", "covariance", "beta_number", "beta_number_bruteforce",
    "best_vertical_plane", "kappa_number", "ahlfors_check", "carleson_energy",
]

"""Neck regions: axiom verification, covering checks, packing measures and a
finite-resolution greedy decomposition.

A neck region of scale r is P(x0, 2r) minus the closed balls P(x, r_x) around
a centre set C aligned with a plane V in Gr_P(k), where the frequency is
pinched near an integer m, u is almost k-symmetric with respect to V and
definitely not (k+1)-symmetric at every centre and every scale in
[r_x, gamma^-3 r].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .caloricpoly import CaloricPolynomial
from .errors import InputError
from .frequency import frequency, kalpha_pinching, model, nearest_integer, pinching_candidates
from .measures import WeightedCloud
from .spacetime import ParabolicBall, ParabolicPlane, SpaceTimePoint, as_points, independence_check
from .symmetry import _gram, _score_from_gram, best_symmetry_plane, plane_samples

GAMMA = 1 / 8
DELTA = 0.05
ETA = 0.05
ETA_B = 0.005
ALPHA = 0.25


@dataclass
class NeckRegion:
    """P(x0, 2r) minus closed balls P(c_i, r_i); centres aligned with ``plane``."""

    x0: SpaceTimePoint
    r: float
    centers: np.ndarray
    radii: np.ndarray
    plane: ParabolicPlane  # linear part; the model plane through x is x + plane
    m: int
    k: int
    delta: float = DELTA
    eta: float = ETA
    gamma: float = GAMMA
    resolution: float = 0.0  # scales below this are not resolved by a zero-radius lattice

    def __post_init__(self):
        self.centers = as_points(self.centers, self.x0.n)
        self.radii = np.asarray(self.radii, dtype=float).reshape(-1)
        if len(self.radii) != len(self.centers):
            raise InputError("one radius per centre")
        if np.any(self.radii < 0) or np.any(self.radii > self.gamma * self.r * (1 + 1e-12)):
            raise InputError("radii must lie in [0, gamma r]")

    @property
    def n(self) -> int:
        return self.x0.n

    @property
    def center_ball(self) -> ParabolicBall:
        return ParabolicBall(self.x0, 2 * self.r)

    @property
    def cloud(self) -> WeightedCloud:
        w = np.where(self.radii > 0, self.radii, 1.0) ** self.k
        return WeightedCloud(self.centers, w)

    def scales(self, rx: float, count: int = 12) -> np.ndarray:
        lo = max(rx, self.resolution, 1e-4 * self.r)
        return np.geomspace(lo, self.r / self.gamma ** 3, count)

    def to_dict(self) -> dict:
        return {
            "x0": list(self.x0.x) + [self.x0.t], "r": self.r, "m": self.m, "k": self.k,
            "delta": self.delta, "eta": self.eta, "gamma": self.gamma,
            "plane": self.plane.to_dict(), "resolution": self.resolution, "n_centers": int(len(self.centers)),
            "radius_min": float(self.radii.min()) if len(self.radii) else None,
            "radius_max": float(self.radii.max()) if len(self.radii) else None,
        }


def _pdist_rows(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.maximum(np.linalg.norm(A[:, :-1] - b[:-1], axis=1), np.sqrt(np.abs(A[:, -1] - b[-1])))


def _inside(N: NeckRegion, x: np.ndarray, s: float) -> bool:
    """P(x, s) contained in P(x0, 2r)."""
    c = N.x0.as_array()
    return np.linalg.norm(x[:-1] - c[:-1]) + s <= 2 * N.r * (1 + 1e-12) and \
        abs(x[-1] - c[-1]) + s * s <= 4 * N.r * N.r * (1 + 1e-12)


def _plane_at(N: NeckRegion, x: np.ndarray) -> ParabolicPlane:
    return ParabolicPlane(SpaceTimePoint.from_array(x), N.plane.spatial_basis, N.plane.vertical)


@dataclass
class AxiomResult:
    passed: bool
    margin: float
    detail: dict = field(default_factory=dict)


def _sample_indices(m: int, count: int, seed: int, must=()) -> np.ndarray:
    if m <= count:
        return np.arange(m)
    rng = np.random.default_rng(seed)
    idx = set(rng.choice(m, count, replace=False).tolist()) | set(must)
    return np.array(sorted(idx))


def _check_n1(N: NeckRegion) -> AxiomResult:
    rho = N.gamma ** 2 * N.radii
    pos = rho > 0
    if pos.sum() < 2:
        return AxiomResult(True, 1.0, {"pairs": 0})
    P, R = N.centers[pos], rho[pos]
    rmax = R.max()
    Z = P.copy()
    Z[:, -1] /= rmax
    pairs = cKDTree(Z).query_pairs(2 * rmax * (1 + 1e-12), p=np.inf, output_type="ndarray")
    if not len(pairs):
        return AxiomResult(True, 1.0, {"pairs": 0})
    a, b = pairs[:, 0], pairs[:, 1]
    dx = np.linalg.norm(P[a, :-1] - P[b, :-1], axis=1) / (R[a] + R[b])
    dt = np.abs(P[a, -1] - P[b, -1]) / (R[a] ** 2 + R[b] ** 2)
    sep = np.maximum(dx, dt) - 1  # >= 0 means disjoint open balls
    worst = int(np.argmin(sep))
    margin = float(min(sep[worst], 1.0))
    return AxiomResult(bool(sep.min() >= 0), margin, {"pairs": int(len(pairs)), "worst_pair": (int(a[worst]), int(b[worst]))})


def _check_n2_n3(u: CaloricPolynomial, N: NeckRegion, idx: np.ndarray, n_scales: int):
    mdl = model(u)
    keys = mdl.keys(N.centers[idx])
    seen: dict = {}
    worst2, worst3s, worst3b = -np.inf, -np.inf, np.inf
    where = {}
    for j, i in enumerate(idx):
        key = (keys[j].tobytes(), float(N.radii[i]))
        if key not in seen:
            x = N.centers[i]
            S = N.scales(N.radii[i], n_scales)
            dev = float(np.max(np.abs(frequency(u, x, S * S)[0] - N.m)))
            sym, best = -np.inf, np.inf
            for s in S:
                G, T = _gram(u, x, s)
                sym = max(sym, _score_from_gram(G, T, s, N.plane.spatial_basis, N.plane.vertical))
                if N.k + 1 <= u.n + 2:
                    best = min(best, best_symmetry_plane(u, x, s, N.k + 1).score)
            seen[key] = (dev, sym, best)
        dev, sym, best = seen[key]
        if dev > worst2:
            worst2, where["n2"] = dev, int(i)
        if sym > worst3s:
            worst3s, where["n3_sym"] = sym, int(i)
        if best < worst3b:
            worst3b, where["n3_not"] = best, int(i)
    n2 = AxiomResult(bool(worst2 < N.delta), float(N.delta - worst2), {"max_dev": worst2, "at": where.get("n2")})
    m3 = min(N.delta - worst3s, worst3b - N.eta)
    n3 = AxiomResult(bool(worst3s <= N.delta and worst3b > N.eta), float(m3),
                     {"max_score_V": worst3s, "min_score_k1": worst3b, "at": where})
    return n2, n3


class _CenterIndex:
    """Neighbour queries under d_P using a Chebyshev box prefilter per scale."""

    def __init__(self, P: np.ndarray):
        self.P = P
        self._trees: dict = {}

    def within(self, x: np.ndarray, s: float) -> np.ndarray:
        key = round(math.log(s), 6)
        if key not in self._trees:
            Z = self.P.copy()
            Z[:, -1] /= s
            self._trees[key] = (cKDTree(Z), s)
        tree, s0 = self._trees[key]
        z = x.copy()
        z[-1] /= s0
        cand = np.asarray(tree.query_ball_point(z, s * (1 + 1e-12), p=np.inf), dtype=int)
        if not cand.size:
            return cand
        d = _pdist_rows(self.P[cand], x)
        return cand[d < s]


def _check_n4(N: NeckRegion, idx: np.ndarray, n_scales: int, strong: bool, per_axis: int = 5):
    index = _CenterIndex(N.centers)
    worst_a, worst_b, worst_bp = np.inf, np.inf, np.inf
    at_a = at_b = at_bp = None
    checked = 0
    rmax = float(N.radii.max()) if len(N.radii) else 0.0
    for i in idx:
        x = N.centers[i]
        W = _plane_at(N, x)
        for s in N.scales(N.radii[i], n_scales):
            if not _inside(N, x, s):
                continue
            checked += 1
            near = index.within(x, s)
            if near.size:
                d = W.distance(N.centers[near]) / s
                m = N.delta - float(d.max())
                if m < worst_a:
                    worst_a, at_a = m, (int(i), float(s), int(near[int(np.argmax(d))]))
            V = plane_samples(x, N.plane, s, per_axis)
            reach = 10 * N.gamma * (s + rmax)
            for v in V:
                cand = index.within(v, reach)
                if cand.size:
                    d = _pdist_rows(N.centers[cand], v)
                    cover = float(np.max(1 - d / (10 * N.gamma * (s + N.radii[cand]))))
                    near_d = float(d.min())
                else:
                    cover, near_d = -1.0, np.inf
                if cover < worst_b:
                    worst_b, at_b = cover, (int(i), float(s), v.tolist())
                if strong:
                    mp = 1 - near_d / (N.gamma * s)
                    if mp < worst_bp:
                        worst_bp, at_bp = mp, (int(i), float(s), v.tolist())
    res = {
        "n4a": AxiomResult(bool(worst_a >= 0), float(worst_a if checked else 1.0), {"at": at_a, "checked": checked}),
        "n4b": AxiomResult(bool(worst_b > 0), float(worst_b if checked else 1.0), {"at": at_b, "checked": checked}),
    }
    if strong:
        res["n4b'"] = AxiomResult(bool(worst_bp > 0), float(worst_bp if checked else 1.0), {"at": at_bp})
    return res


def _check_n5(N: NeckRegion) -> AxiomResult:
    if len(N.centers) < 2:
        return AxiomResult(True, N.delta, {})
    Z = N.centers.copy()
    scale = max(float(np.ptp(Z[:, :-1])) if Z.shape[1] > 1 else 0.0, 1e-12)
    tree = cKDTree(np.column_stack([Z[:, :-1], Z[:, -1] / scale]))
    kk = min(8, len(Z))
    _, nb = tree.query(np.column_stack([Z[:, :-1], Z[:, -1] / scale]), k=kk)
    worst = -np.inf
    for i in range(len(Z)):
        for j in np.atleast_1d(nb[i])[1:]:
            d = float(_pdist_rows(Z[j][None, :], Z[i])[0])
            if d > 0:
                worst = max(worst, abs(N.radii[i] - N.radii[j]) / d)
    return AxiomResult(bool(worst <= N.delta), float(N.delta - worst), {"lipschitz": worst})


def verify_neck(u: CaloricPolynomial, N: NeckRegion, strong: bool = False, n_centers: int = 64,
                n_scales: int = 12, seed: int = 0) -> dict:
    """Check the neck axioms; returns {axiom: AxiomResult} plus an overall flag.

    (n1) is checked on all centres; the frequency and symmetry axioms on all
    centres with distinct local expansions; (n4) on a seeded sample of centres
    (always including x0) and a geometric grid of scales in [r_x, gamma^-3 r].
    """
    if u.n != N.n:
        raise InputError("dimension mismatch")
    x0i = int(np.argmin(_pdist_rows(N.centers, N.x0.as_array())))
    out = {"n1": _check_n1(N)}
    allidx = np.arange(len(N.centers))
    out["n2"], out["n3"] = _check_n2_n3(u, N, allidx, n_scales)
    sample = _sample_indices(len(N.centers), n_centers, seed, must=(x0i,))
    out.update(_check_n4(N, sample, n_scales, strong))
    if strong:
        out["n5"] = _check_n5(N)
    out["passed"] = all(v.passed for k, v in out.items() if isinstance(v, AxiomResult))
    return out


def whitney_cover_check(N: NeckRegion, n_centers: int = 32, n_scales: int = 6, per_axis: int = 7,
                        seed: int = 0, containment: float = 2.0) -> dict:
    """Projected covering P^V(pi(x), 7s/4) within the union of closed P^V(pi(z), r_z), z in C cap P(x, 9s/5).

    Scales run over [r_x / gamma, r] subject to P(x, containment * s) inside
    P(x0, 2r).  With a factor below 7/4 the projected ball can leave the neck
    ball in time, so the default is 2.  Zero-radius centres count with radius
    gamma * resolution, the covering scale of the lattice they stand for.
    Returns uncovered witnesses and counts of checked and skipped (x, s) pairs.
    """
    W0 = N.plane
    L = W0.spatial_basis
    index = _CenterIndex(N.centers)

    def proj(P):
        P = np.atleast_2d(P)
        coords = P[:, :-1] @ L.T if L.shape[0] else np.zeros((len(P), 0))
        cols = [coords]
        cols.append(P[:, -1:] if W0.vertical else np.zeros((len(P), 1)))
        return np.hstack(cols)

    def pv_dist(A, b):
        d = A.shape[1] - 1
        sx = np.linalg.norm(A[:, :d] - b[:d], axis=1)
        return np.maximum(sx, np.sqrt(np.abs(A[:, d] - b[d])))

    uncovered, checked, skipped = [], 0, 0
    for i in _sample_indices(len(N.centers), n_centers, seed):
        x = N.centers[i]
        lo = max(N.radii[i], N.resolution) / N.gamma
        if lo > N.r:
            skipped += 1
            continue
        for s in np.geomspace(max(lo, 1e-4 * N.r), N.r, n_scales):
            if not _inside(N, x, containment * s):
                skipped += 1
                continue
            checked += 1
            px = proj(x)[0]
            near = index.within(x, 9 * s / 5)
            Z = proj(N.centers[near])
            rz = np.maximum(N.radii[near], N.gamma * N.resolution)
            d = len(px) - 1
            ax = [np.linspace(-7 * s / 4, 7 * s / 4, per_axis)[1:-1]] * d
            ax.append(np.linspace(-(7 * s / 4) ** 2, (7 * s / 4) ** 2, 4 * per_axis)[1:-1] if W0.vertical else np.zeros(1))
            grids = np.meshgrid(*ax, indexing="ij")
            S = px + np.stack([g.ravel() for g in grids], axis=1)
            S = S[np.linalg.norm(S[:, :d] - px[:d], axis=1) < 7 * s / 4]
            for y in S:
                if not np.any(pv_dist(Z, y) <= rz * (1 + 1e-9) + 1e-12):
                    uncovered.append({"center": int(i), "s": float(s), "point": y.tolist()})
                    break
    return {"covered": not uncovered, "uncovered": uncovered, "checked": checked, "skipped": skipped}


def packing_measure(N: NeckRegion, k_eff: int | None = None, surface_h: float | None = None) -> WeightedCloud:
    """mu = sum r_x^k delta_x over centres with r_x > 0, plus weight h^k per
    zero-radius centre as a lattice surrogate of the surface part."""
    k = N.k if k_eff is None else k_eff
    pos = N.radii > 0
    w = np.empty(len(N.radii))
    w[pos] = N.radii[pos] ** k
    if (~pos).any():
        if surface_h is None:
            raise InputError("surface_h is needed for zero-radius centres")
        w[~pos] = surface_h ** k
    return WeightedCloud(N.centers, w)


# ---------------------------------------------------------------------------
# greedy decomposition
# ---------------------------------------------------------------------------

@dataclass
class Decomposition:
    necks: list
    b_balls: list
    f_balls: list
    ledger: dict
    counts: dict
    partial: bool = False
    log: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "necks": [nk.to_dict() for nk in self.necks],
            "b_balls": [{"center": list(c), "r": r} for c, r in self.b_balls],
            "f_balls": len(self.f_balls),
            "ledger": self.ledger,
            "counts": self.counts,
            "partial": self.partial,
        }


def _lattice(x: np.ndarray, R: float, per_axis: int) -> np.ndarray:
    n = len(x) - 1
    s = np.linspace(-1, 1, per_axis)
    grids = np.meshgrid(*([s * R] * n + [s * R * R]), indexing="ij")
    P = np.stack([g.ravel() for g in grids], axis=1)
    P = P[np.linalg.norm(P[:, :-1], axis=1) < R * (1 - 1e-9) + 1e-300]
    return x + P


def _children(x: np.ndarray, r: float, ratio: float) -> np.ndarray:
    """Centres of balls of radius ratio * r whose union covers P(x, r)."""
    n = len(x) - 1
    rho = ratio * r
    a = 2 * rho / math.sqrt(n) * 0.999
    b = 2 * rho * rho * 0.999
    mx = int(math.ceil(r / a))
    mt = int(math.ceil(r * r / b))
    axes = [np.arange(-mx, mx + 1) * a] * n + [np.arange(-mt, mt + 1) * b]
    grids = np.meshgrid(*axes, indexing="ij")
    P = np.stack([g.ravel() for g in grids], axis=1)
    # keep boxes meeting the ball
    near = np.linalg.norm(np.maximum(np.abs(P[:, :-1]) - a / 2, 0), axis=1) < r
    near &= np.abs(P[:, -1]) - b / 2 < r * r
    return x + P[near]


def _pinched_set(u, x, r, m, delta, per_axis, n_scales=8):
    Y = _lattice(x, 4 * r, per_axis)
    S = np.geomspace(delta * r, r / delta, n_scales)
    N = frequency(u, Y, S * S)
    ok = np.all(np.abs(N - m) <= delta, axis=1)
    return Y[ok]


def _abs_keys(u, Y) -> list:
    """Batch-independent cache keys: local coefficients rounded to 11 significant digits."""
    C = model(u).value.coefficients(Y)[:, 0, :]
    return [np.array([float(f"{c:.11g}") for c in row]).tobytes() for row in C]


def _b_test(u, x, r, k, eta_b, per_axis, cache, max_candidates=300, seed=0):
    Y = _lattice(x, 4 * r, per_axis)
    keys = _abs_keys(u, Y)
    s = 100 * r
    offs = pinching_candidates(u.n, s, 1.0, k + 1, seed, max_candidates)
    for i, y in enumerate(Y):
        key = (keys[i], s)
        if key not in cache:
            cache[key] = kalpha_pinching(u, y, s, k + 1, 1.0, candidates=y + offs).kalpha_pinching
        if cache[key] <= eta_b:
            return y, cache[key]
    return None, None


def _net(xc: np.ndarray, V: ParabolicPlane, R: float, spacing: float, max_centers: int) -> tuple[np.ndarray, float]:
    """Points of xc + V inside P(xc, R) with parabolic spacing (coarsened to respect max_centers)."""
    d = V.spatial_basis.shape[0]
    while True:
        m = int(math.ceil(R / spacing)) - 1
        mt = int(math.ceil(R * R / spacing ** 2)) - 1 if V.vertical else 0
        if (2 * m + 1) ** d * (2 * mt + 1) <= max_centers:
            break
        spacing *= 1.25
    axes = [np.arange(-m, m + 1) * spacing] * d + [np.arange(-mt, mt + 1) * spacing ** 2]
    grids = np.meshgrid(*axes, indexing="ij")
    C = np.stack([g.ravel() for g in grids], axis=1)
    P = np.tile(xc, (len(C), 1))
    if d:
        P[:, :-1] += C[:, :d] @ V.spatial_basis
    P[:, -1] += C[:, -1]
    keep = _pdist_rows(P, xc) < R
    return P[keep], spacing


def greedy_neck_decomposition(u: CaloricPolynomial, ball: ParabolicBall, k: int, r_star: float,
                              eps: float = DELTA, eta: float = ETA, delta: float = DELTA, alpha: float = ALPHA,
                              gamma: float = GAMMA, eta_b: float = ETA_B, ratio: float = 0.5,
                              max_depth: int = 12, max_balls: int = 2000, per_axis: int = 9, b_per_axis: int = 3,
                              max_centers: int = 200_000, seed: int = 0) -> Decomposition:
    """Recursive classification of balls into necks, b-balls and f-balls.

    b: E^{k+1,1}_{100 r}(y) <= eta_b at a sampled y in P(x, 4r).
    c: the sampled pinched set V_{delta,m,r}(x) is (k, alpha r)-independent; a
       neck is built on x_c + V with x_c the pinched point nearest x and V the
       best k-plane of symmetry at x_c; centres form a net of spacing r_* with
       radii r_* (these centre balls are the f-balls of the neck).
    d/e: the ball is split into children of radius ratio * r (for e-balls the
       integer m is re-read at the child centres).
    f: radius at most r_*.
    """
    n = u.n
    if not 1 <= k <= n + 1:
        raise InputError("k must lie in [1, n + 1]")
    if r_star <= 0:
        raise InputError("r_star must be positive")
    x_top = ball.center.as_array()
    m_top = nearest_integer(float(frequency(u, x_top, [ball.radius ** 2])[0, 0]))
    queue = [(x_top, ball.radius, 0, m_top)]
    necks, b_balls, f_balls = [], [], []
    counts = {"b": 0, "c": 0, "d": 0, "e": 0, "f": 0}
    cache: dict = {}
    log = []
    partial = False
    processed = 0
    while queue:
        x, r, depth, m = queue.pop(0)
        processed += 1
        if processed > max_balls:
            partial = True
            break
        if r <= r_star * (1 + 1e-12):
            f_balls.append((tuple(x), r))
            counts["f"] += 1
            continue
        y, val = _b_test(u, x, r, k, eta_b, b_per_axis, cache, seed=seed)
        if y is not None:
            b_balls.append((tuple(x), r))
            counts["b"] += 1
            log.append(("b", tuple(x), r, float(val)))
            continue
        Vset = _pinched_set(u, x, r, m, delta, per_axis)
        kind = "e"
        if len(Vset):
            res = independence_check(Vset, k, alpha * r)
            kind = "d" if isinstance(res, ParabolicPlane) else "c"
        if kind == "c" and gamma * r >= r_star and depth < max_depth:
            xc = Vset[int(np.argmin(_pdist_rows(Vset, x)))]
            V = best_symmetry_plane(u, xc, r, k).plane
            C, spacing = _net(xc, V, 2 * r, r_star, max_centers)
            rad = min(spacing, gamma * r)
            S = np.geomspace(rad, r / gamma ** 3, 12)
            keys = model(u).keys(C)
            good = np.ones(len(C), dtype=bool)
            seen: dict = {}
            for i in range(len(C)):
                kb = keys[i].tobytes()
                if kb not in seen:
                    seen[kb] = bool(np.all(np.abs(frequency(u, C[i], S * S)[0] - m) < delta))
                good[i] = seen[kb]
            good[int(np.argmin(_pdist_rows(C, xc)))] = True
            neck = NeckRegion(SpaceTimePoint.from_array(xc), r, C[good], np.full(good.sum(), rad), V, m, k,
                              delta, eta, gamma)
            necks.append(neck)
            counts["c"] += 1
            log.append(("c", tuple(x), r, int(good.sum())))
            for c in C[~good]:
                queue.append((c, gamma * r, depth + 1, m))
            # parts of P(x, r) outside the neck ball
            for c in _children(x, r, ratio):
                if _pdist_rows(c[None, :], xc)[0] + ratio * r > 2 * r:
                    queue.append((c, ratio * r, depth + 1, m))
            continue
        if depth >= max_depth:
            partial = True
            f_balls.append((tuple(x), r))
            continue
        counts[kind if kind != "c" else "d"] += 1
        log.append((kind, tuple(x), r))
        for c in _children(x, r, ratio):
            mm = m if kind != "e" else nearest_integer(float(frequency(u, c, [(ratio * r) ** 2])[0, 0]))
            queue.append((c, ratio * r, depth + 1, mm))
    ledger = {
        "neck": float(sum(nk.r ** k for nk in necks)),
        "b": float(sum(r ** k for _, r in b_balls)),
        "f": float(sum(r ** k for _, r in f_balls) + sum(float(np.sum(nk.radii ** k)) for nk in necks)),
    }
    ledger["total"] = ledger["neck"] + ledger["b"] + ledger["f"]
    return Decomposition(necks, b_balls, f_balls, ledger, counts, partial, log)


def covered(dec: Decomposition, points) -> np.ndarray:
    """Which points lie in some output region (neck ball, b-ball or f-ball)."""
    P = as_points(points)
    hit = np.zeros(len(P), dtype=bool)
    for nk in dec.necks:
        hit |= _pdist_rows(P, nk.x0.as_array()) < 2 * nk.r
    for c, r in dec.b_balls + dec.f_balls:
        hit |= _pdist_rows(P, np.array(c)) < r * (1 + 1e-12)
    return hit


__all__ = [
    "NeckRegion", "AxiomResult", "Decomposition", "verify_neck", "whitney_cover_check", "packing_measure",
    "greedy_neck_decomposition", "covered", "GAMMA", "DELTA", "ETA", "ETA_B", "ALPHA",
]

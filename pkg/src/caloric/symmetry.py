"""Quantitative symmetry of caloric polynomials.

u is (k, eps, r)-symmetric at x with respect to V in Gr_P(k) when

    horizontal V = L x {0}:   r^2 int |pi_L grad u|^2 dnu <= eps H
    vertical   V = L x R:     r^2 int |pi_L grad u|^2 dnu + r^4 int |d_t u|^2 dnu <= eps H

with all integrals at scale tau = r^2.  Scores are the normalized left sides.
Both are traces of the normalized gradient Gram matrix G against a projection,
so by the Ky Fan principle the eigenvectors of G give the best plane exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .caloricpoly import CaloricPolynomial
from .errors import InputError, NumericError
from .frequency import directional_batch, frequency, kalpha_pinching, model
from .spacetime import ParabolicPlane, SpaceTimePoint, as_points


@dataclass(frozen=True)
class SymmetryScore:
    plane: ParabolicPlane
    r: float
    score: float
    mode: str  # "spatial" (horizontal plane) or "temporal" (vertical plane)


def _gram(u: CaloricPolynomial, x0, r: float) -> tuple[np.ndarray, float]:
    G, T = directional_batch(u, x0, r * r)
    return G[0], float(T[0])


def _score_from_gram(G: np.ndarray, T: float, r: float, L: np.ndarray, vertical: bool) -> float:
    s = r * r * float(np.sum((L @ G) * L)) if L.shape[0] else 0.0
    if vertical:
        s += r ** 4 * T
    return max(s, 0.0)


def symmetry_score(u: CaloricPolynomial, x0, r: float, V: ParabolicPlane) -> SymmetryScore:
    """Smallest eps for which u is (k, eps, r)-symmetric at x0 with respect to V."""
    if r <= 0:
        raise InputError("r must be positive")
    if V.n != u.n:
        raise InputError("plane dimension mismatch")
    G, T = _gram(u, x0, r)
    L = V.spatial_basis
    return SymmetryScore(V.linear_part(), r, _score_from_gram(G, T, r, L, V.vertical),
                         "temporal" if V.vertical else "spatial")


def _sign_convention(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for i, v in enumerate(out):
        nz = np.flatnonzero(np.abs(v) > 1e-12)
        if nz.size and v[nz[0]] < 0:
            out[i] = -v
    return out


def best_symmetry_plane(u: CaloricPolynomial, x0, r: float, k: int) -> SymmetryScore:
    """Plane in Gr_P(k) minimizing the symmetry score at x0 and scale r.

    Horizontal candidate: the k lowest eigenvectors of G.  Vertical candidate
    (k >= 2): the k - 2 lowest eigenvectors plus the time axis.  The lower score
    wins, ties going to the horizontal plane.
    """
    n = u.n
    if not 1 <= k <= n + 2:
        raise InputError(f"k must lie in [1, {n + 2}]")
    G, T = _gram(u, x0, r)
    try:
        w, vecs = np.linalg.eigh((G + G.T) / 2)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigh on a small symmetric matrix
        raise NumericError("eigen-solver failure") from exc
    vecs = _sign_convention(vecs.T)
    origin = SpaceTimePoint.origin(n)
    best = None
    if k <= n:
        L = vecs[:k]
        P = ParabolicPlane(origin, L, False)
        best = SymmetryScore(P, r, _score_from_gram(G, T, r, P.spatial_basis, False), "spatial")
    if k >= 2:
        L = vecs[: k - 2]
        P = ParabolicPlane(origin, L, True)
        cand = SymmetryScore(P, r, _score_from_gram(G, T, r, P.spatial_basis, True), "temporal")
        if best is None or cand.score < best.score:
            best = cand
    return best


def brute_force_symmetry(u: CaloricPolynomial, x0, r: float, k: int, n_angles: int = 720) -> float:
    """Grid search over Gr_P(k) for n <= 2 (cross-validation of the eigen construction)."""
    n = u.n
    if n > 2:
        raise InputError("brute force only for n <= 2")
    G, T = _gram(u, x0, r)
    vals = []
    for vertical, d in ((False, k), (True, k - 2)):
        if d < 0 or d > n:
            continue
        if d == 0:
            vals.append(_score_from_gram(G, T, r, np.zeros((0, n)), vertical))
        elif d == n:
            vals.append(_score_from_gram(G, T, r, np.eye(n), vertical))
        else:  # n = 2, d = 1
            th = np.linspace(0, np.pi, n_angles, endpoint=False)
            for a in th:
                vals.append(_score_from_gram(G, T, r, np.array([[np.cos(a), np.sin(a)]]), vertical))
    return float(min(vals))


# ---------------------------------------------------------------------------
# pinching <-> symmetry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PinchingSymmetryReport:
    pinching: float
    score: float
    ratio: float
    plane: ParabolicPlane
    search_failed: bool
    ok: bool | None = None


def pinching_to_symmetry(u: CaloricPolynomial, x0, r: float, k: int, alpha: float,
                         ratio_bound: float | None = None, threshold: float = np.inf,
                         seed: int = 0) -> PinchingSymmetryReport:
    """Compare the (k, alpha r)-pinching with the best k-symmetry score at scale r.

    When ``ratio_bound`` is given and the pinching is below ``threshold`` the
    report records whether score <= ratio_bound * pinching.
    """
    rep = kalpha_pinching(u, x0, r, k, alpha, seed=seed)
    best = best_symmetry_plane(u, x0, r, k)
    p = rep.kalpha_pinching
    if p > 0 and np.isfinite(p):
        ratio = best.score / p
    else:
        ratio = 0.0 if best.score <= 1e-14 else np.inf
    ok = None
    if ratio_bound is not None and p < threshold:
        ok = bool(best.score <= ratio_bound * p + 1e-14)
    return PinchingSymmetryReport(float(p), best.score, float(ratio), best.plane, rep.search_failed, ok)


def plane_samples(x0, V: ParabolicPlane, radius: float, per_axis: int = 5) -> np.ndarray:
    """Lattice points of (x0 + V) inside P(x0, radius)."""
    B = as_points(x0)[0]
    n = len(B) - 1
    L = V.spatial_basis
    c = np.linspace(-radius, radius, per_axis + 2)[1:-1]
    axes = [c] * L.shape[0]
    if V.vertical:
        axes.append(np.linspace(-radius ** 2, radius ** 2, per_axis + 2)[1:-1])
    if not axes:
        return B[None, :].copy()
    grids = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([g.ravel() for g in grids], axis=1)
    pts = np.tile(B, (len(coords), 1))
    if L.shape[0]:
        pts[:, :n] += coords[:, : L.shape[0]] @ L
    if V.vertical:
        pts[:, n] += coords[:, -1]
    keep = np.maximum(np.linalg.norm(pts[:, :n] - B[:n], axis=1), np.sqrt(np.abs(pts[:, n] - B[n]))) < radius
    pts = pts[keep]
    if not np.any(np.all(np.isclose(pts, B), axis=1)):
        pts = np.vstack([B, pts])
    return pts


def symmetry_to_pinching(u: CaloricPolynomial, x0, r: float, kappa: float, V: ParabolicPlane, eps: float,
                         per_axis: int = 5, offset: np.ndarray | None = None) -> dict:
    """Frequency variation |N_v(50 r^2) - N_v(kappa^2 r^2 / 50)| along (x0 + V) within P(x0, 10r).

    Preconditions (symmetry at scale 100 r and pinching of N at x0) are checked
    and reported rather than enforced.  ``offset`` shifts the sample points off
    the plane for control runs.
    """
    sym = symmetry_score(u, x0, 100 * r, V).score
    N = frequency(u, x0, [1e-2 * kappa ** 2 * r ** 2, 1e2 * r ** 2])[0]
    drop = abs(N[1] - N[0])
    pts = plane_samples(x0, V, 10 * r, per_axis)
    if offset is not None:
        pts = pts + np.asarray(offset, dtype=float)
    NN = frequency(u, pts, [50 * r * r, kappa ** 2 * r * r / 50])
    var = np.abs(NN[:, 0] - NN[:, 1])
    mv = float(var.max())
    return {
        "symmetry": float(sym),
        "drop": float(drop),
        "preconditions_hold": bool(sym <= eps and drop <= eps),
        "max_variation": mv,
        "sqrt_eps": math.sqrt(eps),
        "ratio": mv / math.sqrt(eps) if eps > 0 else (0.0 if mv == 0 else np.inf),
        "points": pts,
        "variation": var,
    }


def propagation_check(u: CaloricPolynomial, x0, r: float, V: ParabolicPlane, betas=(0.5, 0.25, 0.125)) -> list:
    """Symmetry score at s = beta r against beta^(-2 Lambda) times the score at r,
    with Lambda = N(10^5 r^2)."""
    Lam = float(frequency(u, x0, [1e5 * r * r])[0, 0])
    top = symmetry_score(u, x0, r, V).score
    rows = []
    for b in betas:
        s = symmetry_score(u, x0, b * r, V).score
        rows.append({"beta": b, "score": s, "bound": b ** (-2 * Lam) * top})
    return rows


def dimension_reduction_probe(u: CaloricPolynomial, x0, r: float, V: ParabolicPlane, eta: float, eps: float,
                              betas=None, per_axis: int = 5, max_candidates: int = 800,
                              seed: int = 0) -> dict:
    """Scan sample points y in P(x0, 2r) away from P(x0 + V, eta r) for scales
    beta r with E^{k+1,1}_{beta r}(y) < eps.

    Scales are scanned from beta = 1 downward and the first (largest) hit is
    reported per point; points with no hit report ``None``.
    """
    k = V.k
    n = u.n
    if k + 1 > n + 2:
        raise InputError("k + 1 exceeds n + 2")
    if betas is None:
        betas = 2.0 ** -np.arange(0, 8)
    B = as_points(x0)[0]
    ax = np.linspace(-2 * r, 2 * r, per_axis + 2)[1:-1]
    at = np.linspace(-4 * r * r, 4 * r * r, per_axis + 2)[1:-1]
    grids = np.meshgrid(*([ax] * n + [at]), indexing="ij")
    Y = B + np.stack([g.ravel() for g in grids], axis=1)
    W = ParabolicPlane(SpaceTimePoint.from_array(B), V.spatial_basis, V.vertical)
    Y = Y[W.distance(Y) >= eta * r]
    rows = []
    from .frequency import pinching_candidates
    for y in Y:
        hit, val = None, None
        for b in betas:
            s = b * r
            cands = y + pinching_candidates(n, s, 1.0, k + 1, seed, max_candidates)
            v = kalpha_pinching(u, y, s, k + 1, 1.0, candidates=cands).kalpha_pinching
            if v < eps:
                hit, val = float(b), float(v)
                break
        rows.append({"y": y, "beta": hit, "value": val})
    found = [row["beta"] for row in rows if row["beta"] is not None]
    return {"rows": rows, "min_beta": min(found) if found else None,
            "n_found": len(found), "n_points": len(rows)}


__all__ = [
    "SymmetryScore", "PinchingSymmetryReport", "symmetry_score", "best_symmetry_plane",
    "brute_force_symmetry", "pinching_to_symmetry", "symmetry_to_pinching", "propagation_check",
    "dimension_reduction_probe", "plane_samples",
]

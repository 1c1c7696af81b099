"""Parabolic geometry of space-time R^n x R.

Points are written (x, t) with the parabolic norm |(x, t)|_P = max(|x|, sqrt|t|).
Balls P(x, r) are cylinders B(x, r) x (t - r^2, t + r^2).  Planes come in two
flavours: horizontal planes L x {0} (dimension dim L) and vertical planes
L x R (dimension dim L + 2).

Most routines accept either ``SpaceTimePoint`` objects or plain arrays of shape
(..., n + 1) whose last column is time.
"""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateError, InputError

ORTHO_TOL = 1e-12


# ---------------------------------------------------------------------------
# points and balls
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpaceTimePoint:
    """A point (x, t) of R^n x R."""

    x: tuple
    t: float

    def __post_init__(self):
        x = tuple(float(v) for v in np.atleast_1d(self.x))
        if len(x) < 1:
            raise InputError("spatial dimension must be at least 1")
        if not (np.all(np.isfinite(x)) and np.isfinite(self.t)):
            raise InputError("point coordinates must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return len(self.x)

    def as_array(self) -> np.ndarray:
        return np.array(self.x + (self.t,), dtype=float)

    @classmethod
    def from_array(cls, a) -> "SpaceTimePoint":
        a = np.asarray(a, dtype=float).ravel()
        return cls(tuple(a[:-1]), float(a[-1]))

    @classmethod
    def origin(cls, n: int) -> "SpaceTimePoint":
        return cls((0.0,) * n, 0.0)

    def dilate(self, lam: float, center: "SpaceTimePoint | None" = None) -> "SpaceTimePoint":
        """Parabolic dilation lam o (x, t) = (lam x, lam^2 t) about ``center``."""
        c = np.zeros(self.n + 1) if center is None else center.as_array()
        a = self.as_array() - c
        a[:-1] *= lam
        a[-1] *= lam * lam
        return SpaceTimePoint.from_array(a + c)


def as_points(points, n: int | None = None) -> np.ndarray:
    """Coerce points to a float array of shape (P, n + 1)."""
    if isinstance(points, SpaceTimePoint):
        arr = points.as_array()[None, :]
    elif isinstance(points, np.ndarray):
        arr = np.atleast_2d(np.asarray(points, dtype=float))
    else:
        seq = list(points)
        if seq and isinstance(seq[0], SpaceTimePoint):
            arr = np.array([p.as_array() for p in seq], dtype=float)
        else:
            arr = np.atleast_2d(np.asarray(seq, dtype=float))
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise InputError(f"points must have shape (P, n+1), got {arr.shape}")
    if n is not None and arr.shape[1] != n + 1:
        raise InputError(f"dimension mismatch: expected n={n}, got n={arr.shape[1] - 1}")
    return arr


def _coerce(p) -> np.ndarray:
    return p.as_array() if isinstance(p, SpaceTimePoint) else np.asarray(p, dtype=float)


def parabolic_norm(v) -> np.ndarray:
    """|(x, t)|_P = max(|x|, sqrt|t|), vectorized over leading axes."""
    v = np.asarray(v, dtype=float)
    return np.maximum(np.linalg.norm(v[..., :-1], axis=-1), np.sqrt(np.abs(v[..., -1])))


def parabolic_distance(a, b) -> float | np.ndarray:
    """Parabolic distance d_P(a, b) = max(|a.x - b.x|, sqrt|a.t - b.t|).

    Accepts points or broadcastable arrays; returns a float for two points.
    """
    A, B = _coerce(a), _coerce(b)
    if A.shape[-1] != B.shape[-1]:
        raise InputError(f"dimension mismatch: {A.shape[-1] - 1} vs {B.shape[-1] - 1}")
    d = parabolic_norm(A - B)
    return float(d) if np.ndim(d) == 0 else d


@dataclass(frozen=True)
class ParabolicBall:
    """Open parabolic ball P(center, radius)."""

    center: SpaceTimePoint
    radius: float

    def __post_init__(self):
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise InputError("ball radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def n(self) -> int:
        return self.center.n

    def contains(self, points, closed: bool = False) -> np.ndarray:
        P = as_points(points, self.n)
        d = P - self.center.as_array()
        sx = np.linalg.norm(d[:, :-1], axis=1)
        st = np.abs(d[:, -1])
        r = self.radius
        if closed:
            return (sx <= r) & (st <= r * r)
        return (sx < r) & (st < r * r)

    def volume(self) -> float:
        """Lebesgue measure of the cylinder: |B^n(r)| * 2 r^2."""
        from scipy.special import gamma
        n = self.n
        return np.pi ** (n / 2) / gamma(n / 2 + 1) * self.radius ** n * 2 * self.radius ** 2

    def lattice(self, per_axis: int = 9) -> np.ndarray:
        """Points of a parabolic lattice in the closed ball (per_axis per direction)."""
        c = self.center.as_array()
        n = self.n
        s = np.linspace(-1.0, 1.0, per_axis)
        grids = np.meshgrid(*([s * self.radius] * n + [s * self.radius ** 2]), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        pts = pts[np.linalg.norm(pts[:, :-1], axis=1) <= self.radius * (1 + 1e-12)]
        return pts + c


# ---------------------------------------------------------------------------
# planes
# ---------------------------------------------------------------------------

def orthonormalize(vectors, n: int, tol: float = 1e-10) -> np.ndarray:
    """Gram-Schmidt with full re-orthogonalization; rows of the result are orthonormal."""
    V = np.asarray(vectors, dtype=float).reshape(-1, n) if np.size(vectors) else np.zeros((0, n))
    out: list[np.ndarray] = []
    for v in V:
        w = v.copy()
        for _ in range(2):
            for q in out:
                w -= (q @ w) * q
        nv = np.linalg.norm(w)
        if nv <= tol * max(1.0, np.linalg.norm(v)):
            raise DegenerateError("basis vectors are linearly dependent")
        out.append(w / nv)
    return np.array(out).reshape(len(out), n)


def complement_basis(B: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis (rows) of the orthogonal complement of span(rows of B)."""
    if B.shape[0] == 0:
        return np.eye(n)
    if B.shape[0] >= n:
        return np.zeros((0, n))
    # full QR of B^T gives an orthonormal completion
    Q, _ = np.linalg.qr(B.T, mode="complete")
    C = Q[:, B.shape[0]:].T
    # deterministic sign: first nonzero component positive
    for i in range(C.shape[0]):
        nz = np.flatnonzero(np.abs(C[i]) > 1e-12)
        if nz.size and C[i, nz[0]] < 0:
            C[i] = -C[i]
    return C


@dataclass(frozen=True)
class ParabolicPlane:
    """Affine plane base + L x {0} (horizontal) or base + L x R (vertical).

    ``spatial_basis`` holds an orthonormal basis of L as rows.
    """

    base: SpaceTimePoint
    spatial_basis: np.ndarray
    vertical: bool

    def __post_init__(self):
        n = self.base.n
        B = np.asarray(self.spatial_basis, dtype=float).reshape(-1, n) if np.size(self.spatial_basis) \
            else np.zeros((0, n))
        if B.shape[0] > n:
            raise InputError("too many basis vectors")
        if B.shape[0] and np.max(np.abs(B @ B.T - np.eye(B.shape[0]))) > ORTHO_TOL:
            B = orthonormalize(B, n)
        B = B.copy()
        B.setflags(write=False)
        object.__setattr__(self, "spatial_basis", B)

    @classmethod
    def through(cls, base, vectors, vertical: bool) -> "ParabolicPlane":
        b = base if isinstance(base, SpaceTimePoint) else SpaceTimePoint.from_array(base)
        vecs = np.asarray(vectors, dtype=float).reshape(-1, b.n) if np.size(vectors) else np.zeros((0, b.n))
        return cls(b, orthonormalize(vecs, b.n), vertical)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def k(self) -> int:
        d = self.spatial_basis.shape[0]
        return d + 2 if self.vertical else d

    @property
    def complement(self) -> np.ndarray:
        return complement_basis(self.spatial_basis, self.n)

    def linear_part(self) -> "ParabolicPlane":
        return ParabolicPlane(SpaceTimePoint.origin(self.n), self.spatial_basis, self.vertical)

    def distance(self, points) -> np.ndarray:
        """Vectorized parabolic distance from points to the plane."""
        P = as_points(points, self.n)
        d = P - self.base.as_array()
        C = self.complement
        perp = np.linalg.norm(d[:, :-1] @ C.T, axis=1) if C.shape[0] else np.zeros(len(P))
        if self.vertical:
            return perp
        return np.maximum(perp, np.sqrt(np.abs(d[:, -1])))

    def project(self, points) -> np.ndarray:
        """Orthogonal projection pi_V onto the plane (returned in ambient coordinates)."""
        P = as_points(points, self.n)
        b = self.base.as_array()
        d = P - b
        B = self.spatial_basis
        out = np.empty_like(P)
        out[:, :-1] = b[:-1] + (d[:, :-1] @ B.T) @ B
        out[:, -1] = P[:, -1] if self.vertical else b[-1]
        return out

    def coordinates(self, points) -> np.ndarray:
        """Intrinsic coordinates on the plane: (basis coefficients[, t - t_base])."""
        P = as_points(points, self.n)
        d = P - self.base.as_array()
        c = d[:, :-1] @ self.spatial_basis.T
        if self.vertical:
            return np.column_stack([c, d[:, -1]])
        return c

    def offsets(self, points) -> np.ndarray:
        """Components of x - base along the spatial complement of L."""
        P = as_points(points, self.n)
        return (P[:, :-1] - self.base.as_array()[:-1]) @ self.complement.T

    def to_dict(self) -> dict:
        return {
            "base": list(self.base.as_array()),
            "spatial_basis": self.spatial_basis.tolist(),
            "vertical": bool(self.vertical),
            "k": self.k,
        }


def plane_distance(y, V: ParabolicPlane) -> float:
    """Parabolic distance from a point to an affine parabolic plane."""
    P = as_points(y)
    if P.shape[1] != V.n + 1:
        raise InputError("dimension mismatch between point and plane")
    d = V.distance(P)
    return float(d[0]) if d.size == 1 else d


# ---------------------------------------------------------------------------
# minimal enclosing balls
# ---------------------------------------------------------------------------

def _circumball(S: Sequence[np.ndarray]):
    if len(S) == 0:
        return None, -1.0
    p0 = S[0]
    if len(S) == 1:
        return p0.copy(), 0.0
    A = np.array(S[1:]) - p0
    M = 2.0 * A @ A.T
    b = np.einsum("ij,ij->i", A, A)
    lam = np.linalg.lstsq(M, b, rcond=None)[0]
    c = p0 + lam @ A
    r = float(np.max(np.linalg.norm(np.array(S) - c, axis=1)))
    return c, r


def min_enclosing_ball(points) -> tuple[np.ndarray, float]:
    """Smallest Euclidean ball containing the rows of ``points``.

    Uses Welzl's algorithm on the convex-hull vertices (dimensions 2 and 3) with
    a fixed random order, so results are deterministic.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    N, m = P.shape
    if N == 0:
        raise InputError("no points")
    if m == 0:
        return np.zeros(0), 0.0
    if m == 1:
        lo, hi = P[:, 0].min(), P[:, 0].max()
        return np.array([(lo + hi) / 2]), float((hi - lo) / 2)
    if N > 24 and m in (2, 3):
        try:
            P = P[ConvexHull(P).vertices]
        except (QhullError, ValueError):
            P = np.unique(P, axis=0)
    else:
        P = np.unique(P, axis=0)
    order = np.random.default_rng(12345).permutation(len(P))
    P = P[order]
    scale = float(np.max(np.abs(P))) if P.size else 1.0
    tol = 1e-12 * max(scale, 1e-300)

    def mb(end: int, R: list):
        # smallest ball containing P[:end] with R on its boundary
        c, r = _circumball(R)
        if len(R) == m + 1:
            return c, r
        i = 0
        if c is None:
            if end == 0:
                return c, r
            c, r, i = P[0].copy(), 0.0, 1
        while i < end:
            d = np.linalg.norm(P[i:end] - c, axis=1)
            out = np.flatnonzero(d > r + tol)
            if out.size == 0:
                break
            i += int(out[0])
            c, r = mb(i, R + [P[i]])
            i += 1
        return c, r

    c, r = mb(len(P), [])
    return c, float(r)


# ---------------------------------------------------------------------------
# covering radius over Aff_P(K) and independence
# ---------------------------------------------------------------------------

def _frame_candidates(X: np.ndarray, d: int, seed: int = 0, n_random: int = 24) -> list[np.ndarray]:
    """Candidate orthonormal d-frames in R^n for the plane search."""
    n = X.shape[1]
    cands: list[np.ndarray] = []
    for idx in itertools.combinations(range(n), d):
        cands.append(np.eye(n)[list(idx)])
    Xc = X - X.mean(axis=0)
    if len(X) > 1:
        _, _, Vt = np.linalg.svd(Xc, full_matrices=True)
        cands.append(Vt[:d])
    if d == 1 or d == n - 1:
        # unit vectors on a spherical grid; frames are the vector itself or its complement
        if n == 2:
            ang = np.linspace(0, np.pi, 181, endpoint=False)
            dirs = np.column_stack([np.cos(ang), np.sin(ang)])
        elif n == 3:
            m = 600
            i = np.arange(m) + 0.5
            phi = np.arccos(1 - i / m)  # upper hemisphere suffices
            th = np.pi * (1 + 5 ** 0.5) * i
            dirs = np.column_stack([np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)])
        else:
            dirs = np.random.default_rng(seed).normal(size=(256, n))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        for v in dirs:
            if d == 1:
                cands.append(v[None, :])
            else:
                cands.append(complement_basis(v[None, :], n))
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        cands.append(Q[:, :d].T)
    return cands


def _proj_radius(X: np.ndarray, B: np.ndarray) -> float:
    C = complement_basis(orthonormalize(B, X.shape[1], tol=1e-14), X.shape[1])
    if C.shape[0] == 0:
        return 0.0
    return min_enclosing_ball(X @ C.T)[1]


def _min_width_half(X: np.ndarray) -> tuple[float, np.ndarray]:
    """Half of the minimal width of a point set in R^2 or R^3 and the optimal normal."""
    n = X.shape[1]
    U = np.unique(X, axis=0)
    normals: list[np.ndarray] = [np.eye(n)[i] for i in range(n)]
    try:
        hull = ConvexHull(U) if len(U) > n else None
    except (QhullError, ValueError):
        hull = None
    if hull is None:
        # degenerate: points lie in a lower-dimensional affine set -> width 0
        _, s, Vt = np.linalg.svd(U - U.mean(axis=0))
        v = Vt[-1]
        w = U @ v
        return float((w.max() - w.min()) / 2), v
    if n == 2:
        for simplex in hull.simplices:
            e = U[simplex[1]] - U[simplex[0]]
            normals.append(np.array([-e[1], e[0]]))
    else:
        normals.extend(list(hull.equations[:, :3]))
        V = U[hull.vertices]
        edges = set()
        for s in hull.simplices:
            for a, b in ((0, 1), (1, 2), (0, 2)):
                edges.add(tuple(sorted((s[a], s[b]))))
        E = np.array([U[b] - U[a] for a, b in edges])
        if len(E) <= 400:
            cr = np.cross(E[:, None, :], E[None, :, :]).reshape(-1, 3)
            normals.extend(list(cr[np.linalg.norm(cr, axis=1) > 1e-14]))
    N = np.array(normals, dtype=float)
    N /= np.linalg.norm(N, axis=1, keepdims=True)
    proj = U @ N.T
    w = (proj.max(axis=0) - proj.min(axis=0)) / 2
    j = int(np.argmin(w))
    return float(w[j]), N[j]


def _best_frame(X: np.ndarray, d: int, seed: int = 0) -> tuple[float, np.ndarray]:
    """Minimize the enclosing radius of the projection onto L^perp over d-frames L."""
    n = X.shape[1]
    if d <= 0:
        return min_enclosing_ball(X)[1], np.zeros((0, n))
    if d >= n:
        return 0.0, np.eye(n)
    if n - d == 1 and n in (2, 3):
        w, v = _min_width_half(X)
        return w, complement_basis(v[None, :], n)
    cands = _frame_candidates(X, d, seed)
    vals = np.array([_proj_radius(X, B) for B in cands])
    order = np.argsort(vals, kind="stable")[:3]
    best_val, best_B = float(vals[order[0]]), cands[order[0]]
    for j in order:
        B0 = cands[j]
        res = minimize(lambda a: _proj_radius(X, a.reshape(d, n)), B0.ravel(),
                       method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
        if res.fun < best_val:
            best_val, best_B = float(res.fun), orthonormalize(res.x.reshape(d, n), n)
    return best_val, best_B


def covering_radius(points, K: int, seed: int = 0) -> tuple[float, ParabolicPlane | None]:
    """Minimal rho such that all points lie in P(W, rho) for some W in Aff_P(K).

    Returns the radius and a minimizing plane (``None`` when the family is empty).
    Exact when the subspace is trivial or of codimension one (n <= 3); otherwise
    the spatial subspace is found by a frame grid followed by local refinement.
    """
    P = as_points(points)
    n = P.shape[1] - 1
    X, T = P[:, :-1], P[:, -1]
    best = (np.inf, None)
    # horizontal planes: L^K x {0}
    if 0 <= K <= n:
        rad, B = _best_frame(X, K, seed)
        C = complement_basis(B, n)
        if C.shape[0]:
            c, _ = min_enclosing_ball(X @ C.T)
            bx = c @ C
        else:
            bx = np.zeros(n)
        tmid = (T.max() + T.min()) / 2
        rt = np.sqrt((T.max() - T.min()) / 2)
        r = max(rad, rt)
        if r < best[0]:
            best = (r, ParabolicPlane(SpaceTimePoint(tuple(bx), tmid), B, False))
    # vertical planes: L^{K-2} x R
    if 2 <= K <= n + 2:
        d = K - 2
        rad, B = _best_frame(X, d, seed)
        C = complement_basis(B, n)
        if C.shape[0]:
            c, _ = min_enclosing_ball(X @ C.T)
            bx = c @ C
        else:
            bx = np.zeros(n)
        if rad < best[0]:
            best = (rad, ParabolicPlane(SpaceTimePoint(tuple(bx), 0.0), B, True))
    return best


@dataclass(frozen=True)
class IndependentSet:
    """A certified (k, alpha)-independent set of space-time points."""

    points: np.ndarray
    k: int
    alpha: float
    temporal: bool
    covering_radius: float = field(default=np.inf)

    @property
    def n(self) -> int:
        return self.points.shape[1] - 1


def independence_check(points, k: int, alpha: float, eps_cert: float = 1e-3,
                       seed: int = 0) -> IndependentSet | ParabolicPlane:
    """Decide (k, alpha)-independence.

    Returns an ``IndependentSet`` when no plane of Aff_P(k-1) keeps every point
    within alpha (with a relative certification margin ``eps_cert``), and
    otherwise a witness plane W with all points in the closed alpha-neighbourhood.
    """
    P = as_points(points)
    n = P.shape[1] - 1
    if len(P) < 1:
        raise InputError("need at least one point")
    if k - 1 > n + 1 or k < 1:
        raise InputError(f"k-1 = {k - 1} out of range for n = {n}")
    if alpha <= 0:
        raise InputError("alpha must be positive")
    rad, W = covering_radius(P, k - 1, seed)
    if W is not None and rad <= alpha * (1 + eps_cert):
        return W
    dt = P[:, -1].max() - P[:, -1].min()
    return IndependentSet(P.copy(), k, float(alpha), bool(dt >= alpha ** 2), float(rad))


@dataclass(frozen=True)
class IndependentBasis:
    """Plane spanned by an independent set, with the coefficient bound."""

    plane: ParabolicPlane
    anchor: np.ndarray
    offsets: np.ndarray
    coord_bound: float

    def coefficients(self, y) -> np.ndarray:
        """Coefficients q with y - x0 = sum_i q_i (x_i - x0) (least squares in L)."""
        Y = as_points(y)
        d = Y[:, :-1] - self.anchor[:-1]
        q, *_ = np.linalg.lstsq(self.offsets.T, d.T, rcond=None)
        return q.T


def basis_from_independent(S: IndependentSet, rank_tol: float = 1e-2) -> IndependentBasis:
    """Extract the spanning plane of an independent set.

    Spatial sets span a horizontal k-plane from k + 1 points; temporal sets span a
    vertical plane with a (k - 2)-dimensional spatial part.  Points are chosen by
    greedy volume pivoting; a relative singular value below ``rank_tol`` is
    treated as rank deficiency.
    """
    P = as_points(S.points)
    n = P.shape[1] - 1
    K = S.k - 2 if S.temporal else S.k
    if K < 0 or K > n:
        raise DegenerateError(f"spanning dimension {K} impossible in n = {n}")
    X = P[:, :-1]
    x0 = P[0]
    chosen: list[int] = []
    basis: list[np.ndarray] = []
    for _ in range(K):
        R = X - x0[:-1]
        for q in basis:
            R = R - np.outer(R @ q, q)
        norms = np.linalg.norm(R, axis=1)
        if chosen:
            norms[chosen] = -1
        j = int(np.argmax(norms))
        if norms[j] <= 0:
            raise DegenerateError("independent set is rank deficient")
        chosen.append(j)
        basis.append(R[j] / norms[j])
    offsets = X[chosen] - x0[:-1] if chosen else np.zeros((0, n))
    if K:
        sv = np.linalg.svd(offsets, compute_uv=False)
        if sv[-1] < rank_tol * sv[0]:
            raise DegenerateError(f"rank deficient: singular value ratio {sv[-1] / sv[0]:.3e} < {rank_tol}")
        r = float(np.max(np.linalg.norm(offsets, axis=1)))
        pinv = np.linalg.pinv(offsets.T)  # maps d -> q
        bound = r * float(np.max(np.linalg.norm(pinv, axis=1)))
    else:
        bound = 0.0
    plane = ParabolicPlane.through(SpaceTimePoint.from_array(x0), offsets, vertical=S.temporal)
    return IndependentBasis(plane, x0.copy(), offsets, bound)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def read_points_csv(path_or_text, weights: bool = False):
    """Read rows ``x1..xn,t`` (or ``x1..xn,t,w`` with ``weights=True``)."""
    if isinstance(path_or_text, str) and "\n" not in path_or_text and not path_or_text.count(","):
        with open(path_or_text) as fh:
            text = fh.read()
    else:
        text = path_or_text
    rows = []
    for row in csv.reader(io.StringIO(text)):
        if not row or row[0].startswith("#"):
            continue
        try:
            rows.append([float(v) for v in row])
        except ValueError:
            continue  # header line
    if not rows:
        raise InputError("no numeric rows")
    arr = np.array(rows, dtype=float)
    if weights:
        return arr[:, :-1], arr[:, -1]
    return arr


def write_points_csv(points, fh, weights=None, header: bool = True) -> None:
    P = as_points(points)
    n = P.shape[1] - 1
    w = csv.writer(fh, lineterminator="\n")
    if header:
        w.writerow([f"x{i + 1}" for i in range(n)] + ["t"] + (["w"] if weights is not None else []))
    for i, row in enumerate(P):
        vals = [repr(float(v)) for v in row]
        if weights is not None:
            vals.append(repr(float(weights[i])))
        w.writerow(vals)


__all__ = [
    "SpaceTimePoint", "ParabolicBall", "ParabolicPlane", "IndependentSet", "IndependentBasis",
    "parabolic_distance", "parabolic_norm", "plane_distance", "independence_check",
    "basis_from_independent", "covering_radius", "min_enclosing_ball", "as_points",
    "orthonormalize", "complement_basis", "read_points_csv", "write_points_csv",
]

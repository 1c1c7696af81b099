"""Parabolic Lipschitz graphs over vertical planes.

A centre set C near a vertical plane V = L^{k-2} x R is read as the graph of
F*: V -> V^perp (spatial complement).  The module fits a Whitney-type
extension across holes, evaluates the half-time derivative, parabolic BMO and
a kappa-number Carleson energy, and checks the numeric shadow of the
"kappa-Carleson implies BMO" regularity criterion.

Plane coordinates are (v_1, ..., v_{k-2}, t); the parabolic distance on V is
max(|dv|, sqrt|dt|).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import zeta

from .errors import CoverageError, DegenerateError, InputError, NonGraphicalError, NumericError
from .measures import WeightedCloud, kappa_number
from .spacetime import ParabolicPlane, as_points

# normalizing constant of the singular integral: c * int (cos(w s) - 1) |s|^{-3/2} ds = |w|^{1/2}
C_BREVE_ANALYTIC = -1.0 / (2.0 * math.sqrt(2.0 * math.pi))
# least-squares calibration of the discrete singular backend against the Fourier multiplier
# (1024-point periodic window, tones 1..32); see ``calibrate_c_breve``
C_BREVE = -0.1994720627


def _vdist(A: np.ndarray, b: np.ndarray, d: int) -> np.ndarray:
    sx = np.linalg.norm(A[:, :d] - b[:d], axis=1) if d else np.zeros(len(A))
    return np.maximum(sx, np.sqrt(np.abs(A[:, d] - b[d])))


def pairwise_lipschitz(coords: np.ndarray, values: np.ndarray, chunk: int = 1024) -> tuple[float, tuple]:
    """max |f(a) - f(b)| / d_P(a, b) over all pairs of distinct samples, with the maximizing pair."""
    Y = np.asarray(coords, dtype=float)
    F = np.asarray(values, dtype=float)
    F = F[:, None] if F.ndim == 1 else F
    d = Y.shape[1] - 1
    best, arg = 0.0, (None, None)
    for s in range(0, len(Y), chunk):
        A = Y[s:s + chunk]
        sx = np.sqrt(np.maximum(((A[:, None, :d] - Y[None, :, :d]) ** 2).sum(-1), 0)) if d else 0.0
        dist = np.maximum(sx, np.sqrt(np.abs(A[:, None, d] - Y[None, :, d])))
        df = np.linalg.norm(F[s:s + chunk, None, :] - F[None, :, :], axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(dist > 0, df / dist, 0.0)
        i = np.unravel_index(int(np.argmax(q)), q.shape)
        if q[i] > best:
            best, arg = float(q[i]), (int(i[0] + s), int(i[1]))
    return best, arg


@dataclass
class GraphSample:
    """Samples of F*: V -> V^perp at plane coordinates ``coords``."""

    plane: ParabolicPlane
    coords: np.ndarray   # (m, k - 1): v_1..v_{k-2}, t
    offsets: np.ndarray  # (m, n + 2 - k)
    lipschitz_est: float
    lipschitz_pair: tuple = (None, None)

    @property
    def k(self) -> int:
        return self.plane.k

    def to_csv(self, fh=None) -> str | None:
        d = self.k - 2
        header = [f"v{i + 1}" for i in range(d)] + ["t"] + [f"offset{j + 1}" for j in range(self.offsets.shape[1])]
        out = fh if fh is not None else io.StringIO()
        w = csv.writer(out)
        w.writerow(header)
        for c, o in zip(self.coords, self.offsets):
            w.writerow([repr(float(x)) for x in c] + [repr(float(x)) for x in o])
        return None if fh is not None else out.getvalue()


def graph_from_centers(C, V: ParabolicPlane, tol: float | None = None, cell: float | None = None) -> GraphSample:
    """Read a centre set as a graph over the vertical plane V.

    Two centres whose projections fall in the same cell (spatial size ``cell``,
    time size ``cell**2``) or lie within ``tol`` of each other, but whose
    offsets differ, raise ``NonGraphicalError`` listing the offending pairs.
    Exact duplicates are merged.
    """
    if not V.vertical:
        raise InputError("graphs are taken over vertical planes")
    P = C.points if isinstance(C, WeightedCloud) else as_points(C, V.n)
    n = V.n
    if P.shape[1] != n + 1:
        raise InputError("dimension mismatch")
    B = V.base.as_array()
    L = V.spatial_basis
    W = V.complement
    d = L.shape[0]
    X = P[:, :n] - B[:n]
    coords = np.column_stack([X @ L.T, P[:, n] - B[n]]) if d else (P[:, n:] - B[n])
    offsets = X @ W.T
    scale = max(float(np.max(np.abs(P))), 1.0)
    otol = 1e-9 * scale
    if cell is not None:
        key = np.column_stack([np.floor(coords[:, :d] / cell), np.floor(coords[:, d] / cell ** 2)]).astype(np.int64)
        _, inv = np.unique(key, axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        order = np.argsort(inv, kind="stable")
        groups = np.split(order, np.flatnonzero(np.diff(inv[order])) + 1)
        pairs = [(int(g[0]), int(j)) for g in groups if len(g) > 1 for j in g[1:]]
    else:
        tol = 1e-9 * scale if tol is None else tol
        Z = coords.copy()
        Z[:, d] = np.sign(Z[:, d]) * np.sqrt(np.abs(Z[:, d]))  # sqrt|t| is a contraction of the time metric
        pairs = [tuple(map(int, p)) for p in cKDTree(Z).query_pairs(tol, p=np.inf)]
        pairs = [(a, b) for a, b in pairs if _vdist(coords[[b]], coords[a], d)[0] <= tol]
    bad = [(a, b) for a, b in pairs if np.linalg.norm(offsets[a] - offsets[b]) > otol]
    if bad:
        wit = [{"a": P[a].tolist(), "b": P[b].tolist()} for a, b in bad[:10]]
        raise NonGraphicalError(f"{len(bad)} projection collisions", wit)
    if pairs:
        drop = {b for _, b in pairs}
        keep = np.array([i for i in range(len(P)) if i not in drop])
        coords, offsets = coords[keep], offsets[keep]
    lip, pair = pairwise_lipschitz(coords, offsets)
    return GraphSample(V.linear_part(), coords, offsets, lip, pair)


# ---------------------------------------------------------------------------
# partition of unity and Whitney extension
# ---------------------------------------------------------------------------

def _smooth_step(s: np.ndarray) -> np.ndarray:
    """C^infinity, equal to 1 on s <= 1 and 0 on s >= 2."""
    def g(x):
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = np.exp(-1.0 / x[pos])
        return out
    a, b = g(2.0 - s), g(s - 1.0)
    return a / (a + b)


def _rho(D: np.ndarray, d: int) -> np.ndarray:
    """Smooth parabolic gauge (|v|^4 + t^2)^{1/4} of displacements D (..., d + 1)."""
    v2 = (D[..., :d] ** 2).sum(-1) if d else 0.0
    return (v2 * v2 + D[..., d] ** 2) ** 0.25


@dataclass
class PartitionOfUnity:
    """psi_z = phi(rho(y - z) / r_z) / sum_w phi(rho(y - w) / r_w)."""

    centers: np.ndarray
    radii: np.ndarray
    overlap_bound: int = field(init=False)

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        self.radii = np.asarray(self.radii, dtype=float).reshape(-1)
        if len(self.radii) != len(self.centers):
            raise InputError("one radius per centre")
        if np.any(self.radii <= 0):
            raise InputError("radii must be positive")
        # two supports meeting at a point pairwise intersect: count <= 1 + max degree
        d = self.d
        deg = 0
        for i in range(len(self.centers)):
            D = self.centers - self.centers[i]
            meet = _rho(D, d) < 2 * (self.radii + self.radii[i]) * 2 ** 0.25
            deg = max(deg, int(meet.sum()) - 1)
        self.overlap_bound = deg + 1

    @property
    def d(self) -> int:
        return self.centers.shape[1] - 1

    def raw(self, Y) -> np.ndarray:
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        D = Y[:, None, :] - self.centers[None, :, :]
        return _smooth_step(_rho(D, self.d) / self.radii[None, :])

    def __call__(self, Y) -> tuple[np.ndarray, np.ndarray]:
        """(psi (m, h), covered mask (m,))."""
        R = self.raw(Y)
        S = R.sum(1)
        cov = S > 0
        out = np.zeros_like(R)
        out[cov] = R[cov] / S[cov, None]
        return out, cov

    def overlap(self, Y) -> np.ndarray:
        return (self.raw(Y) > 0).sum(1)

    def derivative_bounds(self, Y, step: float = 1e-5) -> dict:
        """max r_z |d_v psi_z| and r_z^2 |d_t psi_z| by central differences (step relative to r_z)."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        out = {}
        r = self.radii[None, :]
        for j in range(self.d + 1):
            e = np.zeros(self.d + 1)
            hs = step * (r.min() if j < self.d else r.min() ** 2)
            e[j] = hs
            dpsi = (self(Y + e)[0] - self(Y - e)[0]) / (2 * hs)
            w = r if j < self.d else r * r
            out["t" if j == self.d else f"v{j + 1}"] = float(np.max(np.abs(dpsi) * w))
        return out


@dataclass
class Extension:
    coords: np.ndarray
    values: np.ndarray
    covered: np.ndarray
    lipschitz_est: float
    pieces: np.ndarray  # affine coefficients per hole: (h, 1 + d, q)


def _affine_fit(Y: np.ndarray, F: np.ndarray, z: np.ndarray, d: int) -> np.ndarray:
    A = np.column_stack([np.ones(len(Y)), Y[:, :d] - z[:d]])
    if np.linalg.matrix_rank(A) < A.shape[1]:
        raise DegenerateError("rank-deficient samples for a time-independent affine fit")
    coef, *_ = np.linalg.lstsq(A, F, rcond=None)
    return coef


def whitney_extension(G: GraphSample, hole_centers, hole_radii, grid=None, gamma: float = 1 / 8,
                      tol: float = 1e-12) -> Extension:
    """F = F* on the samples and sum psi_z l_z elsewhere.

    Each hole z of radius r_z carries a time-independent affine map l_z fitted
    by least squares to the samples in P^V(z, r_z / gamma).  A hole with no
    samples in its fitting ball raises ``CoverageError``.  Grid points outside
    every hole support and off the samples are returned as NaN with
    ``covered`` False.
    """
    d = G.k - 2
    Zc = np.atleast_2d(np.asarray(hole_centers, dtype=float)).reshape(-1, d + 1)
    Zr = np.asarray(hole_radii, dtype=float).reshape(-1)
    Y = np.vstack([G.coords, Zc]) if grid is None else np.atleast_2d(np.asarray(grid, dtype=float))
    q = G.offsets.shape[1]
    pieces = np.zeros((len(Zc), d + 1, q))
    for i, (z, rz) in enumerate(zip(Zc, Zr)):
        R = rz / gamma
        inside = _vdist(G.coords, z, d) < R
        if not inside.any():
            raise CoverageError(f"no samples within P^V(z, r_z / gamma) of hole {i}")
        pieces[i] = _affine_fit(G.coords[inside], G.offsets[inside], z, d)
    vals = np.full((len(Y), q), np.nan)
    covered = np.zeros(len(Y), dtype=bool)
    tree = cKDTree(G.coords)
    dist, idx = tree.query(Y)
    on = dist <= tol
    vals[on] = G.offsets[idx[on]]
    covered[on] = True
    rest = np.flatnonzero(~on)
    if len(Zc) and len(rest):
        pou = PartitionOfUnity(Zc, Zr)
        for s in range(0, len(rest), 2048):
            I = rest[s:s + 2048]
            psi, cov = pou(Y[I])
            A = np.concatenate([np.ones((len(I), len(Zc), 1)), (Y[I][:, None, :d] - Zc[None, :, :d])], axis=2)
            L = np.einsum("mhj,hjq->mhq", A, pieces)
            v = np.einsum("mh,mhq->mq", psi, L)
            vals[I[cov]] = v[cov]
            covered[I[cov]] = True
    ok = covered
    lip = pairwise_lipschitz(Y[ok], vals[ok])[0] if ok.sum() > 1 else 0.0
    return Extension(Y, vals, covered, lip, pieces)


# ---------------------------------------------------------------------------
# half-time derivative
# ---------------------------------------------------------------------------

def _check_finite(phi):
    phi = np.asarray(phi, dtype=float)
    if not np.all(np.isfinite(phi)):
        raise NumericError("non-finite input")
    return phi


def _fourier_half(phi: np.ndarray, dt: float) -> np.ndarray:
    T = phi.shape[-1]
    w = 2 * np.pi * np.fft.rfftfreq(T, dt)
    return np.fft.irfft(np.fft.rfft(phi, axis=-1) * np.sqrt(w), n=T, axis=-1)


def _singular_integral(phi: np.ndarray, dt: float) -> np.ndarray:
    """int_0^inf (phi(t+s) + phi(t-s) - 2 phi(t)) s^{-3/2} ds on a periodic window.

    Rectangle rule with periodic images summed through the Hurwitz zeta
    function, plus the leading correction -zeta(-1/2) phi'' dt^{3/2} for the
    s^{1/2} behaviour of the integrand at 0.
    """
    T = phi.shape[-1]
    r = np.arange(1, T)
    w = dt ** -0.5 * T ** -1.5 * zeta(1.5, r / T)
    kern = np.zeros(T)
    kern[1:] = w
    # circular correlation sum_r w_r phi(t + r) + sum_r w_r phi(t - r); the kernel is symmetric in r -> T - r
    K = np.fft.rfft(kern)
    conv = np.fft.irfft(np.fft.rfft(phi, axis=-1) * (K + np.conj(K)), n=T, axis=-1)
    S = conv - 2 * w.sum() * phi
    d2 = (np.roll(phi, -1, axis=-1) + np.roll(phi, 1, axis=-1) - 2 * phi) / dt ** 2
    return S - zeta(-0.5) * d2 * dt ** 1.5


def half_time_derivative(phi, dt: float, backend: str = "fourier", c_breve: float = C_BREVE, pad: int = 0):
    """Half-time derivative along the last axis on a periodic window.

    ``backend`` is "fourier" (multiplier |w|^{1/2}), "singular" (c * principal
    value integral in symmetric-difference form) or "both", which returns the
    pair (fourier, singular).  ``pad`` zero-pads by that many window lengths
    for compactly supported input and crops the result.
    """
    phi = _check_finite(phi)
    if dt <= 0:
        raise InputError("dt must be positive")
    T = phi.shape[-1]
    if pad:
        widths = [(0, 0)] * (phi.ndim - 1) + [(0, pad * T)]
        phi = np.pad(phi, widths)
    out = {}
    if backend in ("fourier", "both"):
        out["fourier"] = _fourier_half(phi, dt)[..., :T]
    if backend in ("singular", "both"):
        out["singular"] = (c_breve * _singular_integral(phi, dt))[..., :T]
    if not out:
        raise InputError(f"unknown backend {backend!r}")
    if backend == "both":
        return out["fourier"], out["singular"]
    return out[backend]


def calibrate_c_breve(T: int = 1024, tones=range(1, 33)) -> float:
    """Least-squares c with c * singular(cos) ~ fourier(cos) over pure tones."""
    t = np.arange(T) * (2 * np.pi / T)
    dt = 2 * np.pi / T
    num = den = 0.0
    for m in tones:
        phi = np.cos(m * t)
        S = _singular_integral(phi, dt)
        F = _fourier_half(phi, dt)
        num += float(S @ F)
        den += float(S @ S)
    return num / den


# ---------------------------------------------------------------------------
# parabolic BMO and kappa-Carleson energy on plane grids
# ---------------------------------------------------------------------------

def _axes(shape, h: float, dt: float):
    *sp, nt = shape
    ax = [(np.arange(m) - (m - 1) / 2) * h for m in sp]
    ax.append((np.arange(nt) - (nt - 1) / 2) * dt)
    return ax


def _ball_family(axes, levels: int):
    """Dyadic parabolic balls inside the window: yields (center, R, index slices)."""
    d = len(axes) - 1
    lo = [a[0] for a in axes]
    hi = [a[-1] for a in axes]
    half_sp = [(b - a) / 2 for a, b in zip(lo[:d], hi[:d])]
    half_t = (hi[d] - lo[d]) / 2
    R0 = min(half_sp + [math.sqrt(half_t)]) if d else math.sqrt(half_t)
    for lev in range(levels):
        R = R0 * 2.0 ** -lev
        grids = []
        for j in range(d + 1):
            ext = R if j < d else R * R
            c0 = (lo[j] + hi[j]) / 2
            m = int(math.floor(((hi[j] - lo[j]) / 2 - ext) / ext + 1e-9))
            grids.append(c0 + np.arange(-m, m + 1) * ext)
        for c in np.stack(np.meshgrid(*grids, indexing="ij"), -1).reshape(-1, d + 1):
            sl = []
            for j in range(d + 1):
                ext = R if j < d else R * R
                a = axes[j]
                # open ball; nodes within rounding of the boundary are excluded at every scale
                tol = 1e-9 * (a[1] - a[0] if len(a) > 1 else 1.0)
                i0 = int(np.searchsorted(a, c[j] - ext + tol, side="left"))
                i1 = int(np.searchsorted(a, c[j] + ext - tol, side="right"))
                sl.append(slice(i0, i1))
            yield c, R, tuple(sl)


def bmo_norm(g, h: float = 1.0, dt: float = 1.0, levels: int = 5) -> float:
    """max over dyadic parabolic balls in the window of the mean of |g - mean_ball g|.

    ``g`` is sampled on a regular grid of shape (N_1, ..., N_{k-2}, N_t), with
    spatial spacing ``h`` and time spacing ``dt``, centred at the origin.
    """
    g = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite samples")
    axes = _axes(g.shape, h, dt)
    d = g.ndim - 1
    best = 0.0
    for c, R, sl in _ball_family(axes, levels):
        block = g[sl]
        if block.size < 2:
            continue
        if d >= 2:
            sub = np.meshgrid(*[axes[j][sl[j]] - c[j] for j in range(d)], indexing="ij")
            mask = sum(s * s for s in sub) < R * R * (1 - 1e-9)
            block = block[mask]
        best = max(best, float(np.mean(np.abs(block - block.mean()))))
    return best


def kappa_carleson(f, h: float, dt: float, k: int, levels: int = 3, depth: int = 4,
                   max_points: int = 64) -> float:
    """max over dyadic balls P^V(x, r) of r^{-k} sum_y sum_j kappa^2(y, r 2^-j) log 2 |cell|.

    y runs over a strided subgrid of P^V(x, r) with at most ``max_points``
    points, each weighted by the volume it represents.
    """
    f = np.asarray(f, dtype=float)
    d = f.ndim - 1
    if d != k - 2:
        raise InputError("grid dimension must be k - 1")
    axes = _axes(f.shape, h, dt)
    grids = np.meshgrid(*axes, indexing="ij")
    Y = np.stack([g.ravel() for g in grids], axis=1)
    F = f.ravel()
    cell = h ** d * dt
    best = 0.0
    for c, R, sl in _ball_family(axes, levels):
        idx = np.ravel_multi_index(np.meshgrid(*[np.arange(s.start, s.stop) for s in sl], indexing="ij"),
                                   f.shape).ravel()
        inball = idx[_vdist(Y[idx], c, d) < R]
        if not len(inball):
            continue
        stride = max(1, len(inball) // max_points)
        pick = inball[::stride]
        w = cell * len(inball) / len(pick)
        # every P^V(y, s) with y in the ball and s <= R lies in P^V(c, 2R)
        near = np.flatnonzero(_vdist(Y, c, d) < 2 * R * (1 + 1e-12))
        Yn, Fn = Y[near], F[near]
        total = 0.0
        for j in range(depth):
            s = R * 2.0 ** -j
            for i in pick:
                try:
                    total += kappa_number(Yn, Fn, Y[i], s, k) * w * math.log(2)
                except DegenerateError:
                    pass
        best = max(best, total / R ** k)
    return best


def regularity_report(f, h: float, dt: float, k: int, c_impl: float = 10.0, delta: float | None = None,
                      periodic: bool = True, levels: int = 3) -> dict:
    """Lipschitz constant, kappa-Carleson energy and BMO of the half-time derivative.

    ``verdict`` records bmo <= c_impl * sqrt(energy); with ``delta`` the
    report also says whether the energy is below delta.
    """
    f = np.asarray(f, dtype=float)
    axes = _axes(f.shape, h, dt)
    grids = np.meshgrid(*axes, indexing="ij")
    Y = np.stack([g.ravel() for g in grids], axis=1)
    stride = max(1, len(Y) // 3000)
    lip = pairwise_lipschitz(Y[::stride], f.ravel()[::stride])[0]
    energy = kappa_carleson(f, h, dt, k, levels=levels)
    half = half_time_derivative(f, dt, pad=0 if periodic else 1)
    bmo = bmo_norm(half, h, dt, levels=levels + 2)
    out = {
        "lipschitz_est": lip, "carleson_energy": energy, "bmo_half_derivative": bmo,
        "c_impl": c_impl, "verdict": bool(bmo <= c_impl * math.sqrt(energy) + 1e-12),
    }
    if delta is not None:
        out["delta_regular"] = bool(energy < delta)
    return out


__all__ = [
    "GraphSample", "PartitionOfUnity", "Extension", "graph_from_centers", "whitney_extension",
    "half_time_derivative", "calibrate_c_breve", "bmo_norm", "kappa_carleson", "regularity_report",
    "pairwise_lipschitz", "C_BREVE", "C_BREVE_ANALYTIC",
]

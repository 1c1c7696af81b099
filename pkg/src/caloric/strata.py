"""Effective nodal and singular sets, quantitative strata and Minkowski content
on parabolic grids.

Grid nodes sit at (i h, j h^2) for integer multi-indices i and integers j.  A
set of nodes is stored column by column: each spatial index maps to a sorted
list of inclusive runs of time indices.  Sets that are vertical (columns full
in time) therefore cost one run per column regardless of the time resolution.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .caloricpoly import CaloricPolynomial
from .errors import DegenerateError, InputError, PreconditionError
from .frequency import kalpha_pinching, mass_H, model
from .spacetime import ParabolicBall, SpaceTimePoint, as_points

N_SCALES = 16


# ---------------------------------------------------------------------------
# run-length grid regions
# ---------------------------------------------------------------------------

def _merge_runs(runs) -> list:
    runs = sorted(runs)
    out = []
    for a, b in runs:
        if out and a <= out[-1][1] + 1:
            if b > out[-1][1]:
                out[-1][1] = b
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def _runs_from_mask(mask: np.ndarray, j0: int) -> list:
    """Inclusive index runs of True entries (offset j0)."""
    if not mask.any():
        return []
    d = np.diff(np.concatenate([[0], mask.view(np.int8), [0]]))
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1) - 1
    return [(int(a) + j0, int(b) + j0) for a, b in zip(starts, ends)]


class GridRegion:
    """Set of nodes of the parabolic grid of spacing h inside ``bounds``."""

    def __init__(self, n: int, h: float, bounds: ParabolicBall | None = None, columns: dict | None = None):
        if h <= 0:
            raise InputError("spacing must be positive")
        self.n = n
        self.h = float(h)
        self.bounds = bounds or ParabolicBall(SpaceTimePoint.origin(n), 1.0)
        if self.bounds.n != n:
            raise InputError("bounds dimension mismatch")
        self.columns: dict = {}
        for key, runs in (columns or {}).items():
            runs = _merge_runs(runs)
            if runs:
                self.columns[tuple(int(v) for v in key)] = runs

    @property
    def h_t(self) -> float:
        return self.h * self.h

    # -- ambient grid ------------------------------------------------------------
    def spatial_range(self) -> list[range]:
        c, R, h = self.bounds.center.x, self.bounds.radius, self.h
        return [range(math.floor((ci - R) / h) - 1, math.ceil((ci + R) / h) + 2) for ci in c]

    def ambient_columns(self) -> np.ndarray:
        """Spatial indices of columns meeting the (open) ball."""
        axes = [np.arange(r.start, r.stop) for r in self.spatial_range()]
        grids = np.meshgrid(*axes, indexing="ij")
        I = np.stack([g.ravel() for g in grids], axis=1)
        X = I * self.h
        keep = np.linalg.norm(X - np.array(self.bounds.center.x), axis=1) < self.bounds.radius
        return I[keep]

    def time_range(self) -> tuple[int, int]:
        """Inclusive time indices of nodes in the open ball."""
        t0, R, ht = self.bounds.center.t, self.bounds.radius, self.h_t
        lo = math.floor((t0 - R * R) / ht) + 1
        hi = math.ceil((t0 + R * R) / ht) - 1
        while (lo * ht - t0) <= -R * R:
            lo += 1
        while (hi * ht - t0) >= R * R:
            hi -= 1
        return lo, hi

    def column_in_ball(self, key) -> bool:
        x = np.array(key, dtype=float) * self.h
        return float(np.linalg.norm(x - np.array(self.bounds.center.x))) < self.bounds.radius

    # -- set operations ----------------------------------------------------------
    @classmethod
    def from_nodes(cls, n: int, h: float, indices, bounds: ParabolicBall | None = None) -> "GridRegion":
        I = np.asarray(indices, dtype=np.int64).reshape(-1, n + 1)
        cols: dict = {}
        for row in I:
            cols.setdefault(tuple(row[:-1]), []).append((int(row[-1]), int(row[-1])))
        return cls(n, h, bounds, cols)

    @classmethod
    def full_columns(cls, n: int, h: float, keys, bounds: ParabolicBall | None = None) -> "GridRegion":
        reg = cls(n, h, bounds)
        lo, hi = reg.time_range()
        return cls(n, h, reg.bounds, {tuple(k): [(lo, hi)] for k in keys})

    def copy_empty(self) -> "GridRegion":
        return GridRegion(self.n, self.h, self.bounds)

    def __len__(self) -> int:
        return self.count()

    def count(self) -> int:
        return int(sum(b - a + 1 for runs in self.columns.values() for a, b in runs))

    def volume(self) -> float:
        return self.count() * self.h ** self.n * self.h_t

    def is_empty(self) -> bool:
        return not self.columns

    def contains(self, index) -> bool:
        index = tuple(int(v) for v in index)
        for a, b in self.columns.get(index[:-1], ()):
            if a <= index[-1] <= b:
                return True
        return False

    def nodes(self) -> np.ndarray:
        """All node indices, shape (count, n + 1)."""
        rows = [np.column_stack([np.tile(np.array(key, dtype=np.int64), (b - a + 1, 1)), np.arange(a, b + 1)])
                for key, runs in self.columns.items() for a, b in runs]
        if not rows:
            return np.zeros((0, self.n + 1), dtype=np.int64)
        return np.vstack(rows)

    def points(self) -> np.ndarray:
        I = self.nodes().astype(float)
        I[:, :-1] *= self.h
        I[:, -1] *= self.h_t
        return I

    def union(self, other: "GridRegion") -> "GridRegion":
        self._compatible(other)
        cols = {k: list(v) for k, v in self.columns.items()}
        for k, v in other.columns.items():
            cols.setdefault(k, []).extend(v)
        return GridRegion(self.n, self.h, self.bounds, cols)

    def intersection(self, other: "GridRegion") -> "GridRegion":
        self._compatible(other)
        cols = {}
        for k, ra in self.columns.items():
            rb = other.columns.get(k)
            if not rb:
                continue
            out, i, j = [], 0, 0
            while i < len(ra) and j < len(rb):
                a, b = max(ra[i][0], rb[j][0]), min(ra[i][1], rb[j][1])
                if a <= b:
                    out.append((a, b))
                if ra[i][1] < rb[j][1]:
                    i += 1
                else:
                    j += 1
            if out:
                cols[k] = out
        return GridRegion(self.n, self.h, self.bounds, cols)

    def difference_count(self, other: "GridRegion") -> int:
        """Number of nodes of self not in other."""
        return self.count() - self.intersection(other).count()

    def _compatible(self, other: "GridRegion"):
        if self.n != other.n or self.h != other.h:
            raise InputError("regions live on different grids")

    def clip(self) -> "GridRegion":
        lo, hi = self.time_range()
        cols = {}
        for k, runs in self.columns.items():
            if not self.column_in_ball(k):
                continue
            rr = [(max(a, lo), min(b, hi)) for a, b in runs if b >= lo and a <= hi]
            if rr:
                cols[k] = rr
        return GridRegion(self.n, self.h, self.bounds, cols)

    def __eq__(self, other) -> bool:
        return isinstance(other, GridRegion) and self.n == other.n and self.h == other.h \
            and self.columns == other.columns

    # -- text dump ----------------------------------------------------------------
    def to_rle(self) -> str:
        c = self.bounds.center
        lines = ["# caloric grid region (column run-length encoding)",
                 f"n={self.n} h={self.h!r} radius={self.bounds.radius!r} center={','.join(repr(v) for v in c.x + (c.t,))}"]
        for key in sorted(self.columns):
            runs = " ".join(f"{a}:{b}" for a, b in self.columns[key])
            lines.append(f"{','.join(str(v) for v in key)} {runs}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_rle(cls, text: str) -> "GridRegion":
        head, cols = None, {}
        for line in io.StringIO(text):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if head is None:
                head = dict(item.split("=", 1) for item in line.split())
                continue
            key, *runs = line.split()
            cols[tuple(int(v) for v in key.split(","))] = [tuple(int(v) for v in r.split(":")) for r in runs]
        if head is None:
            raise InputError("missing header line")
        n = int(head["n"])
        center = [float(v) for v in head["center"].split(",")]
        bounds = ParabolicBall(SpaceTimePoint(tuple(center[:-1]), center[-1]), float(head["radius"]))
        return cls(n, float(head["h"]), bounds, cols)


# ---------------------------------------------------------------------------
# effective nodal / singular sets
# ---------------------------------------------------------------------------

def scale_grid(r_min: float, r_max: float = 1.0, count: int = N_SCALES) -> np.ndarray:
    """Geometric scales from r_min to r_max (ascending)."""
    if not 0 < r_min <= r_max:
        raise InputError("need 0 < r_min <= r_max")
    if r_min == r_max:
        return np.array([r_min])
    return np.geomspace(r_min, r_max, count)


def _inf_offsets(n: int) -> np.ndarray:
    """Sample offsets of P(0, 1/16) at spacing 1/64 (space) and (1/16)^2 / 4 (time)."""
    a = np.arange(-4, 5) / 64.0
    tt = np.arange(-4, 5) * (1 / 16) ** 2 / 4
    grids = np.meshgrid(*([a] * n + [tt]), indexing="ij")
    O = np.stack([g.ravel() for g in grids], axis=1)
    return O[np.linalg.norm(O[:, :-1], axis=1) <= 1 / 16 + 1e-15]


def _sampled_inf(fn, P: np.ndarray, s: float, offsets: np.ndarray, chunk: int = 4000) -> np.ndarray:
    O = offsets.copy()
    O[:, :-1] *= s
    O[:, -1] *= s * s
    out = np.empty(len(P))
    for a in range(0, len(P), chunk):
        Q = (P[a:a + chunk, None, :] + O[None, :, :]).reshape(-1, P.shape[1])
        out[a:a + chunk] = fn(Q).reshape(-1, len(O)).min(axis=1)
    return out


def _effective(u: CaloricPolynomial, points, r_min: float, kind: str, n_scales: int = N_SCALES,
               r_max: float = 1.0):
    n = u.n
    P = as_points(points, n)
    scales = scale_grid(r_min, r_max, n_scales)
    offs = _inf_offsets(n)
    mdl = model(u)
    if kind == "nodal":
        fn = lambda Q: u.evaluate(Q) ** 2
        frac = 1 / 8
    else:
        grad = u.gradient()
        fn_s = lambda s: (lambda Q: u.evaluate(Q) ** 2 + 2 * s * s * sum(g.evaluate(Q) ** 2 for g in grad))
        frac = 1 / 16
    keys = mdl.keys(P)
    _, first, inv = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    U = P[first]
    alive = np.ones(len(U), dtype=bool)
    margin = np.full(len(U), -np.inf)
    a = mdl.masses(U)
    for s in scales:
        idx = np.flatnonzero(alive)
        if not idx.size:
            break
        H = mass_H(a[idx], [s * s])[:, 0]
        f = fn if kind == "nodal" else fn_s(s)
        m = (_sampled_inf(f, U[idx], s, offs) - frac * H) / H
        margin[idx] = np.maximum(margin[idx], m)
        alive[idx[m > 0]] = False
    inv = inv.reshape(-1)
    return alive[inv], margin[inv]


def effective_nodal(u: CaloricPolynomial, points, r_min: float, return_margin: bool = False,
                    n_scales: int = N_SCALES):
    """Membership in Z_{r_min}: inf_{P(x, s/16)} u^2 <= H(s^2) / 8 for every grid scale s in [r_min, 1].

    The infimum is taken over a lattice of spacing s/64; the margin is the
    largest normalized excess (inf - H/8)/H over the scales checked.
    """
    member, margin = _effective(u, points, r_min, "nodal", n_scales)
    return (member, margin) if return_margin else member


def effective_singular(u: CaloricPolynomial, points, r_min: float, return_margin: bool = False,
                       n_scales: int = N_SCALES):
    """Membership in S_{r_min}: inf (u^2 + 2 s^2 |grad u|^2) <= H(s^2) / 16 for every scale."""
    member, margin = _effective(u, points, r_min, "singular", n_scales)
    return (member, margin) if return_margin else member


def _time_free(u: CaloricPolynomial) -> bool:
    return all(k == 0 for (_, k) in u.terms)


def effective_region(u: CaloricPolynomial, h: float, r_min: float, kind: str = "nodal",
                     bounds: ParabolicBall | None = None, n_scales: int = N_SCALES) -> GridRegion:
    """Z_{r_min} or S_{r_min} on the whole grid of spacing h inside ``bounds``.

    Time-independent u is handled one column at a time; otherwise every node is
    tested.
    """
    reg = GridRegion(u.n, h, bounds)
    lo, hi = reg.time_range()
    C = reg.ambient_columns()
    if _time_free(u):
        P = np.column_stack([C * h, np.zeros(len(C))])
        member = _effective(u, P, r_min, kind, n_scales)[0]
        return GridRegion(u.n, h, reg.bounds, {tuple(c): [(lo, hi)] for c in C[member]})
    cols: dict = {}
    J = np.arange(lo, hi + 1)
    for c in C:
        P = np.column_stack([np.tile(c * h, (len(J), 1)), J * reg.h_t])
        member = _effective(u, P, r_min, kind, n_scales)[0]
        runs = _runs_from_mask(member, lo)
        if runs:
            cols[tuple(c)] = runs
    return GridRegion(u.n, h, reg.bounds, cols)


# ---------------------------------------------------------------------------
# exact nodal / singular set proxies
# ---------------------------------------------------------------------------

def _term_arrays(p: CaloricPolynomial):
    keys = list(p.terms)
    E = np.array([list(a) + [k] for a, k in keys], dtype=np.int64).reshape(len(keys), p.n + 1)
    c = np.array([float(p.terms[key]) for key in keys])
    return E, c


def _interval(E: np.ndarray, c: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> tuple[float, float]:
    """Enclosure of sum_j c_j prod_v y_v^{E_jv} over the box [lo, hi]."""
    if not len(c):
        return 0.0, 0.0
    pl, ph = np.ones(len(c)), np.ones(len(c))
    for v in range(E.shape[1]):
        e = E[:, v]
        a, b = lo[v] ** e, hi[v] ** e
        mn, mx = np.minimum(a, b), np.maximum(a, b)
        mn = np.where((e % 2 == 0) & (lo[v] < 0) & (hi[v] > 0) & (e > 0), 0.0, mn)
        prods = np.stack([pl * mn, pl * mx, ph * mn, ph * mx])
        pl, ph = prods.min(axis=0), prods.max(axis=0)
    terms_lo = np.where(c >= 0, c * pl, c * ph)
    terms_hi = np.where(c >= 0, c * ph, c * pl)
    s = abs(np.sum(np.abs(c) * np.maximum(np.abs(pl), np.abs(ph)))) * 1e-14
    return float(terms_lo.sum() - s), float(terms_hi.sum() + s)


def _branch_and_bound(reg: GridRegion, prune, leaf, spatial_only: bool, leaf_nodes: int = 1 << 15):
    """Recursive subdivision of the index box; ``prune(lo_idx, hi_idx)`` says a
    box cannot contain set nodes, ``leaf(lo_idx, hi_idx)`` returns column runs."""
    n = reg.n
    sr = reg.spatial_range()
    lo_t, hi_t = reg.time_range()
    lo = np.array([r.start for r in sr] + [lo_t])
    hi = np.array([r.stop - 1 for r in sr] + [hi_t])
    cols: dict = {}
    stack = [(lo, hi)]
    while stack:
        a, b = stack.pop()
        if np.any(b < a) or prune(a, b):
            continue
        cnt = b - a + 1
        nsp = int(np.prod(cnt[:n]))
        size = nsp if spatial_only else nsp * int(cnt[n])
        if size <= leaf_nodes or np.all(cnt[:n] == 1) and (spatial_only or cnt[n] == 1):
            for key, runs in leaf(a, b).items():
                cols.setdefault(key, []).extend(runs)
            continue
        ext = cnt[:n].astype(float)
        ext_t = math.sqrt(cnt[n]) if not spatial_only else 0.0
        if ext_t > ext.max():
            axis = n
        else:
            axis = int(np.argmax(ext))
        mid = (a[axis] + b[axis]) // 2
        b1 = b.copy()
        b1[axis] = mid
        a2 = a.copy()
        a2[axis] = mid + 1
        stack += [(a, b1), (a2, b)]
    return GridRegion(n, reg.h, reg.bounds, cols).clip()


def _box(reg: GridRegion, a: np.ndarray, b: np.ndarray, pad: int = 0):
    scale = np.array([reg.h] * reg.n + [reg.h_t])
    return a * scale, (b + pad) * scale


def _leaf_nodes(reg: GridRegion, a, b, pad: int, spatial_only: bool):
    n = reg.n
    axes = [np.arange(a[v], b[v] + 1 + pad) for v in range(n)]
    if spatial_only:
        axes.append(np.array([0]))
    else:
        axes.append(np.arange(a[n], b[n] + 1 + pad))
    return axes


def nodal_region(u: CaloricPolynomial, h: float, bounds: ParabolicBall | None = None) -> GridRegion:
    """Grid proxy of Z(u): nodes where u = 0 or u changes sign towards a
    positive-direction neighbour along some axis."""
    reg = GridRegion(u.n, h, bounds)
    E, c = _term_arrays(u)
    tfree = _time_free(u)
    n = u.n
    lo_t, hi_t = reg.time_range()

    def prune(a, b):
        lo, hi = _box(reg, a, b, pad=1)
        if tfree:
            lo[n], hi[n] = 0.0, 0.0
        l, r = _interval(E, c, lo, hi)
        return l > 0 or r < 0

    def leaf(a, b):
        axes = _leaf_nodes(reg, a, b, 1, tfree)
        grids = np.meshgrid(*axes, indexing="ij")
        P = np.stack([g.ravel().astype(float) for g in grids], axis=1)
        P[:, :n] *= h
        P[:, n] *= reg.h_t
        V = u.evaluate(P).reshape(grids[0].shape)
        S = np.sign(V)
        hit = S == 0
        core = tuple(slice(0, len(ax) - 1) for ax in axes[:n]) + ((slice(0, 1),) if tfree else (slice(0, len(axes[n]) - 1),))
        m = hit[core].copy()
        for v in range(n + (0 if tfree else 1)):
            nxt = list(core)
            nxt[v] = slice(1, len(axes[v]))
            m |= (S[core] * S[tuple(nxt)]) < 0
        out = {}
        for idx in np.ndindex(*m.shape[:n]):
            key = tuple(int(axes[v][idx[v]]) for v in range(n))
            if tfree:
                if m[idx][0]:
                    out[key] = [(lo_t, hi_t)]
            else:
                runs = _runs_from_mask(m[idx], int(a[n]))
                if runs:
                    out[key] = runs
        return out

    return _branch_and_bound(reg, prune, leaf, tfree)


def singular_region(u: CaloricPolynomial, h: float, C: float = 1.0, bounds: ParabolicBall | None = None) -> GridRegion:
    """Grid proxy of S(u): nodes with |u| <= C h^2 and |grad u| <= C h."""
    reg = GridRegion(u.n, h, bounds)
    n = u.n
    polys = [u] + u.gradient()
    arrs = [_term_arrays(p) for p in polys]
    tol = [C * h * h] + [C * h] * n
    tfree = _time_free(u)
    lo_t, hi_t = reg.time_range()

    def prune(a, b):
        lo, hi = _box(reg, a, b)
        if tfree:
            lo[n], hi[n] = 0.0, 0.0
        for (E, c), t in zip(arrs, tol):
            l, r = _interval(E, c, lo, hi)
            if l > t or r < -t:
                return True
        return False

    def leaf(a, b):
        axes = _leaf_nodes(reg, a, b, 0, tfree)
        grids = np.meshgrid(*axes, indexing="ij")
        P = np.stack([g.ravel().astype(float) for g in grids], axis=1)
        P[:, :n] *= h
        P[:, n] *= reg.h_t
        val = np.abs(u.evaluate(P))
        g2 = sum(p.evaluate(P) ** 2 for p in polys[1:])
        m = ((val <= tol[0]) & (g2 <= (C * h) ** 2)).reshape(grids[0].shape)
        out = {}
        for idx in np.ndindex(*m.shape[:n]):
            key = tuple(int(axes[v][idx[v]]) for v in range(n))
            if tfree:
                if m[idx][0]:
                    out[key] = [(lo_t, hi_t)]
            else:
                runs = _runs_from_mask(m[idx], int(a[n]))
                if runs:
                    out[key] = runs
        return out

    return _branch_and_bound(reg, prune, leaf, tfree)


# ---------------------------------------------------------------------------
# quantitative strata
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StratumSpec:
    k: int
    eps: float
    r1: float
    r2: float = 1.0

    def __post_init__(self):
        if not 0 < self.r1 <= self.r2 <= 1:
            raise InputError("need 0 < r1 <= r2 <= 1")
        if self.k < 1:
            raise InputError("k must be >= 1")


def stratum_membership(u: CaloricPolynomial, spec: StratumSpec, points, n_scales: int = N_SCALES,
                       seed: int = 0, max_candidates: int = 4000) -> np.ndarray:
    """Membership in S^k_{eps, r1, r2}: E^{k+1,1}_r(x) >= eps on a geometric grid of r in [r1, r2].

    The pinching infimum is an upper bound over sampled subsets, so membership
    is decided conservatively towards inclusion.  When no independent subset
    is found the pinching is +inf and the scale counts as passed.
    """
    n = u.n
    if spec.k > n + 1:
        raise InputError("k must be at most n + 1")
    P = as_points(points, n)
    if not len(P):
        return np.zeros(0, dtype=bool)
    keys = model(u).keys(P)
    _, first, inv = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    U = P[first]
    scales = scale_grid(spec.r1, spec.r2, n_scales)
    alive = np.ones(len(U), dtype=bool)
    from .frequency import pinching_candidates
    for s in scales:
        offs = pinching_candidates(n, s, 1.0, spec.k + 1, seed, max_candidates)
        for i in np.flatnonzero(alive):
            v = kalpha_pinching(u, U[i], s, spec.k + 1, 1.0, candidates=U[i] + offs).kalpha_pinching
            if v < spec.eps:
                alive[i] = False
    return alive[inv.reshape(-1)]


def stratum_region(u: CaloricPolynomial, spec: StratumSpec, region: GridRegion, **kw) -> GridRegion:
    """Members of the stratum among the nodes of ``region``."""
    if _time_free(u):
        keys = list(region.columns)
        P = np.column_stack([np.array(keys, dtype=float).reshape(-1, u.n) * region.h, np.zeros(len(keys))])
        m = stratum_membership(u, spec, P, **kw)
        return GridRegion(u.n, region.h, region.bounds, {k: region.columns[k] for k, ok in zip(keys, m) if ok})
    I = region.nodes()
    P = I.astype(float)
    P[:, :-1] *= region.h
    P[:, -1] *= region.h_t
    m = stratum_membership(u, spec, P, **kw)
    return GridRegion.from_nodes(u.n, region.h, I[m], region.bounds)


# ---------------------------------------------------------------------------
# Minkowski content, dimension fits, time slices
# ---------------------------------------------------------------------------

def _ball_offsets(n: int, m: float) -> np.ndarray:
    """Integer vectors d with |d| < m."""
    R = int(math.ceil(m))
    axes = [np.arange(-R, R + 1)] * n
    grids = np.meshgrid(*axes, indexing="ij")
    D = np.stack([g.ravel() for g in grids], axis=1)
    return D[np.linalg.norm(D, axis=1) < m]


def dilate(region: GridRegion, r: float) -> GridRegion:
    """Nodes within parabolic distance < r of the region, clipped to its bounds."""
    h = region.h
    D = _ball_offsets(region.n, r / h)
    mt = int(math.ceil(r * r / region.h_t)) - 1
    cols: dict = {}
    for key, runs in region.columns.items():
        grown = [(a - mt, b + mt) for a, b in runs]
        k = np.array(key)
        for d in D:
            cols.setdefault(tuple((k + d).tolist()), []).extend(grown)
    return GridRegion(region.n, h, region.bounds, cols).clip()


def minkowski_content(region: GridRegion, r: float) -> float:
    """Box-count volume of P(region, r) intersected with the region's ball."""
    if region.h > r / 8 * (1 + 1e-12):
        raise PreconditionError(f"grid spacing {region.h} exceeds r/8 = {r / 8}")
    if region.is_empty():
        return 0.0
    return dilate(region, r).volume()


@dataclass(frozen=True)
class DimensionFit:
    slope: float
    intercept: float
    ci_low: float
    ci_high: float
    n_scales: int


def dimension_fit(volumes, n_boot: int = 2000, seed: int = 0, level: float = 0.95) -> DimensionFit:
    """Least-squares slope of log(volume) against log(r) with a bootstrap interval."""
    data = np.asarray(volumes, dtype=float).reshape(-1, 2)
    if len(data) < 4:
        raise InputError("need at least 4 scales")
    r, v = data[:, 0], data[:, 1]
    if np.any(r <= 0) or np.any(v <= 0):
        raise DegenerateError("radii and volumes must be positive")
    if r.max() / r.min() < 10 * (1 - 1e-12):
        raise InputError("scales must span at least one decade")
    x, y = np.log(r), np.log(v)
    slope, intercept = np.polyfit(x, y, 1)
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_boot):
        idx = rng.integers(0, len(x), len(x))
        if np.ptp(x[idx]) == 0:
            continue
        boots.append(np.polyfit(x[idx], y[idx], 1)[0])
    q = (1 - level) / 2
    lo, hi = np.quantile(boots, [q, 1 - q]) if boots else (slope, slope)
    return DimensionFit(float(slope), float(intercept), float(lo), float(hi), len(x))


def time_slice_measures(region: GridRegion, k: int, rho: float) -> dict:
    """Box-count shadow of int H^{k-2}(E_t) dt <= C H_P^k(E).

    Slices are covered by spatial cubes of side rho (counted per time node and
    weighted by rho^{k-2} h^2); the whole set by parabolic boxes rho x rho^2
    (weighted by rho^k).  Returns both sides and their ratio.
    """
    if rho < region.h:
        raise PreconditionError("rho must be at least the grid spacing")
    m = max(int(round(rho / region.h)), 1)
    mt = max(int(round(rho * rho / region.h_t)), 1)
    rho_x, rho_t = m * region.h, mt * region.h_t
    by_cube: dict = {}
    for key, runs in region.columns.items():
        by_cube.setdefault(tuple(v // m for v in key), []).extend(runs)
    slice_total = 0
    n_boxes = 0
    events: dict = {}
    for runs in by_cube.values():
        merged = _merge_runs(runs)
        for a, b in merged:
            slice_total += b - a + 1
            events[a] = events.get(a, 0) + 1
            events[b + 1] = events.get(b + 1, 0) - 1
        n_boxes += sum(b - a + 1 for a, b in _merge_runs([(a // mt, b // mt) for a, b in merged]))
    counts, level = {}, 0
    for j in sorted(events):
        level += events[j]
        counts[j] = level  # number of occupied cubes from time index j onward
    lhs = slice_total * rho_x ** (k - 2) * region.h_t
    rhs = n_boxes * rho_x ** (k - 2) * rho_t
    return {
        "lhs": float(lhs),
        "rhs": float(rhs),
        "ratio": float(lhs / rhs) if rhs > 0 else 0.0,
        "slice_counts": counts,
        "n_boxes": n_boxes,
    }


__all__ = [
    "GridRegion", "StratumSpec", "DimensionFit", "effective_nodal", "effective_singular", "effective_region",
    "nodal_region", "singular_region", "stratum_membership", "stratum_region", "dilate", "minkowski_content",
    "dimension_fit", "time_slice_measures", "scale_grid",
]

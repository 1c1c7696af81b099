"""Integration against conjugate heat kernel measures.

nu_{x0; t} is the Gaussian on R^n centred at x0 with covariance 2 tau I, where
tau = t0 - t > 0, placed on the time slice t.  Three integrators are provided:

* :func:`integrate_poly` - exact rational value from Gaussian moments;
* :func:`integrate_fn` - tensor Gauss-Hermite quadrature for smooth integrands;
* :class:`LocalExpansion` - vectorized float engine for one or several
  polynomials evaluated at many base points and scales at once.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from .caloricpoly import CaloricPolynomial, _frac, rational_point
from .errors import InputError, NumericError, PreconditionError
from .spacetime import SpaceTimePoint, as_points

DEFAULT_ORDER = 48
_MAX_ORDER = {1: 512, 2: 192, 3: 96}


def double_factorial(k: int) -> int:
    return math.prod(range(k, 0, -2)) if k > 0 else 1


@lru_cache(maxsize=None)
def _std_moment(q: int) -> int:
    """E[z^q] for z ~ N(0, 1)."""
    return 0 if q % 2 else double_factorial(q - 1)


def gaussian_moment(q: int, var):
    """E[y^q] for y ~ N(0, var); exact when ``var`` is rational."""
    if q % 2:
        return 0 * var
    return _std_moment(q) * var ** (q // 2)


@dataclass(frozen=True)
class HeatKernelMeasure:
    """Conjugate heat kernel measure based at ``base`` on the slice t = t0 - tau."""

    base: SpaceTimePoint
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise InputError("measure requires t < t0 (tau > 0)")

    @classmethod
    def at(cls, base, tau) -> "HeatKernelMeasure":
        b = base if isinstance(base, SpaceTimePoint) else SpaceTimePoint.from_array(base)
        return cls(b, tau)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def time(self) -> float:
        return self.base.t - float(self.tau)

    def density(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        tau = float(self.tau)
        d2 = np.sum((x - np.asarray(self.base.x)) ** 2, axis=1)
        return (4 * np.pi * tau) ** (-self.n / 2) * np.exp(-d2 / (4 * tau))


def integrate_poly(p: CaloricPolynomial, mu: HeatKernelMeasure) -> Fraction:
    """Exact integral of p over nu using E[y^{2k}] = (2k-1)!! (2 tau)^k."""
    if p.n != mu.n:
        raise InputError("dimension mismatch")
    tau = _frac(mu.tau)
    local = p.translate(rational_point(mu.base))
    var = 2 * tau
    total = Fraction(0)
    for (alpha, k), c in local.terms.items():
        if any(a % 2 for a in alpha):
            continue
        val = c * (-tau) ** k
        for a in alpha:
            val *= gaussian_moment(a, var)
        total += val
    return total


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss-Hermite rule for the standard Gaussian in n dimensions."""

    order: int
    n: int

    @property
    def nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        return _rule_1d(self.order)

    def tensor(self) -> tuple[np.ndarray, np.ndarray]:
        z, w = _rule_1d(self.order)
        Z = np.array(list(itertools.product(z, repeat=self.n)))
        W = np.prod(np.array(list(itertools.product(w, repeat=self.n))), axis=1)
        return Z, W


@lru_cache(maxsize=None)
def _rule_1d(order: int):
    z, w = hermegauss(order)
    return z, w / math.sqrt(2 * math.pi)


def _quad(f, mu: HeatKernelMeasure, order: int) -> float:
    Z, W = QuadratureRule(order, mu.n).tensor()
    tau = float(mu.tau)
    X = np.asarray(mu.base.x) + math.sqrt(2 * tau) * Z
    pts = np.column_stack([X, np.full(len(X), mu.time)])
    vals = np.asarray(f(pts), dtype=float).reshape(-1)
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise NumericError(f"integrand not finite at node {pts[i].tolist()}")
    return math.fsum(vals * W)


def integrate_fn(f, mu: HeatKernelMeasure, order: int = DEFAULT_ORDER, adaptive: bool = True,
                 rtol: float = 1e-9, max_order: int | None = None) -> tuple[float, float]:
    """Gauss-Hermite integral of f against mu with an error estimate.

    ``f`` maps an array of space-time points (P, n+1) to values (P,).  The error
    estimate is |Q_order - Q_{order/2}|; with ``adaptive`` the order is doubled
    while the estimate exceeds ``rtol * |value|``.
    """
    if order < 2:
        raise InputError("quadrature order must be >= 2")
    cap = max_order or _MAX_ORDER.get(mu.n, 48)
    while True:
        val = _quad(f, mu, order)
        err = abs(val - _quad(f, mu, max(order // 2, 1)))
        if not adaptive or err <= rtol * abs(val) or order * 2 > cap:
            return val, err
        order *= 2


def basepoint_comparison(u, x0, x1, tau: float, theta: float, sigma: float, r: float) -> dict:
    """Compare int u^2 dnu_{x0; t0 - tau} with int u^2 dnu_{x1; t1 - (1 + theta) tau}.

    Hypotheses: |x1 - x0| < r, |t1 - t0| <= sigma r^2, tau >= 6 sigma r^2 / theta,
    0 < theta <= 1/4, 0 < sigma <= 1.
    """
    a, b = as_points(x0)[0], as_points(x1)[0]
    if not 0 < theta <= 0.25:
        raise PreconditionError("theta must lie in (0, 1/4]")
    if not 0 < sigma <= 1:
        raise PreconditionError("sigma must lie in (0, 1]")
    if not np.linalg.norm(b[:-1] - a[:-1]) < r:
        raise PreconditionError("|x1 - x0| < r fails")
    if not abs(b[-1] - a[-1]) <= sigma * r * r:
        raise PreconditionError("|t1 - t0| <= sigma r^2 fails")
    if not tau >= 6 * sigma * r * r / theta:
        raise PreconditionError("tau >= 6 sigma r^2 / theta fails")
    I0 = float(integrate_poly(u * u, HeatKernelMeasure.at(a, tau)))
    I1 = float(integrate_poly(u * u, HeatKernelMeasure.at(b, (1 + theta) * tau)))
    ratio = I0 / I1 if I1 > 0 else np.inf
    return {"I0": I0, "I1": I1, "ratio": ratio, "bounded": bool(np.isfinite(ratio))}


# ---------------------------------------------------------------------------
# vectorized local expansions
# ---------------------------------------------------------------------------

class LocalExpansion:
    """Float Taylor expansions of fixed polynomials about many base points.

    For polynomials p_1..p_Q the coefficients of q(y, s) = p(x0 + y, t0 + s) are
    a linear function of the monomials of the base point; that map is assembled
    once so that expansions at P base points cost one matrix product.

    For caloric inputs the parabolic-degree blocks of the local coefficients are
    the spectral components, and ``gram`` returns their pairwise integrals at
    tau = 1; the value at scale tau is obtained by multiplying block m by tau^m.
    """

    chunk = 20000

    def __init__(self, polys):
        if isinstance(polys, CaloricPolynomial):
            polys = [polys]
        polys = list(polys)
        if not polys:
            raise InputError("need at least one polynomial")
        n = polys[0].n
        if any(p.n != n for p in polys):
            raise InputError("dimension mismatch")
        self.n = n
        self.Q = len(polys)
        nv = n + 1
        targets: dict = {}
        shifts: dict = {}
        entries = []  # (q, shift_index, target_index, value)
        for q, p in enumerate(polys):
            for (alpha, k), c in p.terms.items():
                exps = tuple(alpha) + (k,)
                for sub in itertools.product(*[range(e + 1) for e in exps]):
                    d = tuple(e - s for e, s in zip(exps, sub))
                    mult = float(c) * math.prod(math.comb(e, s) for e, s in zip(exps, sub))
                    ti = targets.setdefault(sub, len(targets))
                    di = shifts.setdefault(d, len(shifts))
                    entries.append((q, di, ti, mult))
        if not targets:
            targets[(0,) * nv] = 0
            shifts[(0,) * nv] = 0
        self.targets = np.array(list(targets), dtype=np.int64).reshape(-1, nv)
        self.shifts = np.array(list(shifts), dtype=np.int64).reshape(-1, nv)
        T, D = len(self.targets), len(self.shifts)
        M = np.zeros((D, self.Q, T))
        for q, di, ti, v in entries:
            M[di, q, ti] += v
        self._M = M.reshape(D, self.Q * T)
        self.T = T
        self.degrees = self.targets[:, :-1].sum(axis=1) + 2 * self.targets[:, -1]
        self.max_degree = int(self.degrees.max()) if T else 0
        self._blocks = [np.flatnonzero(self.degrees == m) for m in range(self.max_degree + 1)]
        self._grams = [self._gram_block(idx) for idx in self._blocks]
        self._weights1 = self._moment_weights()

    def _gram_block(self, idx: np.ndarray) -> np.ndarray:
        if idx.size == 0:
            return np.zeros((0, 0))
        B = self.targets[idx]
        G = np.empty((len(idx), len(idx)))
        for a in range(len(idx)):
            for b in range(len(idx)):
                s = B[a, :-1] + B[b, :-1]
                if np.any(s % 2):
                    G[a, b] = 0.0
                    continue
                sign = -1.0 if (B[a, -1] + B[b, -1]) % 2 else 1.0
                G[a, b] = sign * math.prod(float(gaussian_moment(int(q), 2)) for q in s)
        return G

    def _moment_weights(self) -> np.ndarray:
        w = np.empty(self.T)
        for i, row in enumerate(self.targets):
            if np.any(row[:-1] % 2):
                w[i] = 0.0
            else:
                w[i] = (-1.0) ** row[-1] * math.prod(float(gaussian_moment(int(q), 2)) for q in row[:-1])
        return w

    def _mono(self, B: np.ndarray) -> np.ndarray:
        maxe = self.shifts.max(axis=0)
        pw = []
        for v in range(self.n + 1):
            cols = [np.ones(len(B))]
            for _ in range(int(maxe[v])):
                cols.append(cols[-1] * B[:, v])
            pw.append(np.stack(cols, axis=1))
        out = np.ones((len(B), len(self.shifts)))
        for v in range(self.n + 1):
            out *= pw[v][:, self.shifts[:, v]]
        return out

    def coefficients(self, bases) -> np.ndarray:
        """Local coefficients, shape (P, Q, T), in the order of ``self.targets``."""
        B = as_points(bases, self.n)
        out = np.empty((len(B), self.Q * self.T))
        for s in range(0, len(B), self.chunk):
            out[s:s + self.chunk] = self._mono(B[s:s + self.chunk]) @ self._M
        return out.reshape(len(B), self.Q, self.T)

    def gram(self, bases=None, coefs: np.ndarray | None = None) -> np.ndarray:
        """Spectral Gram tensor G[p, q, r, m] = int p_m^(q) p_m^(r) dnu_{-1} at each base.

        Only meaningful when every polynomial is caloric (then blocks of
        different degree are orthogonal).
        """
        C = self.coefficients(bases) if coefs is None else coefs
        out = np.zeros((C.shape[0], self.Q, self.Q, self.max_degree + 1))
        for m, (idx, G) in enumerate(zip(self._blocks, self._grams)):
            if idx.size == 0:
                continue
            Cm = C[:, :, idx]
            out[..., m] = np.einsum("pqi,ij,prj->pqr", Cm, G, Cm, optimize=True)
        return out

    def masses(self, bases=None, coefs: np.ndarray | None = None) -> np.ndarray:
        """Diagonal of :meth:`gram`: shape (P, Q, max_degree + 1)."""
        C = self.coefficients(bases) if coefs is None else coefs
        out = np.zeros((C.shape[0], self.Q, self.max_degree + 1))
        for m, (idx, G) in enumerate(zip(self._blocks, self._grams)):
            if idx.size == 0:
                continue
            Cm = C[:, :, idx]
            out[..., m] = np.einsum("pqi,ij,pqj->pq", Cm, G, Cm, optimize=True)
        return out

    def integrals(self, bases, taus) -> np.ndarray:
        """int p_q dnu_{base; t0 - tau}, shape (P, Q, len(taus)); any polynomial."""
        C = self.coefficients(bases)
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        scale = taus[None, :] ** (self.degrees[:, None] / 2.0)  # (T, S)
        return np.einsum("pqt,t,ts->pqs", C, self._weights1, scale)


def expectation(p: CaloricPolynomial, base, tau) -> float:
    """Float integral of an arbitrary polynomial against nu_{base; t0 - tau}."""
    return float(LocalExpansion(p).integrals(as_points(base), [tau])[0, 0, 0])


__all__ = [
    "HeatKernelMeasure", "QuadratureRule", "LocalExpansion", "integrate_poly", "integrate_fn",
    "basepoint_comparison", "gaussian_moment", "expectation", "DEFAULT_ORDER",
]

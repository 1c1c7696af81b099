"""Exact polynomial algebra in (x, t) with rational coefficients.

A polynomial is stored as a sparse map ``(alpha, k) -> Fraction`` for the
monomial x^alpha t^k.  All algebraic operations are exact; floating point only
appears in :meth:`CaloricPolynomial.evaluate`.

The parabolic degree of x^alpha t^k is |alpha| + 2k.  A caloric polynomial
(d_t u = Laplacian u) splits at any base point into parabolically homogeneous
caloric pieces, and those pieces are exactly the eigenfunctions of the drift
operator A = 2(t0 - t) Laplacian - (x - x0).grad with A p_m = -m p_m.
"""
from __future__ import annotations

import json
from fractions import Fraction
from functools import cached_property, lru_cache
from math import comb
from typing import Iterable, Mapping

import numpy as np

from .errors import InputError, UnsupportedInputError

MAX_DEGREE = 16

Monomial = tuple  # (alpha: tuple[int, ...], k: int)


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        return Fraction(v.strip())
    return Fraction(float(v))  # exact binary value of the float


def rational_point(p, n: int | None = None) -> tuple:
    """Exact rational coordinates (x_1..x_n, t) of a point-like object."""
    from .spacetime import SpaceTimePoint
    if isinstance(p, SpaceTimePoint):
        vals = list(p.x) + [p.t]
    else:
        vals = list(np.ravel(p)) if isinstance(p, np.ndarray) else list(p)
    out = tuple(_frac(v) for v in vals)
    if n is not None and len(out) != n + 1:
        raise InputError(f"base point has dimension {len(out) - 1}, expected {n}")
    return out


class CaloricPolynomial:
    """Sparse multivariate polynomial in x_1..x_n and t with rational coefficients.

    Parameters
    ----------
    n : int
        Spatial dimension.
    terms : mapping
        ``{(alpha, k): coefficient}``; zero coefficients are dropped.
    """

    __slots__ = ("n", "terms", "__dict__")

    def __init__(self, n: int, terms: Mapping | None = None):
        if n < 1:
            raise InputError("spatial dimension must be >= 1")
        self.n = int(n)
        clean: dict = {}
        for (alpha, k), c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n or min(alpha, default=0) < 0 or k < 0:
                raise InputError(f"bad monomial {(alpha, k)} for n={n}")
            c = _frac(c)
            if c:
                key = (alpha, int(k))
                clean[key] = clean.get(key, Fraction(0)) + c
                if not clean[key]:
                    del clean[key]
        self.terms = clean

    # -- constructors -------------------------------------------------------
    @classmethod
    def constant(cls, n: int, c=1) -> "CaloricPolynomial":
        return cls(n, {((0,) * n, 0): c})

    @classmethod
    def variable(cls, n: int, i: int) -> "CaloricPolynomial":
        """x_i for 0 <= i < n, or t for i == n."""
        if i == n:
            return cls(n, {((0,) * n, 1): 1})
        alpha = [0] * n
        alpha[i] = 1
        return cls(n, {(tuple(alpha), 0): 1})

    @classmethod
    def monomial(cls, alpha, k: int = 0, coef=1) -> "CaloricPolynomial":
        alpha = tuple(alpha)
        return cls(len(alpha), {(alpha, k): coef})

    # -- basic protocol -----------------------------------------------------
    def __repr__(self) -> str:
        return f"CaloricPolynomial(n={self.n}, {self.to_string()})"

    def to_string(self) -> str:
        if not self.terms:
            return "0"
        names = [f"x{i + 1}" for i in range(self.n)] if self.n > 1 else ["x"]
        parts = []
        for (alpha, k), c in sorted(self.terms.items(), key=lambda kv: (-self._deg(kv[0]), kv[0])):
            mon = "*".join(
                [f"{names[i]}^{a}" if a > 1 else names[i] for i, a in enumerate(alpha) if a]
                + ([f"t^{k}" if k > 1 else "t"] if k else []))
            parts.append(f"{c}" + (f"*{mon}" if mon else "") if c != 1 or not mon else mon)
        return " + ".join(parts)

    @staticmethod
    def _deg(key) -> int:
        alpha, k = key
        return sum(alpha) + 2 * k

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = CaloricPolynomial.constant(self.n, other)
        if not isinstance(other, CaloricPolynomial):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: "CaloricPolynomial"):
        if other.n != self.n:
            raise InputError(f"dimension mismatch {self.n} vs {other.n}")

    def _coerce(self, other) -> "CaloricPolynomial":
        if isinstance(other, CaloricPolynomial):
            self._check(other)
            return other
        return CaloricPolynomial.constant(self.n, _frac(other))

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            v = out.get(key, Fraction(0)) + c
            if v:
                out[key] = v
            else:
                out.pop(key, None)
        return CaloricPolynomial(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return CaloricPolynomial(self.n, {key: -c for key, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, CaloricPolynomial):
            c = _frac(other)
            return CaloricPolynomial(self.n, {key: v * c for key, v in self.terms.items()})
        self._check(other)
        out: dict = {}
        for (a1, k1), c1 in self.terms.items():
            for (a2, k2), c2 in other.terms.items():
                key = (tuple(x + y for x, y in zip(a1, a2)), k1 + k2)
                out[key] = out.get(key, Fraction(0)) + c1 * c2
        return CaloricPolynomial(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise InputError("negative power")
        out = CaloricPolynomial.constant(self.n, 1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    # -- calculus -------------------------------------------------------------
    @property
    def degree(self) -> int:
        """Parabolic degree max(|alpha| + 2k); -1 for the zero polynomial."""
        return max((self._deg(key) for key in self.terms), default=-1)

    def diff(self, i: int) -> "CaloricPolynomial":
        """Partial derivative in x_i (i < n) or in t (i == n)."""
        out = {}
        for (alpha, k), c in self.terms.items():
            if i == self.n:
                if k:
                    out[(alpha, k - 1)] = c * k
            elif alpha[i]:
                a = list(alpha)
                a[i] -= 1
                out[(tuple(a), k)] = c * alpha[i]
        return CaloricPolynomial(self.n, out)

    def dt(self) -> "CaloricPolynomial":
        return self.diff(self.n)

    def gradient(self) -> list:
        return [self.diff(i) for i in range(self.n)]

    def laplacian(self) -> "CaloricPolynomial":
        out = CaloricPolynomial(self.n)
        for i in range(self.n):
            out = out + self.diff(i).diff(i)
        return out

    def directional(self, v) -> "CaloricPolynomial":
        """v . grad p for a rational vector v."""
        out = CaloricPolynomial(self.n)
        for i, vi in enumerate(v):
            vi = _frac(vi)
            if vi:
                out = out + self.diff(i) * vi
        return out

    @cached_property
    def is_caloric(self) -> bool:
        return heat_residual(self).is_zero()

    def homogeneous_part(self, m: int) -> "CaloricPolynomial":
        """Terms of parabolic degree exactly m (grading at the origin)."""
        return CaloricPolynomial(self.n, {key: c for key, c in self.terms.items() if self._deg(key) == m})

    # -- substitution ---------------------------------------------------------
    def affine_substitute(self, shift, scale) -> "CaloricPolynomial":
        """Return p(shift_i + scale_i * x_i, shift_t + scale_t * t) exactly.

        ``shift`` and ``scale`` have length n + 1 (time last).
        """
        shift = [_frac(v) for v in shift]
        scale = [_frac(v) for v in scale]
        if len(shift) != self.n + 1 or len(scale) != self.n + 1:
            raise InputError("shift/scale must have length n+1")
        nv = self.n + 1
        out: dict = {}
        for (alpha, k), c in self.terms.items():
            exps = list(alpha) + [k]
            # expand prod_v (a_v + b_v y_v)^{e_v}
            partial = {tuple([0] * nv): c}
            for v, e in enumerate(exps):
                if e == 0:
                    continue
                a, b = shift[v], scale[v]
                uni = [(j, comb(e, j) * a ** (e - j) * b ** j) for j in range(e + 1)]
                uni = [(j, w) for j, w in uni if w]
                nxt: dict = {}
                for key, val in partial.items():
                    for j, w in uni:
                        kk = list(key)
                        kk[v] += j
                        kk = tuple(kk)
                        nxt[kk] = nxt.get(kk, Fraction(0)) + val * w
                partial = nxt
            for key, val in partial.items():
                mk = (key[:-1], key[-1])
                out[mk] = out.get(mk, Fraction(0)) + val
        return CaloricPolynomial(self.n, out)

    def linear_substitute(self, Q) -> "CaloricPolynomial":
        """Return p(Q x, t) for an n x n matrix Q (entries converted exactly)."""
        Q = np.array(Q, dtype=object)  # keeps Fraction entries exact
        if Q.shape != (self.n, self.n):
            raise InputError("Q must be n x n")
        forms = [CaloricPolynomial(self.n, {(tuple(int(j == c) for j in range(self.n)), 0): _frac(Q[i, c])
                                            for c in range(self.n) if Q[i, c] != 0})
                 for i in range(self.n)]
        powers: dict = {}

        def pw(i, e):
            if (i, e) not in powers:
                powers[(i, e)] = forms[i] ** e
            return powers[(i, e)]

        out = CaloricPolynomial(self.n)
        for (alpha, k), c in self.terms.items():
            term = CaloricPolynomial.monomial((0,) * self.n, k, c)
            for i, e in enumerate(alpha):
                if e:
                    term = term * pw(i, e)
            out = out + term
        return out

    def translate(self, base) -> "CaloricPolynomial":
        """Local form q(y, s) = p(x0 + y, t0 + s)."""
        b = rational_point(base, self.n)
        return self.affine_substitute(b, [1] * (self.n + 1))

    def untranslate(self, base) -> "CaloricPolynomial":
        """Inverse of :meth:`translate`: q(x - x0, t - t0)."""
        b = rational_point(base, self.n)
        return self.affine_substitute([-v for v in b], [1] * (self.n + 1))

    # -- numerics -------------------------------------------------------------
    @cached_property
    def _compiled(self):
        keys = sorted(self.terms)
        E = np.array([list(a) + [k] for a, k in keys], dtype=np.int64).reshape(len(keys), self.n + 1)
        C = np.array([float(self.terms[key]) for key in keys], dtype=float)
        return E, C

    def evaluate(self, points) -> np.ndarray:
        """Float evaluation at points of shape (P, n+1) (or a single point)."""
        P = np.asarray(points, dtype=float)
        single = P.ndim == 1
        P = np.atleast_2d(P)
        if P.shape[1] != self.n + 1:
            raise InputError(f"points have dimension {P.shape[1] - 1}, expected {self.n}")
        E, C = self._compiled
        if len(C) == 0:
            out = np.zeros(len(P))
        else:
            maxe = E.max(axis=0)
            out = np.zeros(len(P))
            pw = [np.ones((len(P), int(m) + 1)) for m in maxe]
            for v in range(self.n + 1):
                for e in range(1, int(maxe[v]) + 1):
                    pw[v][:, e] = pw[v][:, e - 1] * P[:, v]
            for row, c in zip(E, C):
                term = np.full(len(P), c)
                for v, e in enumerate(row):
                    if e:
                        term = term * pw[v][:, e]
                out += term
        return out[0] if single else out

    def __call__(self, points):
        return self.evaluate(points)

    # -- serialization ----------------------------------------------------------
    def to_spec(self, caloric_check: bool = True) -> dict:
        terms = [{"alpha": list(a), "k": k, "coef": str(c)} for (a, k), c in sorted(self.terms.items())]
        return {"n": self.n, "terms": terms, "caloric_check": caloric_check}

    @classmethod
    def from_spec(cls, spec) -> "CaloricPolynomial":
        """Build from a spec dict, JSON text, or path to a JSON file.

        Raises ``UnsupportedInputError`` when ``caloric_check`` is set and the
        polynomial is not caloric.
        """
        if isinstance(spec, str):
            text = spec
            if not spec.lstrip().startswith("{"):
                with open(spec) as fh:
                    text = fh.read()
            spec = json.loads(text)
        try:
            n = int(spec["n"])
            terms = {}
            for term in spec["terms"]:
                key = (tuple(int(a) for a in term["alpha"]), int(term.get("k", 0)))
                terms[key] = terms.get(key, Fraction(0)) + _frac(str(term["coef"]))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise InputError(f"malformed function spec: {exc}") from exc
        p = cls(n, terms)
        if spec.get("caloric_check", False) and not p.is_caloric:
            raise UnsupportedInputError(f"function is not caloric: residual {heat_residual(p).to_string()}")
        return p


# ---------------------------------------------------------------------------
# heat polynomials
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _heat_1d(m: int) -> tuple:
    """Coefficients {(j, k): c} of the 1D heat polynomial h_m in x^j t^k."""
    h_prev, h = {(0, 0): Fraction(1)}, {(1, 0): Fraction(1)}
    if m == 0:
        return tuple(h_prev.items())
    for mm in range(1, m):
        nxt: dict = {}
        for (j, k), c in h.items():
            nxt[(j + 1, k)] = nxt.get((j + 1, k), 0) + c
        for (j, k), c in h_prev.items():
            nxt[(j, k + 1)] = nxt.get((j, k + 1), 0) + 2 * mm * c
        h_prev, h = h, {key: v for key, v in nxt.items() if v}
    return tuple(h.items())


def heat_polynomial(m: int, axis: int = 0, n: int | None = None, max_degree: int = MAX_DEGREE) -> CaloricPolynomial:
    """One-dimensional heat polynomial h_m in the variable x_axis.

    h_0 = 1, h_1 = x, h_{m+1} = x h_m + 2 t m h_{m-1}.  ``n`` defaults to
    ``axis + 1``.
    """
    if m < 0:
        raise InputError("degree must be >= 0")
    if m > max_degree:
        raise InputError(f"degree {m} exceeds max_degree={max_degree}")
    n = axis + 1 if n is None else n
    if not 0 <= axis < n:
        raise InputError("axis out of range")
    terms = {}
    for (j, k), c in _heat_1d(m):
        alpha = [0] * n
        alpha[axis] = j
        terms[(tuple(alpha), k)] = c
    return CaloricPolynomial(n, terms)


def heat_basis(alpha, max_degree: int = MAX_DEGREE) -> CaloricPolynomial:
    """Product heat polynomial H_alpha = prod_i h_{alpha_i}(x_i)."""
    n = len(alpha)
    out = CaloricPolynomial.constant(n, 1)
    for i, a in enumerate(alpha):
        if a:
            out = out * heat_polynomial(a, i, n, max_degree)
    return out


def heat_residual(p: CaloricPolynomial) -> CaloricPolynomial:
    """Exact heat residual d_t p - Laplacian p."""
    return p.dt() - p.laplacian()


# ---------------------------------------------------------------------------
# drift operator and commutators
# ---------------------------------------------------------------------------

class DriftOperator:
    """A = 2(t0 - t) Laplacian - (x - x0) . grad, based at (x0, t0)."""

    def __init__(self, base):
        self.base = rational_point(base)

    @property
    def n(self) -> int:
        return len(self.base) - 1

    def __repr__(self):
        return f"DriftOperator(base={tuple(str(b) for b in self.base)})"

    def apply(self, p: CaloricPolynomial) -> CaloricPolynomial:
        if p.n != self.n:
            raise InputError("dimension mismatch between operator and polynomial")
        n = p.n
        x0, t0 = self.base[:-1], self.base[-1]
        t = CaloricPolynomial.variable(n, n)
        out = (t0 - t) * p.laplacian() * 2
        for i in range(n):
            xi = CaloricPolynomial.variable(n, i) - x0[i]
            out = out - xi * p.diff(i)
        return out

    __call__ = apply


def drift_apply(A: DriftOperator, p: CaloricPolynomial) -> CaloricPolynomial:
    """Apply the drift operator A to p (exact)."""
    return A.apply(p)


def commutator(A1: DriftOperator, A2: DriftOperator, u: CaloricPolynomial) -> CaloricPolynomial:
    """[A1, A2] u = A1(A2 u) - A2(A1 u)."""
    return A1(A2(u)) - A2(A1(u))


def commutator_residuals(u: CaloricPolynomial, x1, x2) -> tuple:
    """Exact residuals of the two commutator identities between base points x1, x2.

    spatial  = grad u . (x2 - x1) - (2 A2 u - 2 A1 u - [A1, A2] u)
    temporal = 2 (t2 - t1) d_t u - ([A1, A2] u + A1 u - A2 u)

    The first vanishes for every polynomial, the second for caloric u.
    """
    A1, A2 = DriftOperator(x1), DriftOperator(x2)
    if A1.n != u.n or A2.n != u.n:
        raise InputError("dimension mismatch")
    a1, a2 = A1(u), A2(u)
    c = A1(a2) - A2(a1)
    dx = [b - a for a, b in zip(A1.base[:-1], A2.base[:-1])]
    dtt = A2.base[-1] - A1.base[-1]
    spatial = u.directional(dx) - (a2 * 2 - a1 * 2 - c)
    temporal = u.dt() * (2 * dtt) - (c + a1 - a2)
    return spatial, temporal


# ---------------------------------------------------------------------------
# decomposition and rescaling
# ---------------------------------------------------------------------------

def spectral_decompose(u: CaloricPolynomial, base, tau=1) -> list:
    """Split a caloric polynomial into homogeneous caloric pieces at ``base``.

    Returns ``[(m, p_m), ...]`` with nonzero p_m in increasing m.  The pieces are
    orthogonal in L^2 of every conjugate heat kernel measure based at ``base`` and
    satisfy A p_m = -m p_m, so the result does not depend on ``tau``.
    """
    if _frac(tau) <= 0:
        raise InputError("tau must be positive")
    if not u.is_caloric:
        raise UnsupportedInputError("spectral decomposition requires a caloric polynomial")
    local = u.translate(base)
    groups: dict = {}
    for key, c in local.terms.items():
        groups.setdefault(CaloricPolynomial._deg(key), {})[key] = c
    return [(m, CaloricPolynomial(u.n, groups[m]).untranslate(base)) for m in sorted(groups)]


def parabolic_rescale(u: CaloricPolynomial, center, lam) -> CaloricPolynomial:
    """u(x0 + lam (x - x0), t0 + lam^2 (t - t0)), exactly."""
    lam = _frac(lam)
    if lam <= 0:
        raise InputError("lambda must be positive")
    c = rational_point(center, u.n)
    shift = [v * (1 - lam) for v in c[:-1]] + [c[-1] * (1 - lam * lam)]
    scale = [lam] * u.n + [lam * lam]
    return u.affine_substitute(shift, scale)


# ---------------------------------------------------------------------------
# random families (tests and verification suites)
# ---------------------------------------------------------------------------

def random_polynomial(n: int, max_degree: int, rng: np.random.Generator, n_terms: int = 6,
                      denom: int = 7) -> CaloricPolynomial:
    """Random polynomial with small rational coefficients and |alpha| + k <= max_degree."""
    terms = {}
    for _ in range(n_terms):
        total = int(rng.integers(0, max_degree + 1))
        k = int(rng.integers(0, total + 1))
        alpha = [0] * n
        for _ in range(total - k):
            alpha[int(rng.integers(0, n))] += 1
        terms[(tuple(alpha), k)] = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, denom + 1)))
    return CaloricPolynomial(n, terms)


def random_caloric(n: int, max_degree: int, rng: np.random.Generator, n_terms: int = 4,
                   shift: bool = True, denom: int = 5) -> CaloricPolynomial:
    """Random combination of product heat polynomials, optionally re-centered.

    The parabolic degree of every piece is at most ``max_degree``.
    """
    out = CaloricPolynomial(n)
    for _ in range(n_terms):
        m = int(rng.integers(0, max_degree + 1))
        alpha = [0] * n
        for _ in range(m):
            alpha[int(rng.integers(0, n))] += 1
        out = out + heat_basis(alpha) * Fraction(int(rng.integers(-6, 7)) or 1, int(rng.integers(1, denom + 1)))
    if out.is_zero():
        out = CaloricPolynomial.constant(n, 1)
    if shift:
        c = [Fraction(int(rng.integers(-4, 5)), 8) for _ in range(n + 1)]
        out = out.affine_substitute(c, [1] * (n + 1))
    return out


__all__ = [
    "CaloricPolynomial", "DriftOperator", "heat_polynomial", "heat_basis", "heat_residual",
    "drift_apply", "commutator", "commutator_residuals", "spectral_decompose", "parabolic_rescale",
    "random_polynomial", "random_caloric", "rational_point", "MAX_DEGREE",
]

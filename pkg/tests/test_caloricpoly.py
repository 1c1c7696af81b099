from fractions import Fraction

import numpy as np
import pytest

from caloric.caloricpoly import (
    CaloricPolynomial, DriftOperator, commutator_residuals, drift_apply, heat_polynomial, heat_residual,
    parabolic_rescale, random_caloric, random_polynomial, spectral_decompose,
)
from caloric.errors import InputError, UnsupportedInputError


def x(n=1, i=0):
    return CaloricPolynomial.variable(n, i)


def t(n=1):
    return CaloricPolynomial.variable(n, n)


def test_heat_polynomials_low_degree():
    assert heat_polynomial(0) == 1
    assert heat_polynomial(2) == x() * x() + t() * 2
    x2 = x() * x()
    assert heat_polynomial(4) == x2 * x2 + x2 * t() * 12 + t() * t() * 12


def test_heat_residual_examples():
    assert heat_residual(heat_polynomial(2)).is_zero()
    assert heat_residual(x() * x()) == -2
    p = heat_polynomial(3, axis=0, n=2) * heat_polynomial(2, axis=1, n=2)
    assert heat_residual(p).is_zero()


def test_drift_eigen_examples():
    A = DriftOperator((0, 0))
    assert drift_apply(A, CaloricPolynomial.constant(1)).is_zero()
    assert drift_apply(A, x()) == x() * -1
    h2 = heat_polynomial(2)
    assert drift_apply(A, h2) == h2 * -2


@pytest.mark.parametrize("m", range(8))
def test_heat_polynomial_is_eigenfunction(m):
    h = heat_polynomial(m, n=2, axis=1)
    assert heat_residual(h).is_zero()
    assert DriftOperator((0, 0, 0))(h) == h * (-m)


def test_commutator_spatial_identity_any_polynomial(rng):
    for _ in range(10):
        u = random_polynomial(2, 4, rng)
        s, _ = commutator_residuals(u, (0, 0, 0), (Fraction(1, 3), -1, Fraction(2, 5)))
        assert s.is_zero()


def test_commutator_temporal_identity_caloric(rng):
    for _ in range(10):
        u = random_caloric(2, 4, rng)
        _, tr = commutator_residuals(u, (1, 0, 0), (0, Fraction(1, 2), 1))
        assert tr.is_zero()


def test_commutator_temporal_residual_of_x_squared():
    _, tr = commutator_residuals(x() * x(), (0, 0), (0, 1))
    assert tr == -4


def test_spectral_decompose_examples():
    h1, h2, h3 = (heat_polynomial(m) for m in (1, 2, 3))
    assert spectral_decompose(h2, (0, 0)) == [(2, h2)]
    u = h1 + h3 * 5 + 3
    for tau in (1, Fraction(1, 7), 9):
        assert spectral_decompose(u, (0, 0), tau) == [(0, CaloricPolynomial.constant(1, 3)), (1, h1), (3, h3 * 5)]
    raw = x() * x() + t() * 2
    assert spectral_decompose(raw, (0, 0)) == [(2, raw)]


def test_spectral_decompose_rejects_non_caloric():
    with pytest.raises(UnsupportedInputError):
        spectral_decompose(x() * x(), (0, 0))


def test_spectral_pieces_at_shifted_base():
    u = heat_polynomial(2) + 1
    pieces = spectral_decompose(u, (1, 0))
    assert sum((p for _, p in pieces), CaloricPolynomial.constant(1, 0)) == u
    for m, p in pieces:
        assert DriftOperator((1, 0))(p) == p * (-m)


def test_parabolic_rescale_homogeneity():
    assert parabolic_rescale(heat_polynomial(1), (0, 0), 2) == heat_polynomial(1) * 2
    assert parabolic_rescale(heat_polynomial(2), (0, 0), 3) == heat_polynomial(2) * 9


def test_parabolic_rescale_shifted_center(rng):
    u = heat_polynomial(2) + 1
    c, lam = np.array([1.0, 0.0]), 2.0
    v = parabolic_rescale(u, (1, 0), 2)
    pts = rng.normal(size=(100, 2))
    moved = np.column_stack([c[0] + lam * (pts[:, 0] - c[0]), c[1] + lam ** 2 * (pts[:, 1] - c[1])])
    assert np.allclose(v.evaluate(pts), u.evaluate(moved), rtol=1e-12, atol=1e-12)


def test_rescale_rejects_nonpositive_lambda():
    with pytest.raises(InputError):
        parabolic_rescale(heat_polynomial(1), (0, 0), 0)


def test_spec_roundtrip():
    u = heat_polynomial(3, axis=1, n=2) * Fraction(2, 7) + 1
    assert CaloricPolynomial.from_spec(u.to_spec()) == u


def test_spec_caloric_check():
    spec = (x() * x()).to_spec(caloric_check=True)
    with pytest.raises(UnsupportedInputError):
        CaloricPolynomial.from_spec(spec)


def test_malformed_spec():
    with pytest.raises(InputError):
        CaloricPolynomial.from_spec({"n": 1})

import math

import numpy as np
import pytest

from csmult.analysis.functions import (
    FunctionEvaluationError,
    PullbackSeries,
    Rational,
    UnboundQuotient,
    UnsupportedOperationError,
    constant,
    diff_quotient,
    pole,
    polynomial,
)
from csmult.analysis.geometry import build_domain


@pytest.fixture(scope="module")
def disc():
    return build_domain((1.0,))


@pytest.fixture(scope="module")
def quad_domain():
    return build_domain((1.0, 0.2))


def test_rational_derivative_matches_finite_difference(disc):
    f = polynomial([1.0, 2.0, 0.0, 1j]) + pole(2.0, 2, 3.0)
    zeta, h = 0.3 + 0.2j, 1e-6
    numeric = (f.at(disc, zeta + h) - f.at(disc, zeta - h)) / (2 * h)

    assert complex(f.derivative(disc).at(disc, zeta)) == pytest.approx(complex(numeric), abs=1e-7)


def test_rational_rejects_evaluation_at_pole(disc):
    with pytest.raises(FunctionEvaluationError):
        pole(0.5).at(disc, 0.5)


def test_pullback_derivative_uses_chain_rule(quad_domain):
    # F(z) = z + z³, so f′(φ(z)) = F′(z) / φ′(z)
    f = PullbackSeries((0.0, 1.0, 0.0, 1.0))
    z = 0.5 + 0.2j
    expected = (1 + 3 * z**2) / quad_domain.dphi(z)

    assert complex(f.derivative(quad_domain).on_curve(quad_domain, z)) == pytest.approx(expected, abs=1e-12)


def test_pullback_second_derivative_matches_difference(quad_domain):
    f = PullbackSeries((0.0, 1.0, 0.5j, 1.0))
    first = f.derivative(quad_domain)
    second = first.derivative(quad_domain)
    z, h = 0.4 - 0.3j, 1e-5
    # Differentiate in ζ: dζ = φ′(z) dz
    numeric = (first.on_curve(quad_domain, z + h) - first.on_curve(quad_domain, z - h)) / (2 * h)
    numeric = numeric / quad_domain.dphi(z)

    assert complex(second.on_curve(quad_domain, z)) == pytest.approx(complex(numeric), abs=1e-7)


def test_pullback_agrees_with_rational_on_disc(disc):
    coeffs = (0.5, -1.0, 2j)
    z = 0.7 * np.exp(1j * np.linspace(0, 6, 9))

    assert np.allclose(
        PullbackSeries(coeffs).on_curve(disc, z),
        polynomial(coeffs).on_curve(disc, z),
    )


def test_scaled_and_shifted(disc):
    f = polynomial([1.0, 1.0])
    zeta = 0.25

    assert complex(f.scaled(2j).at(disc, zeta)) == pytest.approx(2.5j)
    assert complex(f.shifted(3.0).at(disc, zeta)) == pytest.approx(4.25)
    with pytest.raises(UnsupportedOperationError):
        PullbackSeries((1.0,)).derivative(disc).shifted(1.0)


def test_diff_quotient_of_square_is_linear(disc):
    eta_theta = 0.7
    eta = np.exp(1j * eta_theta)
    q = diff_quotient(disc, polynomial([0, 0, 1]), eta_theta)
    zeta = np.array([0.1, -0.5j, eta + 1e-5, eta])

    # Far points use the quotient, near points the Taylor patch
    assert np.allclose(q.at(disc, zeta), zeta + eta, atol=1e-12)


def test_diff_quotient_patch_is_continuous(quad_domain):
    f = PullbackSeries((0.0, 1.0, 0.3, 0.1))
    q = diff_quotient(quad_domain, f, 1.2)
    t = 1.2 + np.array([-2e-3, -5e-4, 5e-4, 2e-3])
    values = q.on_curve(quad_domain, np.exp(1j * t))
    derivative = complex(f.derivative(quad_domain).on_curve(quad_domain, np.exp(1.2j)))

    assert np.allclose(values, derivative, atol=1e-2)
    assert abs(values[1] - values[2]) < 5e-3


def test_diff_quotient_is_not_differentiated(disc):
    q = diff_quotient(disc, polynomial([0, 0, 1]), 0.0)

    with pytest.raises(UnsupportedOperationError):
        q.derivative(disc)
    with pytest.raises(UnsupportedOperationError):
        q.shifted(1.0)


def test_unbound_quotient_binds_to_domain(disc):
    unbound = UnboundQuotient(polynomial([0, 0, 1]), 0.3)
    z = np.exp(1j * np.array([1.0, 2.0, 3.0]))

    assert np.allclose(unbound.on_curve(disc, z), unbound.bind(disc).on_curve(disc, z))
    assert np.allclose(unbound.scaled(2.0).on_curve(disc, z), 2.0 * unbound.on_curve(disc, z))


def test_check_exterior(disc):
    pole(0.2j, 2).check_exterior(disc)

    with pytest.raises(FunctionEvaluationError):
        (pole(0.0) + constant(1.0)).check_exterior(disc)
    with pytest.raises(FunctionEvaluationError):
        pole(1.5).check_exterior(disc)


def test_check_interior(disc):
    pole(2.0).check_interior(disc)

    with pytest.raises(FunctionEvaluationError):
        pole(0.5).check_interior(disc)


def test_pole_radius(disc):
    h = pole(0.3) + pole(-0.6j, 2)

    assert h.pole_radius(disc) == pytest.approx(0.6)
    assert constant(1.0).pole_radius(disc) == 0.0
    assert isinstance(h, Rational)
    assert math.isclose(abs(complex(h.at(disc, 1.0))), abs(1 / 0.7 + 1 / (1 + 0.6j) ** 2))

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csmult.analysis.functions import FunctionEvaluationError, PullbackSeries, pole, polynomial, require_analytic
from csmult.analysis.geometry import build_domain
from csmult.analysis.spaces import (
    NormDomainError,
    einf_norm,
    ep_norm,
    level_mean,
    logplus_mean,
    logplus_trend,
    pullback_consistency,
)

DISC = build_domain((1.0,))
QUAD = build_domain((1.0, 0.2))


def test_e2_norm_of_exterior_pole():
    # (1/2π)∮ |ζ − 2|^{-2} |dζ| = 1/(4 − 1)
    report = ep_norm(DISC, pole(2.0), 2.0)

    assert report.value == pytest.approx(1 / math.sqrt(3), abs=1e-10)
    assert report.converged
    assert report.monotone


def test_h2_norm_is_parseval_on_disc():
    coeffs = (1.0, 2j, 0.5)
    report = ep_norm(DISC, polynomial(coeffs), 2.0)

    assert report.value == pytest.approx(math.sqrt(1 + 4 + 0.25), abs=1e-10)


def test_unnormalized_norm_drops_two_pi():
    normalized = ep_norm(DISC, polynomial([1.0]), 1.0).value
    raw = ep_norm(DISC, polynomial([1.0]), 1.0, normalized=False).value

    assert normalized == pytest.approx(1.0, abs=1e-12)
    assert raw == pytest.approx(2 * math.pi, abs=1e-12)


def test_einf_of_identity_on_quadratic_domain():
    # |e^{iθ} + 0.2 e^{2iθ}| peaks at θ = 0
    assert einf_norm(QUAD, polynomial([0.0, 1.0])) == pytest.approx(1.2, abs=1e-12)


def test_einf_via_ep_norm():
    report = ep_norm(DISC, polynomial([0.0, 3.0]), math.inf)

    assert report.value == pytest.approx(3.0, abs=1e-12)


def test_pullback_consistency_on_quadratic_domain():
    f = polynomial([1.0, -0.5, 0.25j])
    direct, pullback = pullback_consistency(QUAD, f, 2.0, 0.9)

    assert direct == pytest.approx(pullback, abs=1e-10)


def test_pullback_series_matches_rational_norm():
    # On the quadratic domain ζ² pulls back to (z + 0.2z²)²
    series = PullbackSeries((0.0, 0.0, 1.0, 0.4, 0.04))
    direct = level_mean(QUAD, polynomial([0.0, 0.0, 1.0]), 1.5, 0.8)
    pulled = level_mean(QUAD, series, 1.5, 0.8)

    assert direct == pytest.approx(pulled, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(
    coeffs=st.lists(st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False), min_size=1, max_size=5),
    p=st.sampled_from([1.0, 2.0, 3.5]),
)
def test_circle_means_increase_with_radius(coeffs, p):
    f = PullbackSeries(tuple(coeffs))
    means = [level_mean(DISC, f, p, r, 2048) / r for r in (0.3, 0.6, 0.9, 0.99)]

    assert all(b >= a - 1e-10 * (1 + abs(a)) for a, b in zip(means, means[1:]))


def test_logplus_mean_of_scaled_identity():
    # log⁺|2rζ| = log(2r) for r > 1/2
    assert logplus_mean(DISC, polynomial([0.0, 2.0]), 0.9) == pytest.approx(
        2 * math.pi * 0.9 * math.log(1.8), abs=1e-12
    )


def test_logplus_trend_stays_bounded_for_polynomials():
    trend = logplus_trend(QUAD, polynomial([0.0, 0.0, 3.0]))

    assert len(trend) == 4
    assert all(np.isfinite(trend))
    assert max(trend) < 20.0


def test_invalid_exponent_and_radius():
    with pytest.raises(NormDomainError):
        ep_norm(DISC, polynomial([1.0]), 0.0)
    with pytest.raises(NormDomainError):
        level_mean(DISC, polynomial([1.0]), 2.0, 1.5)
    with pytest.raises(NormDomainError):
        ep_norm(DISC, polynomial([1.0]), 2.0, r_schedule=(0.9, 0.5))
    with pytest.raises(NormDomainError):
        ep_norm(DISC, polynomial([1.0]), 2.0, r_schedule=())


def test_einf_norm_rejects_interior_pole():
    with pytest.raises(FunctionEvaluationError):
        einf_norm(DISC, pole(0.37 + 0.21j))


def test_require_analytic_accepts_exterior_poles_and_polynomials():
    require_analytic(DISC, pole(2.0))
    require_analytic(QUAD, polynomial([1.0, 0.0, 3.0]))
    require_analytic(DISC, PullbackSeries((0.0, 1.0)))


@pytest.mark.parametrize("domain", [DISC, QUAD], ids=["disc", "quad"])
@pytest.mark.parametrize("p", [1.0, 2.0, 4.0])
def test_ep_norm_triangle_inequality(domain, p):
    f = pole(2.5j) + pole(-3.0, 2)
    g = polynomial([0.5, -1.0, 0.3j])
    total = ep_norm(domain, f + g, p).value

    assert total <= ep_norm(domain, f, p).value + ep_norm(domain, g, p).value + 1e-9


@pytest.mark.parametrize("domain", [DISC, QUAD], ids=["disc", "quad"])
def test_einf_dominates_the_boundary_average(domain):
    f = pole(2.5j) + polynomial([0.5, -1.0, 0.3j])
    average = 2 * math.pi * level_mean(domain, f, 1.0, 1.0, 4096) / domain.s0

    assert einf_norm(domain, f) >= average - 1e-9
    assert einf_norm(domain, f) > average

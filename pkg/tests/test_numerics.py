import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csmult.analysis.numerics import (
    PeriodicGrid,
    QuadratureDomainError,
    adaptive_integral,
    parallel_map,
    periodic_antiderivative,
    periodic_trapezoid,
)


def _kink(theta):
    return np.abs(np.exp(1j * theta) + 1.0)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(min_value=8, max_value=64), seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_trapezoid_exact_below_the_nyquist_degree(n, seed):
    rng = np.random.default_rng(seed)
    degree = int(rng.integers(0, n))
    k = np.arange(-degree, degree + 1)
    coeffs = rng.normal(size=k.size) + 1j * rng.normal(size=k.size)
    theta = PeriodicGrid(n).nodes
    samples = np.exp(1j * np.outer(theta, k)) @ coeffs

    assert abs(periodic_trapezoid(samples) - 2 * math.pi * coeffs[degree]) <= 1e-12 * (1 + np.abs(coeffs).sum())


def test_trapezoid_kink_matches_closed_form():
    n = 1024
    value = periodic_trapezoid(_kink(PeriodicGrid(n).nodes)).real
    closed = (4 * math.pi / n) / math.tan(math.pi / (2 * n))

    assert value == pytest.approx(closed, abs=1e-12)
    # Node on the kink: second-order accuracy only
    assert abs(value - 8.0) < 1e-5
    assert abs(value - 8.0) > 1e-7


def test_adaptive_integral_reaches_tolerance_on_kink():
    result = adaptive_integral(_kink, n0=16, tol=1e-9, n_max=2**20)

    assert result.converged
    assert abs(result.value.real - 8.0) < 1e-8
    assert result.n_used <= 2**20


def test_adaptive_integral_flags_missing_convergence():
    result = adaptive_integral(_kink, n0=16, tol=1e-15, n_max=64)

    assert not result.converged
    assert result.n_used == 64
    assert result.est_error > 1e-15


def test_adaptive_integral_smooth_integrand_stops_early():
    result = adaptive_integral(lambda t: np.exp(np.cos(t)), n0=16, tol=1e-13)

    # 2π·I0(1)
    assert result.value.real == pytest.approx(7.954926521012845, abs=1e-12)
    assert result.n_used <= 64


def test_empty_samples_raise():
    with pytest.raises(QuadratureDomainError):
        periodic_trapezoid([])
    with pytest.raises(QuadratureDomainError):
        periodic_antiderivative([])


def test_grid_validation():
    with pytest.raises(QuadratureDomainError):
        PeriodicGrid(0)
    with pytest.raises(QuadratureDomainError):
        PeriodicGrid(8, offset=1.0)
    with pytest.raises(QuadratureDomainError):
        adaptive_integral(_kink, n0=4)


def test_shifted_grid_contains_phase():
    grid = PeriodicGrid.shifted(16, 1.0)

    assert np.min(np.abs(grid.nodes - 1.0)) < 1e-12
    # Doubling keeps the old nodes
    assert np.all(np.isin(grid.nodes, grid.refined().nodes))


def test_antiderivative_of_cosine():
    theta = PeriodicGrid(64).nodes
    result = periodic_antiderivative(np.cos(theta))

    assert np.allclose(result, np.sin(theta), atol=1e-12)


def test_antiderivative_integrates_mean_linearly():
    theta = PeriodicGrid(32).nodes
    result = periodic_antiderivative(np.full(32, 2.0))

    assert np.allclose(result, 2.0 * theta, atol=1e-12)


def test_parallel_map_preserves_order():
    items = list(range(40))

    assert parallel_map(lambda x: x * x, items, threads=4) == [x * x for x in items]
    assert parallel_map(lambda x: x + 1, items, threads=1) == [x + 1 for x in items]

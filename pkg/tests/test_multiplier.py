import math

import pytest

from csmult.analysis.cauchy import Atom, BoundaryMeasure, PreconditionError, build_family, make_family
from csmult.analysis.functions import FunctionEvaluationError, constant, pole, polynomial
from csmult.analysis.geometry import build_domain
from csmult.analysis.multiplier import (
    LambdaReport,
    Theorem2DomainError,
    TheoremViolationError,
    eta_integral,
    havin_lambda,
    holder_integral_max,
    multiplier_lower_bound,
    smirnov_kotchine_check,
    theorem1_check,
    theorem2_check,
    theorem2_constant,
    vinogradov_probe,
)
from csmult.analysis.numerics import PeriodicGrid

DISC = build_domain((1.0,))
QUAD = build_domain((1.0, 0.2))

SQUARE = polynomial([0.0, 0.0, 1.0])


@pytest.fixture(scope="module")
def delta_one():
    return BoundaryMeasure(DISC, (Atom(0.0, 1.0),))


def test_lambda_of_constant_is_zero():
    report = havin_lambda(DISC, constant(2.0))

    assert report.value == 0.0
    assert report.converged


def test_lambda_of_identity_is_arc_length():
    assert havin_lambda(DISC, polynomial([0.0, 1.0])).value == pytest.approx(2 * math.pi, abs=1e-10)
    assert havin_lambda(QUAD, polynomial([0.0, 1.0])).value == pytest.approx(QUAD.s0, abs=1e-10)


def test_lambda_of_square():
    # ∫ |ζ + η| |dζ| = 8 for every η on the circle
    report = havin_lambda(DISC, SQUARE)

    assert report.value == pytest.approx(8.0, abs=1e-6)
    assert report.converged
    assert report.history[0][0] == 64


def test_lambda_of_cube():
    report = havin_lambda(DISC, polynomial([0.0, 0.0, 0.0, 1.0]))

    assert report.value == pytest.approx(2 * math.pi / 3 + 4 * math.sqrt(3), abs=1e-6)


def test_eta_integral_is_rotation_invariant_for_square():
    values = [eta_integral(DISC, SQUARE, t, 4096) for t in (0.0, 1.0, 2.5)]

    assert max(values) - min(values) < 1e-9
    assert values[0] == pytest.approx(8.0, abs=1e-5)


def test_lambda_grid_must_nest():
    with pytest.raises(ValueError):
        havin_lambda(DISC, SQUARE, n_eta=32, n_zeta=48)


def test_smirnov_kotchine_chain_matches_lambda():
    etas = PeriodicGrid(4, 0.1).nodes
    report = smirnov_kotchine_check(DISC, SQUARE, etas, tol=1e-7, lambda_value=8.0)

    assert report.converged
    assert report.gap < 1e-6
    assert all(abs(v - 8.0) < 1e-4 for v in report.e1_values)


def test_multiplier_bound_for_identity_and_delta(delta_one):
    # f = ζ, μ = δ₁: h = 1/ζ pairs to 0, h = 1/ζ² pairs to 1
    family = make_family(DISC, [pole(0.0, 1), pole(0.0, 2)])
    bound = multiplier_lower_bound(DISC, polynomial([0.0, 1.0]), [("delta", delta_one)], family)

    assert bound.value == pytest.approx(1.0, abs=1e-10)
    assert bound.member_label == "h1"
    assert bound.measure == "delta"


def test_multiplier_bound_rejects_zero_measure():
    family = make_family(DISC, [pole(0.0, 1)])

    with pytest.raises(PreconditionError):
        multiplier_lower_bound(DISC, constant(1.0), [("zero", BoundaryMeasure(DISC))], family)


def test_theorem1_is_tight_for_constants(delta_one):
    family = build_family(DISC)
    verdict = theorem1_check(DISC, constant(2.0), [("delta", delta_one)], family)

    assert verdict.mult_lower == pytest.approx(2.0, abs=1e-9)
    assert verdict.theorem1_upper == pytest.approx(2.0, abs=1e-9)
    assert verdict.slack > -1e-9
    assert verdict.lambda_value == 0.0


def test_theorem1_violation_raises(delta_one):
    family = make_family(DISC, [pole(0.0, 1)])
    bogus = LambdaReport(value=-1.0, argmax_theta=0.0, n_eta=1, n_zeta=1, est_error=0.0)

    with pytest.raises(TheoremViolationError):
        theorem1_check(DISC, constant(2.0), [("delta", delta_one)], family, lambda_report=bogus)


def test_theorem2_constant_on_the_circle():
    assert theorem2_constant(2.0, 2 * math.pi, 2 / math.pi) == pytest.approx(2 * math.pi * math.sqrt(math.pi), rel=1e-14)


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_holder_search_matches_closed_form(p):
    s0 = 2 * math.pi
    assert holder_integral_max(p, s0) == pytest.approx(theorem2_constant(p, s0, 1.0), rel=1e-7)


def test_theorem2_constant_tends_to_s0_over_c0():
    assert theorem2_constant(1000.0, 3.0, 0.5) / (3.0 / 0.5) == pytest.approx(1.0, abs=0.01)


def test_theorem2_domain_errors():
    with pytest.raises(Theorem2DomainError):
        theorem2_constant(1.0, 2 * math.pi, 0.5)
    with pytest.raises(Theorem2DomainError):
        theorem2_constant(2.0, 2 * math.pi, 0.0)
    with pytest.raises(Theorem2DomainError):
        holder_integral_max(0.5, 1.0)


def test_theorem2_holds_for_square():
    report = theorem2_check(DISC, SQUARE, 2.0)

    assert report.satisfied
    assert report.lambda_value == pytest.approx(8.0, abs=1e-6)
    # f′ = 2ζ: (∫|2ζ|²|dζ|)^{1/2} = √(8π)
    assert report.fprime_ep == pytest.approx(math.sqrt(8 * math.pi), abs=1e-10)
    assert report.bound == pytest.approx(2 * math.pi * math.sqrt(math.pi) * math.sqrt(8 * math.pi), rel=1e-8)


def test_vinogradov_probe_on_disc():
    report = vinogradov_probe(DISC, SQUARE)

    assert report.lambda_value == pytest.approx(8.0, abs=1e-6)
    assert report.fprime_h1 == pytest.approx(2.0, abs=1e-10)
    assert not report.diverged


def test_vinogradov_probe_needs_the_disc():
    with pytest.raises(PreconditionError):
        vinogradov_probe(QUAD, SQUARE)


def test_interior_pole_is_rejected_before_integration(delta_one):
    f = pole(0.37 + 0.21j)
    family = make_family(DISC, [pole(0.0, 1), pole(0.0, 2)])

    with pytest.raises(FunctionEvaluationError):
        havin_lambda(DISC, f)
    with pytest.raises(FunctionEvaluationError):
        theorem2_check(DISC, f, 2.0)
    with pytest.raises(FunctionEvaluationError):
        multiplier_lower_bound(DISC, f, [("delta", delta_one)], family)
    with pytest.raises(FunctionEvaluationError):
        smirnov_kotchine_check(DISC, f, PeriodicGrid(4).nodes)
    with pytest.raises(FunctionEvaluationError):
        theorem1_check(DISC, f, [("delta", delta_one)], family)


def test_pole_on_the_boundary_is_rejected():
    with pytest.raises(FunctionEvaluationError):
        havin_lambda(DISC, pole(1.0))


def test_smirnov_kotchine_uses_lambda_grid_off_the_disc():
    lam = havin_lambda(QUAD, SQUARE)
    report = smirnov_kotchine_check(QUAD, SQUARE, tol=1e-7, lambda_report=lam)

    assert len(report.eta_thetas) == lam.n_eta + 1
    assert report.eta_thetas[-1] == pytest.approx(lam.argmax_theta)
    assert report.max_value == pytest.approx(lam.value, abs=1e-6)
    assert report.gap < 1e-6


def test_smirnov_kotchine_values_stay_below_lambda():
    lam = havin_lambda(QUAD, SQUARE)
    coarse = smirnov_kotchine_check(QUAD, SQUARE, PeriodicGrid(8, 0.1).nodes, tol=1e-7, lambda_report=lam)

    assert coarse.max_value <= lam.value + 1e-6


def test_vinogradov_cube_baseline():
    report = vinogradov_probe(DISC, polynomial([0.0, 0.0, 0.0, 1.0]))

    assert report.lambda_value == pytest.approx(2 * math.pi / 3 + 4 * math.sqrt(3), abs=1e-6)
    assert report.fprime_h1 == pytest.approx(3.0, abs=1e-10)

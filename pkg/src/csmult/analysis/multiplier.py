"""The Havin functional Λ(f), multiplier lower bounds and the two sufficiency checks.

Λ(f) = ess sup over η ∈ ℓ of ∫_ℓ |f(ζ) − f(η)| / |ζ − η| |dζ|. Together with
‖f‖_{E^∞} it bounds the multiplier norm of f on K(G) from above; pairings of
f·K_μ against exterior test functions bound it from below. On smooth
boundaries Λ(f) is in turn bounded by an explicit constant times ‖f′‖_{E^p}.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from csmult.analysis.cauchy import (
    BoundaryMeasure,
    PreconditionError,
    TestFunctionFamily,
    level_samples,
    variation_norm,
)
from csmult.analysis.functions import DEFAULT_EPS_DIAG, AnalyticFunction, diff_quotient, require_analytic
from csmult.analysis.geometry import ConformalDomain
from csmult.analysis.numerics import (
    TWO_PI,
    PeriodicGrid,
    adaptive_integral,
    parallel_map,
    periodic_trapezoid,
)
from csmult.analysis.spaces import einf_norm, ep_norm, level_mean

logger = logging.getLogger(__name__)

# Diagonal window of the Λ integrand, in ζ-steps.
DIAGONAL_STEPS = 3

_NORM_SCHEDULE = (0.5, 0.9, 0.99, 1.0)


class TheoremViolationError(ValueError):
    """Raised when a certified lower bound exceeds the sufficient upper bound."""


class Theorem2DomainError(ValueError):
    """Raised for exponents or curve constants outside the smooth-curve bound."""


# ── Λ(f) ──────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class LambdaReport:
    value: float
    argmax_theta: float
    n_eta: int
    n_zeta: int
    est_error: float
    converged: bool = True
    per_eta: Tuple[float, ...] = ()
    history: Tuple[Tuple[int, float], ...] = ()
    offset: float = 0.0

    def eta_nodes(self) -> np.ndarray:
        """The η grid the maximum was taken over, followed by the refined argmax."""
        return np.append(PeriodicGrid(self.n_eta, self.offset).nodes, self.argmax_theta)


def eta_integral(
    domain: ConformalDomain,
    f: AnalyticFunction,
    theta_eta: float,
    n_zeta: int,
    max_speed: Optional[float] = None,
) -> float:
    """∫_ℓ |F_η| |dζ| on the ζ-grid θ_η + (2j+1)π/n_zeta.

    Nodes within ``DIAGONAL_STEPS`` ζ-steps of η use the Taylor patch of F_η,
    whose value at η is f′(η).
    """
    speed = domain.max_speed if max_speed is None else max_speed
    step = TWO_PI / n_zeta
    window = min(DIAGONAL_STEPS * step * speed, DEFAULT_EPS_DIAG)
    quotient = diff_quotient(domain, f, theta_eta, eps_diag=window)
    theta = theta_eta + (2 * np.arange(n_zeta) + 1) * (math.pi / n_zeta)
    z = np.exp(1j * theta)
    samples = np.abs(quotient.on_curve(domain, z)) * np.abs(domain.dphi(z))
    return periodic_trapezoid(samples).real


def havin_lambda(
    domain: ConformalDomain,
    f: AnalyticFunction,
    n_eta: int = 32,
    n_zeta: int = 64,
    tol: float = 1e-8,
    n_max: int = 65536,
    offset: float = 0.0,
    adaptive: bool = True,
    refine: bool = True,
    threads: int = 1,
) -> LambdaReport:
    """Grid estimate of Λ(f), doubling n_zeta until the max changes by less than tol.

    With ``adaptive=False`` a single n_zeta level is used and est_error is nan.
    ``refine`` polishes the grid argmax with a bounded scalar search over η.
    """
    if n_zeta % n_eta:
        raise ValueError(f"n_zeta={n_zeta} must be a multiple of n_eta={n_eta}")
    require_analytic(domain, f)
    speed = domain.max_speed
    etas = PeriodicGrid(n_eta, offset).nodes

    def sweep(n: int) -> np.ndarray:
        return np.asarray(parallel_map(lambda t: eta_integral(domain, f, t, n, speed), etas, threads))

    n = n_zeta
    per_eta = sweep(n)
    history = [(n, float(per_eta.max()))]
    est_error = math.nan
    converged = True
    if adaptive:
        converged = False
        while 2 * n <= n_max:
            n *= 2
            per_eta = sweep(n)
            history.append((n, float(per_eta.max())))
            est_error = abs(history[-1][1] - history[-2][1])
            if est_error < tol:
                converged = True
                break
        if not converged:
            logger.warning("Λ did not converge by n_zeta=%d (diff=%.3e)", n, est_error)

    j = int(np.argmax(per_eta))
    value, argmax = float(per_eta[j]), float(etas[j])
    if refine and value > 0.0:
        width = TWO_PI / n_eta
        res = minimize_scalar(
            lambda t: -eta_integral(domain, f, t, n, speed),
            bounds=(etas[j] - width, etas[j] + width),
            method="bounded",
            options={"xatol": 1e-10},
        )
        if -res.fun > value:
            value, argmax = float(-res.fun), float(res.x)

    logger.debug("Λ=%.12g at θ=%.6f (n_zeta=%d)", value, argmax, n)
    return LambdaReport(
        value=value,
        argmax_theta=argmax % TWO_PI,
        n_eta=n_eta,
        n_zeta=n,
        est_error=est_error,
        converged=converged,
        per_eta=tuple(float(v) for v in per_eta),
        history=tuple(history),
        offset=offset,
    )


# ── Smirnov–Kotchine chain ────────────────────────────────────────────────


@dataclass(frozen=True)
class SmirnovKotchineReport:
    """Per-η values of ∫_ℓ|F_η||dζ| computed as ‖Ω‖_{H¹}·2π with Ω = F_η(φ)φ′."""

    eta_thetas: Tuple[float, ...]
    values: Tuple[float, ...]
    e1_values: Tuple[float, ...]
    max_value: float
    lambda_value: float
    converged: bool = True

    @property
    def gap(self) -> float:
        """max(|max − Λ|, largest excess of a single value over Λ)."""
        excess = max(self.values, default=0.0) - self.lambda_value
        return max(abs(self.max_value - self.lambda_value), excess)


def smirnov_kotchine_check(
    domain: ConformalDomain,
    f: AnalyticFunction,
    eta_thetas: Optional[Sequence[float]] = None,
    tol: float = 1e-8,
    n_max: int = 65536,
    n_e1: int = 4096,
    lambda_value: Optional[float] = None,
    threads: int = 1,
    lambda_report: Optional[LambdaReport] = None,
) -> SmirnovKotchineReport:
    """Recompute ∫_ℓ|F_η||dζ| independently at each η and compare with Λ.

    Without ``eta_thetas`` the η set is the grid Λ was maximized over plus its
    refined argmax.
    """
    require_analytic(domain, f)
    if lambda_report is None and (lambda_value is None or eta_thetas is None):
        lambda_report = havin_lambda(domain, f, tol=tol, n_max=n_max, threads=threads)
    if lambda_value is None:
        lambda_value = lambda_report.value
    if eta_thetas is None:
        eta_thetas = lambda_report.eta_nodes()

    def one(theta_eta: float):
        quotient = diff_quotient(domain, f, theta_eta)

        def omega(theta: np.ndarray) -> np.ndarray:
            z = np.exp(1j * theta)
            return np.abs(quotient.on_curve(domain, z) * domain.dphi(z))

        h1 = adaptive_integral(omega, n0=64, tol=tol, n_max=n_max, offset=theta_eta)
        e1 = TWO_PI * level_mean(domain, quotient, 1.0, 1.0, n_e1)
        return h1.value.real, e1, h1.converged

    results = parallel_map(one, list(eta_thetas), threads)
    values = tuple(float(r[0]) for r in results)
    return SmirnovKotchineReport(
        eta_thetas=tuple(float(t) for t in eta_thetas),
        values=values,
        e1_values=tuple(float(r[1]) for r in results),
        max_value=max(values, default=0.0),
        lambda_value=float(lambda_value),
        converged=all(r[2] for r in results),
    )


# ── Multiplier bounds ─────────────────────────────────────────────────────


@dataclass(frozen=True)
class MultiplierBound:
    value: float
    measure: str
    member: int
    member_label: str


def multiplier_lower_bound(
    domain: ConformalDomain,
    f: AnalyticFunction,
    measures: Sequence[Tuple[str, BoundaryMeasure]],
    family: TestFunctionFamily,
    r: float = 0.95,
    n: int = 2048,
    threads: int = 1,
) -> MultiplierBound:
    """max over (μ, h) of |(1/2πi)∮_{ℓ_r} f·K_μ·h dζ| / ‖μ‖."""
    require_analytic(domain, f)
    if family.max_pole_radius(domain) >= r:
        raise PreconditionError(f"test function poles reach outside the level curve r={r}")
    best = MultiplierBound(0.0, "", 0, "")
    for name, mu in measures:
        total = variation_norm(mu)
        if total <= 0.0:
            raise PreconditionError(f"measure {name!r} has zero variation")
        samples = level_samples(domain, mu, r, n, multiplier=f)
        values = parallel_map(lambda h: abs(samples.pair(domain, h)), family.members, threads)
        k = int(np.argmax(values))
        if values[k] / total > best.value or not best.measure:
            best = MultiplierBound(float(values[k] / total), name, k, family.labels[k])
    return best


@dataclass(frozen=True)
class MultiplierVerdict:
    mult_lower: float
    theorem1_upper: float
    slack: float
    einf: float
    lambda_value: float
    witness_measure: str
    witness_member: str
    lambda_converged: bool = True


def theorem1_check(
    domain: ConformalDomain,
    f: AnalyticFunction,
    measures: Sequence[Tuple[str, BoundaryMeasure]],
    family: TestFunctionFamily,
    r: float = 0.95,
    n: int = 2048,
    n_eta: int = 32,
    n_zeta: int = 64,
    lambda_tol: float = 1e-8,
    n_max: int = 65536,
    tol: float = 1e-6,
    threads: int = 1,
    lambda_report: Optional[LambdaReport] = None,
) -> MultiplierVerdict:
    """Check mult_lower ≤ ‖f‖_{E^∞} + Λ(f)."""
    bound = multiplier_lower_bound(domain, f, measures, family, r, n, threads)
    lam = lambda_report or havin_lambda(domain, f, n_eta, n_zeta, lambda_tol, n_max, threads=threads)
    einf = einf_norm(domain, f)
    upper = einf + lam.value
    slack = upper - bound.value
    if slack < -tol:
        raise TheoremViolationError(
            f"multiplier lower bound {bound.value:.12g} exceeds E^inf + Lambda = {upper:.12g}"
        )
    return MultiplierVerdict(
        mult_lower=bound.value,
        theorem1_upper=upper,
        slack=slack,
        einf=einf,
        lambda_value=lam.value,
        witness_measure=bound.measure,
        witness_member=bound.member_label,
        lambda_converged=lam.converged,
    )


# ── Smooth-curve bound ────────────────────────────────────────────────────


def theorem2_constant(p: float, s0: float, c0: float) -> float:
    """(1/c0)·(p/(p−1))·2^{1/p}·s0^{1−1/p}."""
    if not p > 1.0:
        raise Theorem2DomainError(f"the smooth-curve bound needs p > 1, got {p}")
    if not s0 > 0.0:
        raise Theorem2DomainError(f"arc length must be positive, got {s0}")
    if not 0.0 < c0 <= 1.0:
        raise Theorem2DomainError(f"chord-arc constant must lie in (0, 1], got {c0}")
    return (1.0 / c0) * (p / (p - 1.0)) * 2.0 ** (1.0 / p) * s0 ** (1.0 - 1.0 / p)


def holder_integral_max(p: float, s0: float) -> float:
    """max over σ of ∫₀^{s0} |s − σ|^{−1/p} ds by quadrature and bounded search."""
    if not p > 1.0:
        raise Theorem2DomainError(f"the Hölder integral needs p > 1, got {p}")
    alpha = -1.0 / p

    def integral(sigma: float) -> float:
        left, _ = quad(lambda s: 1.0, 0.0, sigma, weight="alg", wvar=(0.0, alpha)) if sigma > 0 else (0.0, 0.0)
        right, _ = quad(lambda s: 1.0, sigma, s0, weight="alg", wvar=(alpha, 0.0)) if sigma < s0 else (0.0, 0.0)
        return left + right

    res = minimize_scalar(lambda sigma: -integral(sigma), bounds=(0.0, s0), method="bounded",
                          options={"xatol": 1e-10 * s0})
    return float(-res.fun)


@dataclass(frozen=True)
class Theorem2Report:
    p: float
    fprime_ep: float
    fprime_ep_normalized: float
    constant: float
    bound: float
    lambda_value: float
    satisfied: bool
    lambda_converged: bool = True


def theorem2_check(
    domain: ConformalDomain,
    f: AnalyticFunction,
    p: float,
    n_eta: int = 32,
    n_zeta: int = 64,
    lambda_tol: float = 1e-8,
    n_max: int = 65536,
    tol: float = 1e-9,
    threads: int = 1,
    lambda_report: Optional[LambdaReport] = None,
) -> Theorem2Report:
    """Compare Λ(f) with C(p, s0, c0)·(∫_ℓ|f′|^p|dζ|)^{1/p}."""
    require_analytic(domain, f)
    constant = theorem2_constant(p, domain.s0, domain.c0)
    fprime = f.derivative(domain)
    norm = ep_norm(domain, fprime, p, _NORM_SCHEDULE, normalized=False, n_max=n_max)
    lam = lambda_report or havin_lambda(domain, f, n_eta, n_zeta, lambda_tol, n_max, threads=threads)
    bound = constant * norm.value
    report = Theorem2Report(
        p=p,
        fprime_ep=norm.value,
        fprime_ep_normalized=norm.value * TWO_PI ** (-1.0 / p),
        constant=constant,
        bound=bound,
        lambda_value=lam.value,
        satisfied=lam.value <= bound + tol,
        lambda_converged=lam.converged,
    )
    logger.info(
        "smooth-curve bound p=%g: Λ=%.10g ≤ %.10g·%.10g = %.10g -> %s",
        p, lam.value, constant, norm.value, bound, report.satisfied,
    )
    return report


# ── p = 1 probe ───────────────────────────────────────────────────────────


@dataclass(frozen=True)
class VinogradovReport:
    """Λ(f) and ‖f′‖_{H¹} on the disc; no inequality between them is asserted."""

    lambda_value: float
    diverged: bool
    fprime_h1: float
    history: Tuple[Tuple[int, float], ...]


def vinogradov_probe(
    domain: ConformalDomain,
    f: AnalyticFunction,
    n_eta: int = 32,
    n_zeta: int = 64,
    tol: float = 1e-8,
    n_max: int = 65536,
    threads: int = 1,
) -> VinogradovReport:
    if not domain.is_disc:
        raise PreconditionError("the p = 1 probe runs on the unit disc only")
    lam = havin_lambda(domain, f, n_eta, n_zeta, tol, n_max, threads=threads)
    h1 = ep_norm(domain, f.derivative(domain), 1.0, _NORM_SCHEDULE, n_max=n_max)
    return VinogradovReport(lam.value, not lam.converged, h1.value, lam.history)


__all__ = [
    "DIAGONAL_STEPS",
    "LambdaReport",
    "MultiplierBound",
    "MultiplierVerdict",
    "SmirnovKotchineReport",
    "Theorem2DomainError",
    "Theorem2Report",
    "TheoremViolationError",
    "VinogradovReport",
    "eta_integral",
    "havin_lambda",
    "holder_integral_max",
    "multiplier_lower_bound",
    "smirnov_kotchine_check",
    "theorem1_check",
    "theorem2_check",
    "theorem2_constant",
    "vinogradov_probe",
]

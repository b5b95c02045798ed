"""Smirnov E^p norms over level curves, Hardy-side means and log⁺ diagnostics."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from csmult.analysis.functions import AnalyticFunction, require_analytic
from csmult.analysis.geometry import ConformalDomain
from csmult.analysis.numerics import (
    TWO_PI,
    PeriodicGrid,
    adaptive_integral,
    periodic_trapezoid,
)

logger = logging.getLogger(__name__)

DEFAULT_R_SCHEDULE: Tuple[float, ...] = tuple(1.0 - 2.0 ** -k for k in range(1, 9)) + (1.0,)


class NormDomainError(ValueError):
    """Raised for exponents or radii outside the admissible range."""


@dataclass(frozen=True)
class NormReport:
    value: float
    p: float
    r_used: Tuple[float, ...]
    est_error: float
    normalized: bool
    monotone: bool = True
    converged: bool = True
    means: Tuple[float, ...] = ()


def _check_p(p: float) -> None:
    if not p > 0:
        raise NormDomainError(f"exponent p must be positive, got {p}")


def _check_r(r: float) -> None:
    if not 0.0 < r <= 1.0:
        raise NormDomainError(f"level radius {r} outside the admissible range")


def _level_integrand(domain: ConformalDomain, f: AnalyticFunction, p: float, r: float):
    curve = domain.level_curve(r)

    def integrand(theta: np.ndarray) -> np.ndarray:
        s = curve.sample(theta)
        return np.abs(f.on_curve(domain, s.z)) ** p * s.speed

    return integrand


def level_mean(
    domain: ConformalDomain,
    f: AnalyticFunction,
    p: float,
    r: float,
    n: int = 1024,
) -> float:
    """(1/2π)∫_{ℓ_r}|f|^p|dζ| by the trapezoid rule on n nodes."""
    _check_p(p)
    _check_r(r)
    samples = _level_integrand(domain, f, p, r)(PeriodicGrid(n).nodes)
    return periodic_trapezoid(samples).real / TWO_PI


def ep_norm(
    domain: ConformalDomain,
    f: AnalyticFunction,
    p: float,
    r_schedule: Sequence[float] = DEFAULT_R_SCHEDULE,
    tol: float = 1e-10,
    normalized: bool = True,
    n_max: int = 65536,
) -> NormReport:
    """sup over the schedule of the level means to the power 1/p.

    With ``normalized=False`` the 1/2π factor is dropped, giving
    (∫_{ℓ_r}|f|^p|dζ|)^{1/p}. ``p = math.inf`` returns the sup of |f| over
    the schedule curves.
    """
    _check_p(p)
    radii = tuple(float(r) for r in r_schedule)
    if not radii:
        raise NormDomainError("r_schedule must not be empty")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise NormDomainError(f"r_schedule must be increasing, got {radii}")
    for r in radii:
        _check_r(r)

    means = []
    converged = True
    for r in radii:
        if math.isinf(p):
            s = domain.level_curve(r).sample(PeriodicGrid(n_max // 16))
            means.append(float(np.max(np.abs(f.on_curve(domain, s.z)))))
            continue
        result = adaptive_integral(_level_integrand(domain, f, p, r), n0=64, tol=tol, n_max=n_max)
        converged = converged and result.converged
        mean = result.value.real
        means.append(mean / TWO_PI if normalized else mean)

    scale = max(1.0, max(means))
    monotone = all(b >= a - 1e3 * tol * scale for a, b in zip(means, means[1:]))
    if not monotone:
        logger.warning("level means are not monotone in r for p=%s: %s", p, means)

    root = (lambda m: m) if math.isinf(p) else (lambda m: m ** (1.0 / p))
    values = [root(max(m, 0.0)) for m in means]
    est_error = abs(values[-1] - values[-2]) if len(values) > 1 else math.nan
    return NormReport(
        value=max(values),
        p=p,
        r_used=radii,
        est_error=est_error,
        normalized=normalized,
        monotone=monotone,
        converged=converged,
        means=tuple(means),
    )


def einf_norm(domain: ConformalDomain, f: AnalyticFunction, n: int = 4096) -> float:
    """max |f| over the boundary grid (maximum principle)."""
    require_analytic(domain, f)
    values = f.boundary_values(domain, PeriodicGrid(n))
    return float(np.max(np.abs(values)))


def pullback_consistency(
    domain: ConformalDomain,
    f: AnalyticFunction,
    p: float,
    r: float,
    n: int = 1024,
) -> Tuple[float, float]:
    """Level mean computed in the ζ-plane and on the Hardy side.

    ``direct`` evaluates f at ζ = φ(re^{iθ}) on n nodes and weights by
    |dζ/dθ|. ``pullback`` evaluates |F(z)|^p·|φ′(z)|·r for F = f∘φ on an
    independent 2n grid.
    """
    _check_p(p)
    _check_r(r)
    curve = domain.level_curve(r)
    coarse = curve.sample(PeriodicGrid(n))
    direct = periodic_trapezoid(np.abs(f.at(domain, coarse.zeta)) ** p * coarse.speed).real / TWO_PI

    z = curve.sample(PeriodicGrid(2 * n)).z
    hardy = np.abs(f.on_curve(domain, z)) ** p * np.abs(domain.dphi(z)) * r
    pullback = periodic_trapezoid(hardy).real / TWO_PI
    return float(direct), float(pullback)


def logplus_mean(domain: ConformalDomain, f: AnalyticFunction, r: float, n: int = 1024) -> float:
    """∫_{ℓ_r} log⁺|f| |dζ|, unnormalized."""
    _check_r(r)
    s = domain.level_curve(r).sample(PeriodicGrid(n))
    logs = np.log(np.maximum(np.abs(f.on_curve(domain, s.z)), 1.0))
    return float(periodic_trapezoid(logs * s.speed).real)


def logplus_trend(
    domain: ConformalDomain,
    f: AnalyticFunction,
    radii: Sequence[float] = (0.5, 0.75, 0.9, 0.99),
    n: int = 1024,
) -> Tuple[float, ...]:
    """log⁺ means along a radius schedule; bounded growth is the N-class signal."""
    return tuple(logplus_mean(domain, f, r, n) for r in radii)


__all__ = [
    "DEFAULT_R_SCHEDULE",
    "NormDomainError",
    "NormReport",
    "einf_norm",
    "ep_norm",
    "level_mean",
    "logplus_mean",
    "logplus_trend",
    "pullback_consistency",
]

"""Symbolic analytic functions evaluated on a conformal domain.

Three kinds are supported:

    PullbackSeries   f(φ(z)) = N(z) / φ′(z)^k with N a polynomial in z
    Rational         f(ζ) = poly(ζ) + Σ c / (ζ − a)^m
    DiffQuotient     F_η(ζ) = (f(ζ) − f(η)) / (ζ − η), patched near ζ = η

``on_curve(domain, z)`` evaluates at ζ = φ(z) given the disc parameter z,
which is how every boundary and level-curve integral samples a function.
``at(domain, ζ)`` evaluates at arbitrary points of the closure of G.

Usage:
    square = polynomial([0, 0, 1])
    f_prime = square.derivative(domain)
    values = square.on_curve(domain, np.exp(1j * theta))
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from csmult.analysis.geometry import ConformalDomain
from csmult.analysis.numerics import PeriodicGrid

logger = logging.getLogger(__name__)

# Default |ζ − η| below which DiffQuotient switches to its Taylor patch.
DEFAULT_EPS_DIAG = 1e-3

_TAYLOR_TERMS = 4


class FunctionEvaluationError(ValueError):
    """Raised when a function is evaluated at a pole or violates its role."""


class UnsupportedOperationError(ValueError):
    """Raised for operations a function kind cannot perform symbolically."""


def _as_coeffs(values: Sequence[complex]) -> Tuple[complex, ...]:
    coeffs = tuple(complex(v) for v in values)
    return coeffs if coeffs else (0j,)


def _pad_add(a: Sequence[complex], b: Sequence[complex]) -> Tuple[complex, ...]:
    out = np.zeros(max(len(a), len(b)), dtype=complex)
    out[: len(a)] += np.asarray(a, dtype=complex)
    out[: len(b)] += np.asarray(b, dtype=complex)
    return tuple(complex(v) for v in out)


class AnalyticFunction(ABC):
    """Common interface of the symbolic function kinds."""

    @abstractmethod
    def on_curve(self, domain: ConformalDomain, z) -> np.ndarray:
        """Values f(φ(z)) for disc parameters z."""

    @abstractmethod
    def at(self, domain: ConformalDomain, zeta) -> np.ndarray:
        """Values f(ζ) for points ζ of the closure of G."""

    @abstractmethod
    def derivative(self, domain: ConformalDomain) -> "AnalyticFunction":
        """Symbolic f′ with respect to ζ."""

    @abstractmethod
    def scaled(self, alpha: complex) -> "AnalyticFunction":
        ...

    @abstractmethod
    def shifted(self, c: complex) -> "AnalyticFunction":
        """f + c."""

    def boundary_values(self, domain: ConformalDomain, grid: PeriodicGrid) -> np.ndarray:
        return self.on_curve(domain, np.exp(1j * grid.nodes))


# ── Pullback series ──────────────────────────────────────────────────────


@dataclass(frozen=True)
class PullbackSeries(AnalyticFunction):
    """f(φ(z)) = Σ a_k z^k / φ′(z)^phi_power.

    ``phi_power`` is 0 for user-supplied series; derivatives raise it by one
    (first derivative) or two (later ones), which keeps f′, f″, … symbolic.
    """

    coeffs: Tuple[complex, ...]
    phi_power: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs))
        if self.phi_power < 0:
            raise ValueError(f"phi_power must be nonnegative, got {self.phi_power}")

    def on_curve(self, domain, z):
        z = np.asarray(z, dtype=complex)
        values = P.polyval(z, np.asarray(self.coeffs))
        if self.phi_power:
            values = values / domain.dphi(z) ** self.phi_power
        return values

    def at(self, domain, zeta):
        return self.on_curve(domain, domain.inverse(zeta))

    def derivative(self, domain):
        numer = np.asarray(self.coeffs)
        dnumer = P.polyder(numer) if numer.size > 1 else np.zeros(1, complex)
        if self.phi_power == 0:
            return PullbackSeries(tuple(dnumer), 1)
        k = self.phi_power
        dphi = domain.dphi_poly
        d2phi = domain.d2phi_poly
        combined = P.polysub(P.polymul(dnumer, dphi), k * P.polymul(numer, d2phi))
        return PullbackSeries(tuple(combined), k + 2)

    def scaled(self, alpha):
        return PullbackSeries(tuple(complex(alpha) * c for c in self.coeffs), self.phi_power)

    def shifted(self, c):
        if self.phi_power:
            raise UnsupportedOperationError("shifted() needs phi_power == 0")
        coeffs = list(self.coeffs)
        coeffs[0] += complex(c)
        return PullbackSeries(tuple(coeffs), 0)

    def __add__(self, other: "PullbackSeries") -> "PullbackSeries":
        if not isinstance(other, PullbackSeries) or other.phi_power != self.phi_power:
            return NotImplemented
        return PullbackSeries(_pad_add(self.coeffs, other.coeffs), self.phi_power)


# ── Rational functions ───────────────────────────────────────────────────


@dataclass(frozen=True)
class PoleTerm:
    """c / (ζ − location)^order."""

    location: complex
    order: int
    coeff: complex

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError(f"pole order must be >= 1, got {self.order}")
        object.__setattr__(self, "location", complex(self.location))
        object.__setattr__(self, "coeff", complex(self.coeff))


@dataclass(frozen=True)
class Rational(AnalyticFunction):
    """poly(ζ) + Σ pole terms, evaluated directly in the ζ-plane."""

    poly: Tuple[complex, ...] = (0j,)
    poles: Tuple[PoleTerm, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "poly", _as_coeffs(self.poly))
        object.__setattr__(self, "poles", tuple(self.poles))

    @property
    def has_polynomial_part(self) -> bool:
        return any(c != 0 for c in self.poly)

    def at(self, domain, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        values = P.polyval(zeta, np.asarray(self.poly))
        for term in self.poles:
            gap = zeta - term.location
            if np.any(gap == 0):
                raise FunctionEvaluationError(f"evaluation at the pole {term.location}")
            values = values + term.coeff / gap ** term.order
        return values

    def on_curve(self, domain, z):
        return self.at(domain, domain.phi(np.asarray(z, dtype=complex)))

    def derivative(self, domain=None):
        poly = np.asarray(self.poly)
        dpoly = P.polyder(poly) if poly.size > 1 else np.zeros(1, complex)
        poles = tuple(
            PoleTerm(t.location, t.order + 1, -t.order * t.coeff) for t in self.poles
        )
        return Rational(tuple(dpoly), poles)

    def scaled(self, alpha):
        alpha = complex(alpha)
        return Rational(
            tuple(alpha * c for c in self.poly),
            tuple(PoleTerm(t.location, t.order, alpha * t.coeff) for t in self.poles),
        )

    def shifted(self, c):
        poly = list(self.poly)
        poly[0] += complex(c)
        return Rational(tuple(poly), self.poles)

    def __add__(self, other: "Rational") -> "Rational":
        if not isinstance(other, Rational):
            return NotImplemented
        return Rational(_pad_add(self.poly, other.poly), self.poles + other.poles)

    def pole_radius(self, domain: ConformalDomain) -> float:
        """Largest preimage radius of the poles (0 when there are none)."""
        if not self.poles:
            return 0.0
        return max(domain.preimage_radius(t.location) for t in self.poles)

    def check_interior(self, domain: ConformalDomain, margin: float = 1e-6) -> None:
        """Require every pole outside the closure of G, clear of ℓ by ``margin``."""
        if not self.poles:
            return
        boundary = domain.boundary_nodes(domain.n_check)
        for term in self.poles:
            gap = float(np.min(np.abs(boundary - term.location)))
            if domain.preimage_radius(term.location) <= 1.0 or gap <= margin:
                raise FunctionEvaluationError(
                    f"pole {term.location} is not outside the closed domain (gap {gap:.3g})"
                )

    def check_exterior(self, domain: ConformalDomain) -> None:
        """Require h(∞) = 0 and every pole strictly inside ℓ."""
        if self.has_polynomial_part:
            raise FunctionEvaluationError("exterior test functions must have no polynomial part")
        for term in self.poles:
            if domain.preimage_radius(term.location) >= 1.0:
                raise FunctionEvaluationError(f"pole {term.location} is not inside the boundary")


# ── Difference quotients ─────────────────────────────────────────────────


@dataclass(frozen=True)
class DiffQuotient(AnalyticFunction):
    """F_η(ζ) = (f(ζ) − f(η)) / (ζ − η) for η = φ(e^{iθ_η}) on ℓ.

    Within ``eps_diag`` of η the value comes from the Taylor sum
    Σ_{k=1..4} f^(k)(η)/k! (ζ − η)^(k−1).
    """

    base: AnalyticFunction
    eta_theta: float
    eta: complex
    f_eta: complex
    taylor: Tuple[complex, ...]
    eps_diag: float = DEFAULT_EPS_DIAG

    def _combine(self, zeta: np.ndarray, f_zeta: np.ndarray) -> np.ndarray:
        gap = zeta - self.eta
        near = np.abs(gap) < self.eps_diag
        safe_gap = np.where(near, 1.0, gap)
        with np.errstate(invalid="ignore", divide="ignore"):
            exact = (f_zeta - self.f_eta) / safe_gap
        patch = P.polyval(gap, np.asarray(self.taylor))
        return np.where(near, patch, exact)

    def on_curve(self, domain, z):
        z = np.asarray(z, dtype=complex)
        return self._combine(domain.phi(z), self.base.on_curve(domain, z))

    def at(self, domain, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        return self._combine(zeta, self.base.at(domain, zeta))

    def derivative(self, domain):
        raise UnsupportedOperationError("difference quotients are not differentiated symbolically")

    def scaled(self, alpha):
        alpha = complex(alpha)
        return DiffQuotient(
            self.base.scaled(alpha), self.eta_theta, self.eta, alpha * self.f_eta,
            tuple(alpha * t for t in self.taylor), self.eps_diag,
        )

    def shifted(self, c):
        raise UnsupportedOperationError("difference quotients do not support shifted()")


def diff_quotient(
    domain: ConformalDomain,
    f: AnalyticFunction,
    eta_theta: float,
    eps_diag: float = DEFAULT_EPS_DIAG,
) -> DiffQuotient:
    """Build F_η for the boundary point η = φ(e^{iθ_η})."""
    z_eta = np.exp(1j * eta_theta)
    eta = complex(domain.phi(z_eta))
    f_eta = complex(f.on_curve(domain, z_eta))
    taylor = []
    current = f
    for k in range(1, _TAYLOR_TERMS + 1):
        current = current.derivative(domain)
        taylor.append(complex(current.on_curve(domain, z_eta)) / math.factorial(k))
    return DiffQuotient(f, float(eta_theta), eta, f_eta, tuple(taylor), eps_diag)


@dataclass(frozen=True)
class UnboundQuotient(AnalyticFunction):
    """F_η named by its boundary parameter only; η is fixed once a domain is known."""

    base: AnalyticFunction
    eta_theta: float

    def bind(self, domain: ConformalDomain) -> DiffQuotient:
        return diff_quotient(domain, self.base, self.eta_theta)

    def on_curve(self, domain, z):
        return self.bind(domain).on_curve(domain, z)

    def at(self, domain, zeta):
        return self.bind(domain).at(domain, zeta)

    def derivative(self, domain):
        raise UnsupportedOperationError("difference quotients are not differentiated symbolically")

    def scaled(self, alpha):
        return UnboundQuotient(self.base.scaled(alpha), self.eta_theta)

    def shifted(self, c):
        raise UnsupportedOperationError("difference quotients do not support shifted()")


def require_analytic(domain: ConformalDomain, f: AnalyticFunction) -> None:
    """Raise FunctionEvaluationError if f has a pole in the closure of G.

    Pullback series are analytic on the closed disc by construction; rational
    functions and the bases of difference quotients are checked.
    """
    if isinstance(f, Rational):
        f.check_interior(domain)
    elif isinstance(f, (DiffQuotient, UnboundQuotient)):
        require_analytic(domain, f.base)


# ── Constructors ──────────────────────────────────────────────────────────


def constant(c: complex) -> Rational:
    return Rational((complex(c),))


def polynomial(coeffs: Sequence[complex]) -> Rational:
    """Polynomial in ζ, ascending coefficients."""
    return Rational(_as_coeffs(coeffs))


def pole(location: complex, order: int = 1, coeff: complex = 1.0) -> Rational:
    return Rational((0j,), (PoleTerm(location, order, coeff),))


__all__ = [
    "AnalyticFunction",
    "DEFAULT_EPS_DIAG",
    "DiffQuotient",
    "FunctionEvaluationError",
    "PoleTerm",
    "PullbackSeries",
    "Rational",
    "UnboundQuotient",
    "UnsupportedOperationError",
    "constant",
    "diff_quotient",
    "pole",
    "polynomial",
    "require_analytic",
]

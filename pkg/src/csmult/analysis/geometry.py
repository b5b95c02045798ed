"""Jordan domains given as polynomial conformal images of the unit disc.

A domain G is described by φ(z) = Σ_{k≥1} c_k z^k. The boundary ℓ is the
image of |z| = 1 and the level curves ℓ_r the images of |z| = r. All curve
data (points, tangents, arc length, chord-arc constant) is derived from φ.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import minimize_scalar

from csmult.analysis.numerics import (
    TWO_PI,
    PeriodicGrid,
    adaptive_integral,
    periodic_antiderivative,
    periodic_trapezoid,
)

logger = logging.getLogger(__name__)

# Circles on which φ′ must not vanish.
CHECK_RADII: Tuple[float, ...] = (0.5, 0.9, 0.99, 1.0)

_SPEED_FLOOR = 1e-12
_UNDERFLOW = 1e-12


class DomainConstructionError(ValueError):
    """Raised when φ fails a univalence or regularity check."""


# ── Domain ────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ConformalDomain:
    """Validated image of the unit disc under a polynomial map with φ(0) = 0.

    Build instances with :func:`build_domain`; ``s0`` and ``c0`` are cached
    there.
    """

    phi_coeffs: Tuple[complex, ...]
    n_check: int
    s0: float = math.nan
    c0: float = math.nan
    _poly: np.ndarray = field(init=False, repr=False, compare=False)
    _dpoly: np.ndarray = field(init=False, repr=False, compare=False)
    _d2poly: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        poly = np.concatenate(([0.0], np.asarray(self.phi_coeffs, dtype=complex)))
        object.__setattr__(self, "_poly", poly)
        object.__setattr__(self, "_dpoly", P.polyder(poly))
        object.__setattr__(self, "_d2poly", P.polyder(poly, 2) if poly.size > 2 else np.zeros(1, complex))

    @property
    def is_disc(self) -> bool:
        c = self.phi_coeffs
        return abs(c[0] - 1.0) == 0.0 and all(ck == 0 for ck in c[1:])

    @property
    def poly(self) -> np.ndarray:
        """Ascending coefficients of φ including the zero constant term."""
        return self._poly

    @property
    def dphi_poly(self) -> np.ndarray:
        return self._dpoly

    @property
    def d2phi_poly(self) -> np.ndarray:
        return self._d2poly

    def phi(self, z):
        return P.polyval(z, self._poly)

    def dphi(self, z):
        return P.polyval(z, self._dpoly)

    def d2phi(self, z):
        return P.polyval(z, self._d2poly)

    def boundary_point(self, r: float, theta):
        """Return (ζ, dζ/dθ) on ℓ_r at parameter θ (scalars or arrays)."""
        if not 0.0 < r <= 1.0:
            raise ValueError(f"level radius must lie in (0, 1], got {r}")
        z = r * np.exp(1j * np.asarray(theta, dtype=float))
        return self.phi(z), 1j * z * self.dphi(z)

    def level_curve(self, r: float) -> "LevelCurve":
        return LevelCurve(self, r)

    def inverse(self, zeta) -> np.ndarray:
        """φ⁻¹(ζ) taken as the root of φ(z) = ζ of smallest modulus."""
        zeta_arr = np.atleast_1d(np.asarray(zeta, dtype=complex))
        if self.is_disc:
            out = zeta_arr.copy()
        else:
            out = np.empty_like(zeta_arr)
            for i, w in enumerate(zeta_arr):
                shifted = self._poly.copy()
                shifted[0] -= w
                roots = P.polyroots(shifted)
                out[i] = roots[np.argmin(np.abs(roots))]
        return out if np.ndim(zeta) else out[0]

    def preimage_radius(self, zeta) -> float:
        """|φ⁻¹(ζ)|; below 1 means ζ lies in G, above 1 outside the closure."""
        return float(np.max(np.abs(np.atleast_1d(self.inverse(zeta)))))

    def boundary_nodes(self, n: int) -> np.ndarray:
        return self.phi(np.exp(1j * PeriodicGrid(n).nodes))

    @property
    def max_speed(self) -> float:
        return float(np.max(np.abs(self.dphi(np.exp(1j * PeriodicGrid(self.n_check).nodes)))))

    @property
    def diameter(self) -> float:
        pts = self.boundary_nodes(min(self.n_check, 512))
        return float(np.max(np.abs(pts[:, None] - pts[None, :])))


@dataclass(frozen=True)
class CurveSample:
    """Disc points z = re^{iθ}, their images ζ = φ(z) and dζ/dθ."""

    z: np.ndarray
    zeta: np.ndarray
    dzeta: np.ndarray

    @property
    def speed(self) -> np.ndarray:
        return np.abs(self.dzeta)


@dataclass(frozen=True)
class LevelCurve:
    """ℓ_r = φ(|z| = r) for a fixed domain."""

    domain: ConformalDomain
    r: float

    def __call__(self, theta):
        return self.domain.boundary_point(self.r, theta)

    def sample(self, theta) -> CurveSample:
        """Sample ℓ_r at parameters θ (an array or a PeriodicGrid); dζ/dθ must not vanish."""
        nodes = theta.nodes if isinstance(theta, PeriodicGrid) else np.asarray(theta, dtype=float)
        zeta, dzeta = self(nodes)
        if np.size(dzeta) and np.min(np.abs(dzeta)) <= _SPEED_FLOOR:
            raise DomainConstructionError(f"level curve r={self.r} has a stationary node")
        return CurveSample(self.r * np.exp(1j * nodes), zeta, dzeta)


# ── Construction ──────────────────────────────────────────────────────────


def _check_critical_points(domain: ConformalDomain) -> None:
    dpoly = domain.dphi_poly
    if dpoly.size > 1 and np.any(dpoly[1:] != 0):
        for root in P.polyroots(np.trim_zeros(dpoly, "b")):
            if abs(root) <= 1.0 + 1e-12:
                raise DomainConstructionError(
                    f"phi'(z) vanishes at z={root.real:.6g}{root.imag:+.6g}j "
                    f"inside the closed unit disc"
                )


def _check_circles(domain: ConformalDomain, n: int) -> None:
    grid = PeriodicGrid(n)
    floor = _SPEED_FLOOR * abs(domain.phi_coeffs[0])
    for r in CHECK_RADII:
        speed = np.abs(domain.dphi(r * np.exp(1j * grid.nodes)))
        j = int(np.argmin(speed))
        if speed[j] <= floor:
            raise DomainConstructionError(
                f"phi'(z) vanishes on the check circle r={r} at node {j} "
                f"(theta={grid.nodes[j]:.6f})"
            )


def _check_simple(domain: ConformalDomain, n: int) -> None:
    pts = domain.boundary_nodes(n)
    worst = math.inf
    worst_pair = (0, 0)
    for k in range(1, n // 2 + 1):
        dist = np.abs(np.roll(pts, -k) - pts)
        j = int(np.argmin(dist))
        if dist[j] < worst:
            worst = float(dist[j])
            worst_pair = (j, (j + k) % n)
    if worst <= _UNDERFLOW * abs(domain.phi_coeffs[0]):
        i, j = worst_pair
        raise DomainConstructionError(
            f"boundary self-intersects on the check grid: nodes {i} and {j} coincide"
        )


def build_domain(
    phi_coeffs: Sequence[complex],
    n_check: int = 2048,
    tol: float = 1e-12,
) -> ConformalDomain:
    """Validate φ and return a domain with cached arc length s0 and chord-arc c0."""
    coeffs = tuple(complex(c) for c in phi_coeffs)
    if not coeffs:
        raise DomainConstructionError("phi_coeffs must not be empty")
    if coeffs[0] == 0:
        raise DomainConstructionError("phi'(0) = c_1 must be nonzero")
    if n_check < 64:
        raise DomainConstructionError(f"n_check must be at least 64, got {n_check}")

    domain = ConformalDomain(coeffs, n_check)
    _check_critical_points(domain)
    _check_circles(domain, n_check)
    _check_simple(domain, n_check)

    speed = lambda theta: np.abs(domain.dphi(np.exp(1j * theta)))  # noqa: E731
    s0 = adaptive_integral(speed, n0=64, tol=tol).value.real
    domain = replace(domain, s0=s0)
    c0 = chord_arc_constant(domain, n_check)
    if not 0.0 < c0 <= 1.0:
        raise DomainConstructionError(f"chord-arc constant {c0} outside (0, 1]")
    domain = replace(domain, c0=c0)
    logger.info("Built domain phi=%s s0=%.12g c0=%.8f", list(coeffs), s0, c0)
    return domain


# ── Arc length ────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ArcLengthMap:
    """Tabulated s(θ) with linear-interpolation inverse on [0, s0)."""

    theta_nodes: np.ndarray
    s_nodes: np.ndarray

    @property
    def total(self) -> float:
        return float(self.s_nodes[-1])

    def __call__(self, s):
        return np.interp(np.mod(s, self.total), self.s_nodes, self.theta_nodes)

    def arc_length(self, theta):
        return np.interp(np.mod(theta, TWO_PI), self.theta_nodes, self.s_nodes)


def arc_length_param(domain: ConformalDomain, n: int) -> ArcLengthMap:
    if n < 64:
        raise ValueError(f"arc_length_param needs n >= 64, got {n}")
    grid = PeriodicGrid(n)
    speed = np.abs(domain.dphi(np.exp(1j * grid.nodes)))
    s = periodic_antiderivative(speed)
    total = periodic_trapezoid(speed).real
    theta_nodes = np.append(grid.nodes, TWO_PI)
    s_nodes = np.append(s, total)
    if np.any(np.diff(s_nodes) <= 0):
        raise DomainConstructionError("arc length is not strictly increasing on the grid")
    return ArcLengthMap(theta_nodes, s_nodes)


def chord_arc_constant(domain: ConformalDomain, n: int = 2048) -> float:
    """min |z(s_i) − z(s_j)| / d(s_i, s_j) over an arc-length grid, clamped to (0, 1].

    d is the geodesic parameter distance. Returns 0.0 (with a warning) when
    some ratio underflows.
    """
    if n < 64:
        raise ValueError(f"chord_arc_constant needs n >= 64, got {n}")
    arc = arc_length_param(domain, max(8 * n, 4096))
    s0 = arc.total
    s = s0 * np.arange(n) / n
    pts = domain.phi(np.exp(1j * arc(s)))

    ratio = math.inf
    for k in range(1, n // 2 + 1):
        geodesic = min(k, n - k) * s0 / n
        chords = np.abs(np.roll(pts, -k) - pts)
        ratio = min(ratio, float(np.min(chords)) / geodesic)
    if ratio <= _UNDERFLOW:
        logger.warning("chord-arc ratio underflowed at n=%d; curve is not chord-arc at this grid", n)
        return 0.0
    return min(ratio, 1.0)


def boundary_distance(domain: ConformalDomain, zeta0: complex, n: Optional[int] = None) -> float:
    """dist(ζ0, ℓ): the nearest of n boundary nodes, polished by a bounded search in θ."""
    grid = PeriodicGrid(n or domain.n_check)
    gaps = np.abs(domain.phi(np.exp(1j * grid.nodes)) - zeta0)
    j = int(np.argmin(gaps))
    res = minimize_scalar(
        lambda t: abs(complex(domain.phi(np.exp(1j * t))) - zeta0),
        bounds=(grid.nodes[j] - grid.step, grid.nodes[j] + grid.step),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(min(gaps[j], res.fun))


def interior_grid(
    domain: ConformalDomain,
    radii: Sequence[float] = (0.3, 0.6, 0.9),
    n_angles: int = 8,
) -> np.ndarray:
    """Points φ(ρ e^{iα}) plus φ(0) = 0."""
    alpha = PeriodicGrid(n_angles).nodes
    rings = [domain.phi(rho * np.exp(1j * alpha)) for rho in radii]
    return np.concatenate([[0.0 + 0.0j], *rings])


__all__ = [
    "ArcLengthMap",
    "CHECK_RADII",
    "ConformalDomain",
    "CurveSample",
    "DomainConstructionError",
    "LevelCurve",
    "arc_length_param",
    "boundary_distance",
    "build_domain",
    "chord_arc_constant",
    "interior_grid",
]

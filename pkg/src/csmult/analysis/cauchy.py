"""Cauchy–Stieltjes transforms, variation norms and the ℓ_r duality pairing.

A boundary measure is a finite list of atoms plus an optional density on ℓ.
Its transform K_μ(ζ) = ∫ dμ(t)/(t − ζ) is evaluated at interior points, and
the K(G) norm of K_μ is bracketed between the best pairing against a family
of exterior test functions (lower) and the variation of μ (upper).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from csmult.analysis.functions import (
    AnalyticFunction,
    FunctionEvaluationError,
    Rational,
    constant,
    pole,
)
from csmult.analysis.geometry import ConformalDomain, boundary_distance
from csmult.analysis.numerics import (
    DEFAULT_N_MAX,
    TWO_PI,
    PeriodicGrid,
    adaptive_integral,
    parallel_map,
    periodic_trapezoid,
)

logger = logging.getLogger(__name__)

ARCLENGTH = "arclength"
COMPLEX_LINE = "complex-line"
FLAVORS = (ARCLENGTH, COMPLEX_LINE)

# Minimum distance from ℓ_r nodes to measure sources, in units of s0/n.
CAP_FACTOR = 10.0

# Density sources per ℓ_r node when K_μ is sampled on a level curve.
_DENSITY_OVERSAMPLE = 4
_CHUNK = 512


class PreconditionError(ValueError):
    """Raised when an evaluation point, radius or test function is inadmissible."""


class UnsupportedFlavorError(ValueError):
    """Raised when an operation needs a different density flavor."""


class BracketViolationError(ValueError):
    """Raised when the pairing lower bound exceeds the variation upper bound."""


# ── Measures ──────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Atom:
    """Point mass ``weight`` at ζ = φ(e^{iθ})."""

    theta: float
    weight: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)
        object.__setattr__(self, "weight", complex(self.weight))


@dataclass(frozen=True)
class Density:
    """d(θ)|z′(θ)|dθ (arclength) or d(θ)z′(θ)dθ (complex-line)."""

    fn: AnalyticFunction
    flavor: str = COMPLEX_LINE

    def __post_init__(self) -> None:
        if self.flavor not in FLAVORS:
            raise UnsupportedFlavorError(f"unknown density flavor {self.flavor!r}")

    def values(self, domain: ConformalDomain, theta: np.ndarray):
        """Return ζ(θ), z′(θ) and d(θ)·weight(θ) at the given parameters."""
        s = domain.level_curve(1.0).sample(theta)
        d = self.fn.on_curve(domain, s.z)
        weight = s.dzeta if self.flavor == COMPLEX_LINE else s.speed
        return s.zeta, s.dzeta, d * weight


@dataclass(frozen=True)
class BoundaryMeasure:
    domain: ConformalDomain
    atoms: Tuple[Atom, ...] = ()
    density: Optional[Density] = None
    tol: float = 1e-12
    variation: float = field(init=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        total = sum(abs(a.weight) for a in self.atoms)
        if self.density is not None:
            density = self.density

            def modulus(theta: np.ndarray) -> np.ndarray:
                return np.abs(density.values(self.domain, theta)[2])

            total += adaptive_integral(modulus, n0=64, tol=self.tol).value.real
        object.__setattr__(self, "variation", float(total))

    @property
    def is_zero(self) -> bool:
        return self.variation == 0.0

    @property
    def atom_points(self) -> np.ndarray:
        return np.array([complex(self.domain.phi(np.exp(1j * a.theta))) for a in self.atoms], dtype=complex)

    @property
    def atom_weights(self) -> np.ndarray:
        return np.array([a.weight for a in self.atoms], dtype=complex)

    def scaled(self, alpha: complex) -> "BoundaryMeasure":
        alpha = complex(alpha)
        atoms = tuple(Atom(a.theta, alpha * a.weight) for a in self.atoms)
        density = None
        if self.density is not None:
            density = Density(self.density.fn.scaled(alpha), self.density.flavor)
        return BoundaryMeasure(self.domain, atoms, density, self.tol)

    def __add__(self, other: "BoundaryMeasure") -> "BoundaryMeasure":
        if not isinstance(other, BoundaryMeasure):
            return NotImplemented
        density = self.density or other.density
        if self.density is not None and other.density is not None:
            if self.density.flavor != other.density.flavor:
                raise UnsupportedFlavorError("cannot add densities of different flavors")
            density = Density(self.density.fn + other.density.fn, self.density.flavor)
        return BoundaryMeasure(self.domain, self.atoms + other.atoms, density, self.tol)

    def sources(self, m: int) -> Tuple[np.ndarray, np.ndarray]:
        """Atoms plus the density discretized on m nodes, as (points, weights)."""
        points = [self.atom_points]
        weights = [self.atom_weights]
        if self.density is not None:
            grid = PeriodicGrid(m)
            zeta, _, dmu = self.density.values(self.domain, grid.nodes)
            points.append(zeta)
            weights.append(dmu * grid.step)
        return np.concatenate(points), np.concatenate(weights)


def variation_norm(mu: BoundaryMeasure) -> float:
    return mu.variation


def cauchy_line_measure(domain: ConformalDomain) -> BoundaryMeasure:
    """dμ = dζ/(2πi); its transform is 1 everywhere in G."""
    return BoundaryMeasure(domain, density=Density(constant(1.0 / (2j * math.pi)), COMPLEX_LINE))


# ── Transform ─────────────────────────────────────────────────────────────


def _check_interior_point(domain: ConformalDomain, zeta0: complex) -> None:
    if domain.preimage_radius(zeta0) >= 1.0:
        raise PreconditionError(f"point {zeta0} is not inside the boundary curve")
    gap = float(np.min(np.abs(domain.boundary_nodes(domain.n_check) - zeta0)))
    if gap <= 1e-6 * domain.diameter:
        raise PreconditionError(f"point {zeta0} is within {gap:.3g} of the boundary")


def cauchy_transform(
    domain: ConformalDomain,
    mu: BoundaryMeasure,
    zeta0: complex,
    tol: float = 1e-13,
    n_max: int = DEFAULT_N_MAX,
) -> complex:
    """K_μ(ζ0) = ∫ dμ(ζ)/(ζ − ζ0) for ζ0 strictly inside ℓ."""
    zeta0 = complex(zeta0)
    _check_interior_point(domain, zeta0)
    value = complex(np.sum(mu.atom_weights / (mu.atom_points - zeta0))) if mu.atoms else 0j
    if mu.density is not None:
        density = mu.density

        def integrand(theta: np.ndarray) -> np.ndarray:
            zeta, _, dmu = density.values(domain, theta)
            return dmu / (zeta - zeta0)

        result = adaptive_integral(integrand, n0=64, tol=tol, n_max=n_max)
        if not result.converged:
            logger.warning("Cauchy transform at %s did not converge (diff=%.2e)", zeta0, result.est_error)
        value += result.value
    return value


def transform_on_nodes(mu: BoundaryMeasure, targets: np.ndarray, m: int) -> np.ndarray:
    """K_μ at many targets, density discretized on m nodes."""
    points, weights = mu.sources(m)
    out = np.zeros(targets.shape, dtype=complex)
    if points.size == 0:
        return out
    for start in range(0, targets.size, _CHUNK):
        block = targets[start:start + _CHUNK]
        out[start:start + _CHUNK] = (weights[None, :] / (points[None, :] - block[:, None])).sum(axis=1)
    return out


def winding_number(domain: ConformalDomain, zeta0: complex = 0.0) -> complex:
    """(1/2πi)∮_ℓ dζ/(ζ − ζ0); 1 for counterclockwise ℓ around ζ0."""
    return cauchy_transform(domain, cauchy_line_measure(domain), zeta0)


# ── Pointwise estimate ────────────────────────────────────────────────────


@dataclass(frozen=True)
class PointwiseBound:
    """max |K_μ(ζ)|·dist(ζ, ℓ) / ‖μ‖ over the given points; never above 1."""

    value: float
    point: complex
    distance: float
    transform: complex


def pointwise_bound(
    domain: ConformalDomain,
    mu: BoundaryMeasure,
    points: Sequence[complex],
    tol: float = 1e-13,
) -> PointwiseBound:
    if mu.is_zero:
        raise PreconditionError("the pointwise estimate needs a nonzero measure")
    best = None
    for p in points:
        p = complex(p)
        k = cauchy_transform(domain, mu, p, tol=tol)
        dist = boundary_distance(domain, p)
        ratio = abs(k) * dist / mu.variation
        if best is None or ratio > best.value:
            best = PointwiseBound(float(ratio), p, dist, k)
    if best is None:
        raise PreconditionError("the pointwise estimate needs at least one point")
    logger.debug("pointwise |K|·dist/‖μ‖ = %.12g at %s", best.value, best.point)
    return best


# ── Test functions ────────────────────────────────────────────────────────


def _normalize(domain: ConformalDomain, h: Rational, n_norm: int) -> Tuple[Rational, float]:
    grid = PeriodicGrid(n_norm)
    mags = np.abs(h.boundary_values(domain, grid))
    j = int(np.argmax(mags))
    peak, peak_theta = float(mags[j]), float(grid.nodes[j])
    local = (mags >= np.roll(mags, 1)) & (mags >= np.roll(mags, -1)) & (mags >= 0.99 * peak)
    candidates = np.flatnonzero(local)
    if np.ptp(mags) <= 1e-12 * peak:
        candidates = candidates[:0]
    candidates = candidates[np.argsort(mags[candidates])[::-1][:8]]
    for i in candidates:
        theta_i = grid.nodes[i]
        res = minimize_scalar(
            lambda t: -abs(complex(h.on_curve(domain, np.exp(1j * t)))),
            bounds=(theta_i - grid.step, theta_i + grid.step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if -res.fun > peak:
            peak, peak_theta = float(-res.fun), float(res.x)
    return h.scaled(1.0 / peak), peak_theta % TWO_PI


@dataclass(frozen=True)
class TestFunctionFamily:
    """Exterior test functions with h(∞) = 0 and sup |h| on ℓ equal to 1.

    ``peaks`` holds, per member, the parameter where |h| peaks; the declared
    normalization grid is the n_norm grid together with these points.
    """

    __test__ = False

    members: Tuple[Rational, ...]
    labels: Tuple[str, ...]
    peaks: Tuple[float, ...]
    n_norm: int
    seed: int

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Rational]:
        return iter(self.members)

    def __getitem__(self, index: int) -> Rational:
        return self.members[index]

    def max_pole_radius(self, domain: ConformalDomain) -> float:
        return max((h.pole_radius(domain) for h in self.members), default=0.0)

    def declared_max(self, domain: ConformalDomain, index: int) -> float:
        h = self.members[index]
        theta = np.append(PeriodicGrid(self.n_norm).nodes, self.peaks[index])
        return float(np.max(np.abs(h.on_curve(domain, np.exp(1j * theta)))))


def make_family(
    domain: ConformalDomain,
    functions: Sequence[Rational],
    labels: Optional[Sequence[str]] = None,
    n_norm: int = 2048,
    seed: int = 0,
) -> TestFunctionFamily:
    """Validate and normalize an explicit list of exterior test functions."""
    members, peaks = [], []
    for h in functions:
        try:
            h.check_exterior(domain)
        except FunctionEvaluationError as exc:
            raise PreconditionError(f"invalid test function: {exc}") from exc
        normalized, peak = _normalize(domain, h, n_norm)
        members.append(normalized)
        peaks.append(peak)
    names = tuple(labels) if labels is not None else tuple(f"h{i}" for i in range(len(members)))
    return TestFunctionFamily(tuple(members), names, tuple(peaks), n_norm, seed)


def build_family(
    domain: ConformalDomain,
    pole_radii: Sequence[float] = (0.0, 0.3, 0.6, 0.85),
    n_angles: int = 8,
    max_order: int = 3,
    n_random: int = 8,
    seed: int = 0,
    n_norm: int = 2048,
) -> TestFunctionFamily:
    """Single poles 1/(ζ − a)^m at a = φ(ρe^{iα}) plus seeded random combinations."""
    locations, names = [], []
    for rho in pole_radii:
        if rho == 0.0:
            locations.append(0j)
            names.append("rho=0")
            continue
        for alpha in PeriodicGrid(n_angles).nodes:
            locations.append(complex(domain.phi(rho * np.exp(1j * alpha))))
            names.append(f"rho={rho:g},alpha={alpha:.4f}")

    base, labels = [], []
    for loc, name in zip(locations, names):
        for order in range(1, max_order + 1):
            base.append(pole(loc, order))
            labels.append(f"pole[{name},m={order}]")

    rng = np.random.default_rng(seed)
    mixes = []
    for i in range(n_random if len(base) >= 3 else 0):
        picks = rng.choice(len(base), size=3, replace=False)
        weights = rng.dirichlet(np.ones(3))
        phases = np.exp(2j * math.pi * rng.random(3))
        combo = base[picks[0]].scaled(weights[0] * phases[0])
        for k in (1, 2):
            combo = combo + base[picks[k]].scaled(weights[k] * phases[k])
        mixes.append(combo)
        labels.append(f"mix[{i}]")

    family = make_family(domain, base + mixes, labels, n_norm, seed)
    logger.info("Built test family: %d members (seed=%d)", len(family), seed)
    return family


# ── Pairing ───────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class LevelSamples:
    """ζ on ℓ_r and the factor f·K_μ·dζ/dθ, shared by every test function."""

    zeta: np.ndarray
    factor: np.ndarray

    def pair(self, domain: ConformalDomain, h: Rational) -> complex:
        return periodic_trapezoid(h.at(domain, self.zeta) * self.factor) / (2j * math.pi)


def level_samples(
    domain: ConformalDomain,
    mu: BoundaryMeasure,
    r: float,
    n: int,
    multiplier: Optional[AnalyticFunction] = None,
) -> LevelSamples:
    s = domain.level_curve(r).sample(PeriodicGrid(n))
    factor = transform_on_nodes(mu, s.zeta, _DENSITY_OVERSAMPLE * n) * s.dzeta
    if multiplier is not None:
        factor = factor * multiplier.on_curve(domain, s.z)
    return LevelSamples(s.zeta, factor)


def _check_test_function(domain: ConformalDomain, h: AnalyticFunction, r: float) -> None:
    if not isinstance(h, Rational):
        raise PreconditionError("test functions must be rational")
    try:
        h.check_exterior(domain)
    except FunctionEvaluationError as exc:
        raise PreconditionError(str(exc)) from exc
    if h.pole_radius(domain) >= r:
        raise PreconditionError(f"a pole of h lies outside the level curve r={r}")


def pairing(
    domain: ConformalDomain,
    h: Rational,
    mu: BoundaryMeasure,
    r: float,
    n: int = 2048,
    multiplier: Optional[AnalyticFunction] = None,
) -> complex:
    """P_r = (1/2πi)∮_{ℓ_r} h·K_μ dζ, with an optional extra factor f in the integrand."""
    if not 0.0 < r < 1.0:
        raise PreconditionError(f"pairing radius must lie in (0, 1), got {r}")
    _check_test_function(domain, h, r)
    return level_samples(domain, mu, r, n, multiplier).pair(domain, h)


def admissible_radii(
    domain: ConformalDomain,
    mu: BoundaryMeasure,
    family: TestFunctionFamily,
    r_schedule: Sequence[float],
    n: int,
) -> Tuple[float, ...]:
    """Schedule radii whose ℓ_r stays ``CAP_FACTOR·s0/n`` clear of μ and outside every pole."""
    clearance = CAP_FACTOR * domain.s0 / n
    sources = mu.atom_points
    if mu.density is not None:
        sources = np.concatenate([sources, domain.boundary_nodes(n)])
    pole_radius = family.max_pole_radius(domain)

    allowed = []
    for r in r_schedule:
        if not 0.0 < r < 1.0 or r <= pole_radius:
            continue
        if sources.size:
            zeta = domain.level_curve(r).sample(PeriodicGrid(n)).zeta
            gap = min(
                float(np.min(np.abs(zeta[start:start + _CHUNK, None] - sources[None, :])))
                for start in range(0, zeta.size, _CHUNK)
            )
            if gap < clearance:
                continue
        allowed.append(float(r))
    return tuple(allowed)


@dataclass(frozen=True)
class KNormBracket:
    lower: float
    upper: float
    witness: int
    r_final: float
    capped: bool = False
    drift: float = 0.0


def knorm_bracket(
    domain: ConformalDomain,
    mu: BoundaryMeasure,
    family: TestFunctionFamily,
    r_schedule: Sequence[float] = (0.5, 0.75, 0.9, 0.95, 0.99),
    n: int = 2048,
    tol: float = 1e-9,
    threads: int = 1,
) -> KNormBracket:
    """lower = max_h |P_r(h, μ)| at the last admissible radius; upper = ‖μ‖."""
    if len(family) == 0:
        raise PreconditionError("test function family is empty")
    upper = variation_norm(mu)
    if mu.is_zero:
        return KNormBracket(0.0, 0.0, 0, float(r_schedule[-1]))

    radii = admissible_radii(domain, mu, family, r_schedule, n)
    if not radii:
        raise PreconditionError(f"no radius in {tuple(r_schedule)} clears the measure at n={n}")
    capped = radii[-1] < max(r_schedule)
    if capped:
        logger.info("r schedule capped at %.4g for n=%d", radii[-1], n)

    samples = level_samples(domain, mu, radii[-1], n)
    values = parallel_map(lambda h: samples.pair(domain, h), family.members, threads)
    moduli = np.abs(np.asarray(values))
    witness = int(np.argmax(moduli))
    lower = float(moduli[witness])

    drift = 0.0
    if len(radii) > 1:
        previous = level_samples(domain, mu, radii[-2], n).pair(domain, family[witness])
        drift = abs(previous - values[witness])

    if lower > upper + tol:
        raise BracketViolationError(
            f"pairing lower bound {lower:.12g} exceeds variation {upper:.12g} "
            f"(witness {family.labels[witness]})"
        )
    return KNormBracket(lower, upper, witness, radii[-1], capped, float(drift))


# ── Annihilator tests ─────────────────────────────────────────────────────


def exterior_moment_test(
    domain: ConformalDomain,
    mu: BoundaryMeasure,
    n_moments: int = 8,
    tol: float = 1e-13,
) -> Tuple[complex, ...]:
    """m_k = ∮_ℓ ζ^k d(ζ) dζ for k = −1, …, −n_moments."""
    if mu.density is None or mu.density.flavor != COMPLEX_LINE or mu.atoms:
        raise UnsupportedFlavorError("exterior moments need a pure complex-line density")
    density = mu.density
    moments = []
    for k in range(1, n_moments + 1):

        def integrand(theta: np.ndarray, k: int = k) -> np.ndarray:
            zeta, _, dmu = density.values(domain, theta)
            return zeta ** (-k) * dmu

        moments.append(adaptive_integral(integrand, n0=64, tol=tol).value)
    return tuple(moments)


def knull_check(domain: ConformalDomain, mu: BoundaryMeasure, points: Sequence[complex]) -> float:
    """max |K_μ| over interior points."""
    return max((abs(cauchy_transform(domain, mu, p)) for p in points), default=0.0)


__all__ = [
    "ARCLENGTH",
    "Atom",
    "BoundaryMeasure",
    "BracketViolationError",
    "CAP_FACTOR",
    "COMPLEX_LINE",
    "Density",
    "KNormBracket",
    "LevelSamples",
    "PointwiseBound",
    "PreconditionError",
    "TestFunctionFamily",
    "UnsupportedFlavorError",
    "admissible_radii",
    "build_family",
    "cauchy_line_measure",
    "cauchy_transform",
    "exterior_moment_test",
    "knorm_bracket",
    "knull_check",
    "level_samples",
    "make_family",
    "pairing",
    "pointwise_bound",
    "transform_on_nodes",
    "variation_norm",
    "winding_number",
]

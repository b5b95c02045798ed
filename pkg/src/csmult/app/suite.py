"""Acceptance checks behind ``csmult verify`` and the single-functional subcommands.

Checks are declared as data in ``acceptance.toml`` (one ``[[check]]`` table
per row, with its expected value and tolerance). Each ``kind`` maps to an
``evaluate_*`` function that computes one value; :func:`run_check` times it
and turns it into a :class:`~csmult.app.report.CheckRecord`.
"""

from __future__ import annotations

import logging
import math
import threading
import time
import tomllib
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from csmult.analysis.cauchy import (
    Atom,
    BoundaryMeasure,
    Density,
    COMPLEX_LINE,
    TestFunctionFamily,
    build_family,
    cauchy_line_measure,
    cauchy_transform,
    exterior_moment_test,
    knorm_bracket,
    knull_check,
    make_family,
    pairing,
    pointwise_bound,
    winding_number,
)
from csmult.analysis.functions import AnalyticFunction, PoleTerm, PullbackSeries, Rational, polynomial
from csmult.analysis.geometry import (
    ConformalDomain,
    arc_length_param,
    build_domain,
    chord_arc_constant,
    interior_grid,
)
from csmult.analysis.multiplier import (
    LambdaReport,
    havin_lambda,
    holder_integral_max,
    multiplier_lower_bound,
    smirnov_kotchine_check,
    theorem1_check,
    theorem2_check,
    theorem2_constant,
    vinogradov_probe,
)
from csmult.analysis.numerics import (
    PeriodicGrid,
    adaptive_integral,
    parallel_map,
    periodic_trapezoid,
)
from csmult.analysis.spaces import einf_norm, ep_norm, level_mean, pullback_consistency
from csmult.app.report import FAIL, RELATIONS, CheckRecord, judge
from csmult.experiment import (
    ConfigError,
    ExperimentConfig,
    MeasureSpec,
    parse_complex,
    parse_function,
    parse_measure,
)

logger = logging.getLogger(__name__)

MANIFEST_NAME = "acceptance.toml"
CONFIG_DOMAIN = "config"

_RESERVED = ("kind", "name", "domain", "function", "measure", "expected", "relation", "tol")


# ── Check declarations ───────────────────────────────────────────────────


@dataclass(frozen=True)
class CheckSpec:
    kind: str
    name: str
    domain: str = CONFIG_DOMAIN
    function: Optional[AnalyticFunction] = None
    measure: Optional[MeasureSpec] = None
    params: Mapping[str, Any] = field(default_factory=dict)
    expected: Optional[float] = None
    relation: str = "none"
    tol: Optional[float] = None
    inputs: Mapping[str, Any] = field(default_factory=dict)

    def param(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)


@dataclass(frozen=True)
class CheckOutcome:
    value: float
    est_error: float = math.nan
    converged: bool = True
    details: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Manifest:
    seed: int
    battery_cases: int
    domains: Mapping[str, Tuple[complex, ...]]
    checks: Tuple[CheckSpec, ...]
    source: Optional[str] = None


# ── Shared state for one run ─────────────────────────────────────────────


class SuiteContext:
    """Domains, test families and Λ reports shared by the checks of one run.

    Each cached value is built once even when checks run on several threads.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        domains: Optional[Mapping[str, Sequence[complex]]] = None,
        seed: Optional[int] = None,
        battery_cases: int = 50,
        n_max: Optional[int] = None,
    ) -> None:
        self.config = config
        self.seed = config.family.seed if seed is None else seed
        self.battery_cases = battery_cases
        self.n_max = config.grids.n_max if n_max is None else min(n_max, config.grids.n_max)
        self._phi: Dict[str, Tuple[complex, ...]] = {CONFIG_DOMAIN: config.phi}
        self._phi.update({name: tuple(c) for name, c in (domains or {}).items()})
        self._cache: Dict[Tuple, Any] = {}
        self._key_locks: Dict[Tuple, threading.Lock] = {}
        self._lock = threading.Lock()

    @property
    def grids(self):
        return self.config.grids

    @property
    def tolerances(self):
        return self.config.tolerances

    def _cached(self, key: Tuple, build: Callable[[], Any]) -> Any:
        with self._lock:
            if key in self._cache:
                return self._cache[key]
            key_lock = self._key_locks.setdefault(key, threading.Lock())
        with key_lock:
            with self._lock:
                if key in self._cache:
                    return self._cache[key]
            value = build()
            with self._lock:
                self._cache[key] = value
            return value

    def domain(self, name: str) -> ConformalDomain:
        if name not in self._phi:
            raise ConfigError(f"unknown domain {name!r}")
        n_check = self.config.domain.n_check
        return self._cached(("domain", name), lambda: build_domain(self._phi[name], n_check))

    def family(self, name: str) -> TestFunctionFamily:
        spec = self.config.family

        def build() -> TestFunctionFamily:
            return build_family(
                self.domain(name),
                pole_radii=spec.pole_radii,
                n_angles=spec.n_angles,
                max_order=spec.max_order,
                n_random=spec.n_random,
                seed=spec.seed,
                n_norm=spec.n_norm,
            )

        return self._cached(("family", name), build)

    def lambda_report(
        self,
        name: str,
        f: AnalyticFunction,
        n_eta: Optional[int] = None,
        n_zeta: Optional[int] = None,
        tol: Optional[float] = None,
        offset: float = 0.0,
        adaptive: bool = True,
    ) -> LambdaReport:
        n_eta = n_eta or self.grids.n_eta
        n_zeta = n_zeta or self.grids.n_zeta
        tol = tol or self.tolerances.lambda_tol
        key = ("lambda", name, f, n_eta, n_zeta, tol, offset, adaptive, self.n_max)
        return self._cached(key, lambda: havin_lambda(
            self.domain(name), f, n_eta, n_zeta, tol, self.n_max, offset=offset, adaptive=adaptive,
        ))

    def search_measures(self, name: str, names: Optional[Sequence[str]] = None) -> List[Tuple[str, BoundaryMeasure]]:
        domain = self.domain(name)
        chosen = tuple(names) if names else self.config.search_measures()
        return [(m, self.config.measure(m).build(domain)) for m in chosen]

    def rng(self, label: str) -> np.random.Generator:
        """Per-check stream: the run seed mixed with a hash of the check name."""
        return np.random.default_rng([self.seed, zlib.crc32(label.encode("utf-8"))])


# ── Evaluators ───────────────────────────────────────────────────────────

KINDS: Dict[str, Callable[[CheckSpec, SuiteContext], CheckOutcome]] = {}


def _kind(name: str):
    def register(func):
        KINDS[name] = func
        return func

    return register


def _function(spec: CheckSpec) -> AnalyticFunction:
    if spec.function is None:
        raise ConfigError(f"check {spec.name!r}: kind {spec.kind!r} needs a function")
    return spec.function


def _measure(spec: CheckSpec, domain: ConformalDomain) -> BoundaryMeasure:
    if spec.measure is None:
        raise ConfigError(f"check {spec.name!r}: kind {spec.kind!r} needs a measure")
    return spec.measure.build(domain)


def _points(spec: CheckSpec, ctx: SuiteContext, domain: ConformalDomain) -> np.ndarray:
    raw = spec.param("points")
    if raw is None:
        return interior_grid(domain, ctx.grids.interior_radii, ctx.grids.interior_angles)
    return np.array([parse_complex(p, f"{spec.name}.points[{i}]") for i, p in enumerate(raw)])


def _exponent(value: Any) -> float:
    if isinstance(value, str) and value.lower() in ("inf", "infinity"):
        return math.inf
    return float(value)


@_kind("s0")
def evaluate_s0(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    domain = ctx.domain(spec.domain)
    return CheckOutcome(domain.s0, details={"phi": list(domain.phi_coeffs)})


@_kind("chord-arc")
def evaluate_chord_arc(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    domain = ctx.domain(spec.domain)
    return CheckOutcome(chord_arc_constant(domain, int(spec.param("n", 2048))))


@_kind("min-speed")
def evaluate_min_speed(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    """min |φ′| on the boundary grid; bounded away from 0 for a univalent map."""
    domain = ctx.domain(spec.domain)
    speed = np.abs(domain.dphi(np.exp(1j * PeriodicGrid(domain.n_check).nodes)))
    return CheckOutcome(float(speed.min()), details={"max_speed": domain.max_speed})


@_kind("arc-length")
def evaluate_arc_length(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    domain = ctx.domain(spec.domain)
    total = arc_length_param(domain, int(spec.param("n", 1024))).total
    return CheckOutcome(abs(total - domain.s0), details={"total": total, "s0": domain.s0})


@_kind("trapezoid-kink")
def evaluate_trapezoid_kink(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    """Trapezoid sum of |e^{iθ} + 1|, whose node-aligned value is (4π/n)·cot(π/2n)."""
    n = int(spec.param("n", 1024))
    theta = PeriodicGrid(n).nodes
    value = periodic_trapezoid(np.abs(np.exp(1j * theta) + 1.0)).real
    closed_form = (4.0 * math.pi / n) / math.tan(math.pi / (2 * n))
    return CheckOutcome(value, details={"closed_form": closed_form})


@_kind("adaptive-kink")
def evaluate_adaptive_kink(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    result = adaptive_integral(
        lambda theta: np.abs(np.exp(1j * theta) + 1.0),
        n0=16,
        tol=float(spec.param("tol", 1e-9)),
        n_max=int(spec.param("n_max", 2 ** 20)),
    )
    return CheckOutcome(result.value.real, result.est_error, result.converged, {"n_used": result.n_used})


@_kind("ep-norm")
def evaluate_ep_norm(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    domain = ctx.domain(spec.domain)
    report = ep_norm(
        domain,
        _function(spec),
        _exponent(spec.param("p", 2.0)),
        normalized=bool(spec.param("normalized", True)),
        n_max=ctx.n_max,
    )
    return CheckOutcome(report.value, report.est_error, report.converged and report.monotone,
                        {"r_used": report.r_used, "monotone": report.monotone})


@_kind("einf")
def evaluate_einf(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    return CheckOutcome(einf_norm(ctx.domain(spec.domain), _function(spec)))


@_kind("pullback-consistency")
def evaluate_pullback_consistency(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    direct, pullback = pullback_consistency(
        ctx.domain(spec.domain),
        _function(spec),
        float(spec.param("p", 2.0)),
        float(spec.param("r", 0.9)),
        int(spec.param("n", 1024)),
    )
    return CheckOutcome(abs(direct - pullback), details={"direct": direct, "pullback": pullback})


@_kind("lambda")
def evaluate_lambda(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    report = ctx.lambda_report(
        spec.domain,
        _function(spec),
        spec.param("n_eta"),
        spec.param("n_zeta"),
        spec.param("tol"),
        adaptive=bool(spec.param("adaptive", True)),
    )
    return CheckOutcome(report.value, report.est_error, report.converged, {
        "argmax_theta": report.argmax_theta,
        "n_zeta": report.n_zeta,
        "history": report.history,
    })


@_kind("lambda-offset")
def evaluate_lambda_offset(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    """|Λ on the η-grid − Λ on the η-grid shifted by half a step|."""
    f = _function(spec)
    n_eta = int(spec.param("n_eta", ctx.grids.n_eta))
    base = ctx.lambda_report(spec.domain, f, n_eta)
    shifted = ctx.lambda_report(spec.domain, f, n_eta, offset=math.pi / n_eta)
    return CheckOutcome(
        abs(base.value - shifted.value),
        converged=base.converged and shifted.converged,
        details={"lambda": base.value, "lambda_shifted": shifted.value},
    )


@_kind("smirnov-kotchine")
def evaluate_smirnov_kotchine(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    domain = ctx.domain(spec.domain)
    f = _function(spec)
    lam = ctx.lambda_report(spec.domain, f)
    etas = lam.eta_nodes()
    if spec.param("n_points") is not None:
        extra = PeriodicGrid(int(spec.param("n_points")), float(spec.param("phase", 0.1)))
        etas = np.concatenate([etas, extra.nodes])
    report = smirnov_kotchine_check(
        domain, f, etas,
        tol=float(spec.param("tol", 1e-7)),
        n_max=max(ctx.n_max, 65536),
        lambda_report=lam,
    )
    return CheckOutcome(report.gap, converged=report.converged and lam.converged, details={
        "lambda": lam.value,
        "max_value": report.max_value,
        "values": report.values,
        "e1_values": report.e1_values,
    })


@_kind("residue")
def evaluate_residue(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    """|P_r(h, δ_a) − h(a)| for the normalized h and a = φ(e^{iθ})."""
    domain = ctx.domain(spec.domain)
    h = _function(spec)
    if not isinstance(h, Rational):
        raise ConfigError(f"check {spec.name!r}: residue checks need a rational test function")
    theta = float(spec.param("theta", 0.0))
    h = make_family(domain, [h], n_norm=ctx.config.family.n_norm)[0]
    mu = BoundaryMeasure(domain, (Atom(theta, 1.0),))
    paired = pairing(domain, h, mu, float(spec.param("r", 0.99)), int(spec.param("n", 2048)))
    target = complex(h.at(domain, mu.atom_points[0]))
    return CheckOutcome(abs(paired - target), details={"pairing": paired, "h_at_atom": target})


def _bracket(spec: CheckSpec, ctx: SuiteContext):
    domain = ctx.domain(spec.domain)
    return knorm_bracket(
        domain,
        _measure(spec, domain),
        ctx.family(spec.domain),
        r_schedule=ctx.grids.r_schedule,
        n=ctx.grids.n,
        tol=ctx.tolerances.bracket,
    )


def _bracket_details(bracket, family: TestFunctionFamily) -> Dict[str, Any]:
    return {
        "lower": bracket.lower,
        "upper": bracket.upper,
        "witness": family.labels[bracket.witness] if len(family) else "",
        "r_final": bracket.r_final,
        "capped": bracket.capped,
        "drift": bracket.drift,
    }


@_kind("knorm")
def evaluate_knorm(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    """lower − upper of the K-norm bracket (never positive beyond the bracket tolerance)."""
    bracket = _bracket(spec, ctx)
    return CheckOutcome(bracket.lower - bracket.upper, details=_bracket_details(bracket, ctx.family(spec.domain)))


@_kind("knorm-tight")
def evaluate_knorm_tight(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    """max(|lower − norm|, |upper − norm|) for a measure whose K-norm is known."""
    bracket = _bracket(spec, ctx)
    norm = float(spec.param("norm", 1.0))
    value = max(abs(bracket.lower - norm), abs(bracket.upper - norm))
    return CheckOutcome(value, details=_bracket_details(bracket, ctx.family(spec.domain)))


@_kind("cauchy-identity")
def evaluate_cauchy_identity(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    domain = ctx.domain(spec.domain)
    mu = cauchy_line_measure(domain)
    points = _points(spec, ctx, domain)
    errors = [abs(cauchy_transform(domain, mu, p) - 1.0) for p in points]
    return CheckOutcome(max(errors), details={"points": points})


@_kind("winding")
def evaluate_winding(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    domain = ctx.domain(spec.domain)
    point = parse_complex(spec.param("point", 0.0), f"{spec.name}.point")
    value = winding_number(domain, point)
    return CheckOutcome(abs(value - 1.0), details={"winding": value})


@_kind("knull")
def evaluate_knull(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    domain = ctx.domain(spec.domain)
    return CheckOutcome(knull_check(domain, _measure(spec, domain), _points(spec, ctx, domain)))


@_kind("pointwise-bound")
def evaluate_pointwise_bound(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    """max |K_μ(ζ)|·dist(ζ, ℓ) / ‖μ‖ over the points; at most 1."""
    domain = ctx.domain(spec.domain)
    mu = _measure(spec, domain)
    bound = pointwise_bound(domain, mu, _points(spec, ctx, domain))
    return CheckOutcome(bound.value, details={
        "point": bound.point,
        "distance": bound.distance,
        "variation": mu.variation,
    })


@_kind("mult-bound")
def evaluate_mult_bound(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    domain = ctx.domain(spec.domain)
    bound = multiplier_lower_bound(
        domain,
        _function(spec),
        ctx.search_measures(spec.domain, spec.param("measures")),
        ctx.family(spec.domain),
        r=ctx.grids.pairing_r,
        n=ctx.grids.n,
    )
    return CheckOutcome(bound.value, details={"measure": bound.measure, "member": bound.member_label})


def _theorem1(spec: CheckSpec, ctx: SuiteContext):
    f = _function(spec)
    return theorem1_check(
        ctx.domain(spec.domain),
        f,
        ctx.search_measures(spec.domain, spec.param("measures")),
        ctx.family(spec.domain),
        r=ctx.grids.pairing_r,
        n=ctx.grids.n,
        tol=math.inf,
        lambda_report=ctx.lambda_report(spec.domain, f),
    )


def _theorem1_details(verdict) -> Dict[str, Any]:
    return {
        "mult_lower": verdict.mult_lower,
        "upper": verdict.theorem1_upper,
        "einf": verdict.einf,
        "lambda": verdict.lambda_value,
        "witness_measure": verdict.witness_measure,
        "witness_member": verdict.witness_member,
    }


@_kind("theorem1")
def evaluate_theorem1(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    """Slack E^∞ + Λ − mult_lower."""
    verdict = _theorem1(spec, ctx)
    return CheckOutcome(verdict.slack, converged=verdict.lambda_converged, details=_theorem1_details(verdict))


@_kind("theorem1-tight")
def evaluate_theorem1_tight(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    verdict = _theorem1(spec, ctx)
    norm = float(spec.param("norm", 1.0))
    value = max(abs(verdict.mult_lower - norm), abs(verdict.theorem1_upper - norm))
    return CheckOutcome(value, converged=verdict.lambda_converged, details=_theorem1_details(verdict))


@_kind("theorem2")
def evaluate_theorem2(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    """Margin C·‖f′‖_{E^p} − Λ(f)."""
    f = _function(spec)
    report = theorem2_check(
        ctx.domain(spec.domain),
        f,
        float(spec.param("p", 2.0)),
        n_max=ctx.n_max,
        lambda_report=ctx.lambda_report(spec.domain, f),
    )
    return CheckOutcome(report.bound - report.lambda_value, converged=report.lambda_converged, details={
        "p": report.p,
        "lambda": report.lambda_value,
        "constant": report.constant,
        "fprime_ep": report.fprime_ep,
        "fprime_ep_normalized": report.fprime_ep_normalized,
        "bound": report.bound,
        "satisfied": report.satisfied,
    })


def _curve_constants(spec: CheckSpec, ctx: SuiteContext) -> Tuple[float, float, float]:
    p = float(spec.param("p", 2.0))
    if spec.param("s0") is not None and spec.param("c0") is not None:
        return p, float(spec.param("s0")), float(spec.param("c0"))
    domain = ctx.domain(spec.domain)
    return p, domain.s0, domain.c0


@_kind("theorem2-constant")
def evaluate_theorem2_constant(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    p, s0, c0 = _curve_constants(spec, ctx)
    return CheckOutcome(theorem2_constant(p, s0, c0), details={"p": p, "s0": s0, "c0": c0})


@_kind("theorem2-holder")
def evaluate_theorem2_holder(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    """|closed-form constant − (1/c0)·max_σ ∫ |s − σ|^{−1/p} ds|."""
    p, s0, c0 = _curve_constants(spec, ctx)
    closed = theorem2_constant(p, s0, c0)
    searched = holder_integral_max(p, s0) / c0
    return CheckOutcome(abs(closed - searched), details={"closed_form": closed, "searched": searched})


@_kind("theorem2-limit")
def evaluate_theorem2_limit(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    """C(p, s0, c0) / (s0/c0), which tends to 1 as p grows."""
    p, s0, c0 = _curve_constants(spec, ctx)
    return CheckOutcome(theorem2_constant(p, s0, c0) / (s0 / c0), details={"p": p})


@_kind("vinogradov")
def evaluate_vinogradov(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    report = vinogradov_probe(ctx.domain(spec.domain), _function(spec), n_max=ctx.n_max)
    return CheckOutcome(report.lambda_value, details={
        "fprime_h1": report.fprime_h1,
        "diverged": report.diverged,
        "history": report.history,
    })


# ── Seeded batteries ─────────────────────────────────────────────────────


def _random_polynomial(rng: np.random.Generator, max_degree: int = 3) -> Rational:
    degree = int(rng.integers(1, max_degree + 1))
    coeffs = (rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)) / (degree + 1)
    return polynomial(coeffs)


def _random_unit(rng: np.random.Generator) -> complex:
    return complex(rng.normal(), rng.normal())


def _battery_lambda(spec: CheckSpec, ctx: SuiteContext, transform) -> CheckOutcome:
    domain = ctx.domain(spec.domain)
    rng = ctx.rng(spec.name)
    n_eta, n_zeta = int(spec.param("n_eta", 8)), int(spec.param("n_zeta", 256))

    def lam(f: AnalyticFunction) -> float:
        return havin_lambda(domain, f, n_eta, n_zeta, adaptive=False, refine=False).value

    worst = 0.0
    for _ in range(ctx.battery_cases):
        f = _random_polynomial(rng)
        g, expected_factor = transform(f, rng)
        worst = max(worst, abs(lam(g) - expected_factor * lam(f)))
    return CheckOutcome(worst, details={"cases": ctx.battery_cases})


@_kind("battery-lambda-scaling")
def evaluate_battery_lambda_scaling(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    """max |Λ(αf) − |α|Λ(f)| over random polynomials and α."""

    def scale(f, rng):
        alpha = _random_unit(rng)
        return f.scaled(alpha), abs(alpha)

    return _battery_lambda(spec, ctx, scale)


@_kind("battery-lambda-translation")
def evaluate_battery_lambda_translation(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    """max |Λ(f + c) − Λ(f)|."""

    def shift(f, rng):
        return f.shifted(_random_unit(rng)), 1.0

    return _battery_lambda(spec, ctx, shift)


def _random_atoms(rng: np.random.Generator, domain: ConformalDomain) -> BoundaryMeasure:
    count = int(rng.integers(1, 4))
    atoms = tuple(Atom(float(rng.uniform(0.0, 2 * math.pi)), _random_unit(rng)) for _ in range(count))
    return BoundaryMeasure(domain, atoms)


@_kind("battery-pairing-linearity")
def evaluate_battery_pairing_linearity(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    """max |P(αμ + βν) − αP(μ) − βP(ν)| over random atoms, weights and family members."""
    domain = ctx.domain(spec.domain)
    family = ctx.family(spec.domain)
    rng = ctx.rng(spec.name)
    r, n = float(spec.param("r", 0.9)), int(spec.param("n", 512))
    worst = 0.0
    for _ in range(ctx.battery_cases):
        mu, nu = _random_atoms(rng, domain), _random_atoms(rng, domain)
        alpha, beta = _random_unit(rng), _random_unit(rng)
        h = family[int(rng.integers(len(family)))]
        combined = pairing(domain, h, mu.scaled(alpha) + nu.scaled(beta), r, n)
        separate = alpha * pairing(domain, h, mu, r, n) + beta * pairing(domain, h, nu, r, n)
        worst = max(worst, abs(combined - separate))
    return CheckOutcome(worst, details={"cases": ctx.battery_cases, "r": r, "n": n})


@_kind("battery-trapezoid")
def evaluate_battery_trapezoid(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    """The n-point rule integrates Σ_{|k|<n} c_k e^{ikθ} to 2π·c_0 exactly."""
    rng = ctx.rng(spec.name)
    worst = 0.0
    for _ in range(ctx.battery_cases):
        n = int(rng.integers(8, 65))
        degree = int(rng.integers(0, n))
        k = np.arange(-degree, degree + 1)
        coeffs = (rng.normal(size=k.size) + 1j * rng.normal(size=k.size)) / (2 * degree + 1)
        theta = PeriodicGrid(n).nodes
        samples = np.exp(1j * np.outer(theta, k)) @ coeffs
        exact = 2 * math.pi * coeffs[degree]
        worst = max(worst, abs(periodic_trapezoid(samples) - exact))
    return CheckOutcome(worst, details={"cases": ctx.battery_cases})


@_kind("battery-monotone-means")
def evaluate_battery_monotone_means(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    """Largest decrease of the circle means of |F|^p·|φ′| along increasing radii."""
    domain = ctx.domain(spec.domain)
    rng = ctx.rng(spec.name)
    radii = tuple(spec.param("radii", (0.3, 0.6, 0.9, 0.99)))
    n = int(spec.param("n", 4096))
    exponents = (1.0, 2.0, 4.0)
    worst = 0.0
    for case in range(ctx.battery_cases):
        degree = int(rng.integers(1, 6))
        moduli = rng.uniform(0.2, 1.0, size=degree + 1)
        phases = np.exp(2j * math.pi * rng.random(degree + 1))
        f = PullbackSeries(tuple(moduli * phases))
        p = exponents[case % len(exponents)]
        means = [level_mean(domain, f, p, r, n) / r for r in radii]
        worst = max(worst, max(0.0, *(a - b for a, b in zip(means, means[1:]))))
    return CheckOutcome(worst, details={"cases": ctx.battery_cases, "radii": radii})


@_kind("battery-moment-knull")
def evaluate_battery_moment_knull(spec: CheckSpec, ctx: SuiteContext) -> CheckOutcome:
    """Count of densities with vanishing exterior moments whose transform is not null."""
    names = tuple(spec.param("domains", (spec.domain,)))
    rng = ctx.rng(spec.name)
    zero_tol = float(spec.param("moment_tol", 1e-10))
    null_tol = float(spec.param("knull_tol", 1e-8))
    violations, annihilating, worst_null = 0, 0, 0.0
    for case in range(ctx.battery_cases):
        domain = ctx.domain(names[case % len(names)])
        density = Rational((0j,), tuple(
            PoleTerm(0.0, order, _random_unit(rng)) for order in range(1, int(rng.integers(2, 5)))
        ))
        if case % 2:
            density = density + polynomial((_random_unit(rng), _random_unit(rng)))
        mu = BoundaryMeasure(domain, density=Density(density, COMPLEX_LINE))
        moments = exterior_moment_test(domain, mu, ctx.grids.n_moments)
        if max(abs(m) for m in moments) > zero_tol:
            continue
        annihilating += 1
        null = knull_check(domain, mu, interior_grid(domain, ctx.grids.interior_radii, ctx.grids.interior_angles))
        worst_null = max(worst_null, null)
        if null > null_tol:
            violations += 1
    return CheckOutcome(float(violations), details={
        "cases": ctx.battery_cases,
        "annihilating": annihilating,
        "max_knull": worst_null,
    })


# ── Manifest ─────────────────────────────────────────────────────────────


def find_manifest() -> Optional[Path]:
    """Walk up from this module looking for the shipped acceptance manifest."""
    current = Path(__file__).resolve().parent
    for _ in range(6):
        candidate = current / MANIFEST_NAME
        if candidate.exists():
            return candidate
        current = current.parent
    return None


def _resolve_function(value: Any, config: ExperimentConfig, path: str) -> Optional[AnalyticFunction]:
    if value is None:
        return None
    if isinstance(value, str):
        return config.function(value)
    return parse_function(value, path)


def _resolve_measure(value: Any, config: ExperimentConfig, path: str) -> Optional[MeasureSpec]:
    if value is None:
        return None
    if isinstance(value, str):
        return config.measure(value)
    return parse_measure(value, path)


def parse_check(
    raw: Mapping[str, Any],
    config: ExperimentConfig,
    domains: Sequence[str],
    path: str,
) -> CheckSpec:
    kind = raw.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"{path}.kind: unknown check kind {kind!r}")
    name = raw.get("name", kind)
    if not isinstance(name, str) or not name:
        raise ConfigError(f"{path}.name: expected a non-empty string")
    domain = raw.get("domain", CONFIG_DOMAIN)
    if domain != CONFIG_DOMAIN and domain not in domains:
        raise ConfigError(f"{path}.domain: unknown domain {domain!r}")

    expected = raw.get("expected")
    relation = raw.get("relation", "none" if expected is None else "eq")
    if relation not in RELATIONS:
        raise ConfigError(f"{path}.relation: expected one of {RELATIONS}, got {relation!r}")
    if relation != "none":
        if isinstance(expected, bool) or not isinstance(expected, (int, float)):
            raise ConfigError(f"{path}.expected: asserted checks need a numeric expected value")
        tol = raw.get("tol", 0.0)
        if isinstance(tol, bool) or not isinstance(tol, (int, float)) or tol < 0:
            raise ConfigError(f"{path}.tol: must be a non-negative number, got {tol!r}")
    else:
        tol = raw.get("tol")
    for key, value in raw.items():
        if key == "baseline" or key.startswith("baseline_"):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{path}.{key}: baselines must be numbers, got {value!r}")

    return CheckSpec(
        kind=kind,
        name=name,
        domain=domain,
        function=_resolve_function(raw.get("function"), config, f"{path}.function"),
        measure=_resolve_measure(raw.get("measure"), config, f"{path}.measure"),
        params={k: v for k, v in raw.items() if k not in _RESERVED},
        expected=None if expected is None else float(expected),
        relation=relation,
        tol=None if tol is None else float(tol),
        inputs=dict(raw),
    )


def load_manifest(config: ExperimentConfig, path: Optional[Path] = None) -> Manifest:
    """Read and validate an acceptance manifest; errors name the failing table."""
    path = path or find_manifest()
    if path is None:
        raise ConfigError(f"no {MANIFEST_NAME} found")
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read manifest ({exc.strerror})") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    suite = data.get("suite", {})
    seed = suite.get("seed", config.family.seed)
    cases = suite.get("battery_cases", 50)
    for key, value in (("seed", seed), ("battery_cases", cases)):
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise ConfigError(f"{path}: suite.{key} must be a non-negative integer, got {value!r}")

    raw_domains = data.get("domains", {})
    if not isinstance(raw_domains, dict):
        raise ConfigError(f"{path}: [domains] must be a table")
    domains = {}
    for name, coeffs in raw_domains.items():
        if not isinstance(coeffs, list) or not coeffs:
            raise ConfigError(f"{path}: domains.{name} must be a non-empty coefficient list")
        domains[name] = tuple(parse_complex(c, f"domains.{name}[{i}]") for i, c in enumerate(coeffs))

    checks, seen = [], set()
    for i, raw in enumerate(data.get("check", [])):
        try:
            spec = parse_check(raw, config, tuple(domains), f"check[{i}]")
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if spec.name in seen:
            raise ConfigError(f"{path}: check[{i}].name: duplicate check name {spec.name!r}")
        seen.add(spec.name)
        checks.append(spec)
    if not checks:
        raise ConfigError(f"{path}: manifest declares no [[check]] tables")

    logger.info("Loaded %d checks from %s", len(checks), path)
    return Manifest(seed, cases, domains, tuple(checks), str(path))


# ── Runner ───────────────────────────────────────────────────────────────


def _baseline_drift(spec: CheckSpec, outcome: CheckOutcome) -> Dict[str, Any]:
    """Compare ``baseline`` with the value and ``baseline_<key>`` with details[key]."""
    drift: Dict[str, Any] = {}
    for key, recorded in spec.params.items():
        if key == "baseline":
            current = outcome.value
        elif key.startswith("baseline_"):
            current = outcome.details.get(key[len("baseline_"):])
        else:
            continue
        if isinstance(current, (int, float)) and not isinstance(current, bool):
            drift[key] = float(recorded)
            drift[f"{key}_drift"] = float(current) - float(recorded)
    if drift:
        logger.debug("%s baseline drift: %s", spec.name, drift)
    return drift


def run_check(spec: CheckSpec, ctx: SuiteContext) -> CheckRecord:
    started = time.perf_counter()
    try:
        outcome = KINDS[spec.kind](spec, ctx)
        verdict = judge(outcome.value, spec.expected, spec.relation, spec.tol, outcome.converged)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        logger.warning("Check %s raised %s: %s", spec.name, type(exc).__name__, exc)
        outcome = CheckOutcome(math.nan, converged=False, details={"error": f"{type(exc).__name__}: {exc}"})
        verdict = FAIL
    elapsed = (time.perf_counter() - started) * 1000.0

    if verdict == FAIL:
        logger.warning("FAIL %s: value=%r expected=%r tol=%r", spec.name, outcome.value, spec.expected, spec.tol)
    else:
        logger.debug("%s %s: value=%r", verdict, spec.name, outcome.value)
    return CheckRecord(
        check=spec.kind,
        name=spec.name,
        value=float(outcome.value),
        expected=spec.expected,
        relation=spec.relation,
        tol=spec.tol,
        verdict=verdict,
        wall_time_ms=elapsed,
        est_error=float(outcome.est_error),
        converged=bool(outcome.converged),
        inputs=dict(spec.inputs),
        details={**outcome.details, **_baseline_drift(spec, outcome)},
    )


def run_checks(specs: Sequence[CheckSpec], ctx: SuiteContext, threads: int = 1) -> List[CheckRecord]:
    """Run checks in parallel; records come back in declaration order."""
    logger.info("Running %d checks on %d thread(s)", len(specs), max(1, threads))
    records = parallel_map(lambda spec: run_check(spec, ctx), specs, threads)
    failed = sum(1 for r in records if r.verdict == FAIL)
    logger.info("Finished %d checks, %d failed", len(records), failed)
    return records


__all__ = [
    "CONFIG_DOMAIN",
    "CheckOutcome",
    "CheckSpec",
    "KINDS",
    "MANIFEST_NAME",
    "Manifest",
    "SuiteContext",
    "find_manifest",
    "load_manifest",
    "parse_check",
    "run_check",
    "run_checks",
]

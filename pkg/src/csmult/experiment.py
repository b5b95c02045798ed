"""Experiment configuration: domain, named functions and measures, grids, tolerances.

A JSON file is merged over the built-in defaults below, section by section.
Keys present in the file override the default; missing keys keep it.

    {
      "domain": {"phi": [[1, 0], [0.2, 0]]},
      "functions": {"f_square": {"kind": "polynomial", "coeffs": [0, 0, 1]}},
      "measures": {"delta_one": {"atoms": [{"theta": 0, "w": [1, 0]}]}},
      "grids": {"n_zeta": 128}
    }

Complex numbers are written as plain numbers or [re, im] pairs.

Function specs:
    {"kind": "constant", "value": c}
    {"kind": "polynomial", "coeffs": [...]}         polynomial in ζ
    {"kind": "pullback", "coeffs": [...]}           f(φ(z)) = Σ a_k z^k
    {"kind": "rational", "poly": [...], "poles": [{"a": a, "order": m, "c": c}]}
    {"kind": "diffquot", "base": <function spec>, "eta_theta": t}

Measure specs:
    {"atoms": [{"theta": t, "w": w}],
     "density": {"flavor": "arclength" | "complex-line", "fn": <function spec>}}
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from types import MappingProxyType
from typing import Any, Mapping, Optional, Tuple, Union, get_args, get_origin, get_type_hints

from csmult.analysis.cauchy import FLAVORS, Atom, BoundaryMeasure, Density
from csmult.analysis.functions import (
    AnalyticFunction,
    PoleTerm,
    PullbackSeries,
    Rational,
    UnboundQuotient,
    constant,
    polynomial,
)
from csmult.analysis.geometry import ConformalDomain

_logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Raised for unreadable or invalid experiment configuration, with a location."""


# ── Sections ─────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class DomainSpec:
    phi: Tuple[Any, ...] = ((1.0, 0.0),)
    n_check: int = 2048


@dataclass(frozen=True)
class FamilySpec:
    pole_radii: Tuple[float, ...] = (0.0, 0.3, 0.6, 0.85)
    n_angles: int = 8
    max_order: int = 3
    n_random: int = 8
    seed: int = 20240517
    n_norm: int = 2048


@dataclass(frozen=True)
class GridSpec:
    n: int = 2048                          # level-curve nodes for pairings
    n_eta: int = 32
    n_zeta: int = 64                       # starting ζ-grid for Λ
    n_max: int = 65536                     # ceiling for grid doubling
    r_schedule: Tuple[float, ...] = (0.5, 0.75, 0.9, 0.95, 0.99)
    pairing_r: float = 0.95
    interior_radii: Tuple[float, ...] = (0.3, 0.6, 0.9)
    interior_angles: int = 8
    n_moments: int = 8


@dataclass(frozen=True)
class ToleranceSpec:
    quad: float = 1e-12
    lambda_tol: float = 1e-8
    bracket: float = 1e-9
    theorem: float = 1e-6


@dataclass(frozen=True)
class SearchSpec:
    measures: Tuple[str, ...] = ()         # empty = every configured measure
    p_values: Tuple[float, ...] = (1.5, 2.0, 4.0)


@dataclass(frozen=True)
class OutputSpec:
    directory: Optional[str] = None        # None = Settings.out_dir
    json: str = "report.json"
    csv: str = "summary.csv"
    manifest: Optional[str] = None         # None = shipped acceptance.toml


@dataclass(frozen=True)
class MeasureSpec:
    """Domain-independent measure description; bind with :meth:`build`."""

    atoms: Tuple[Tuple[float, complex], ...] = ()
    density_flavor: Optional[str] = None
    density_fn: Optional[AnalyticFunction] = None

    def build(self, domain: ConformalDomain) -> BoundaryMeasure:
        density = None
        if self.density_fn is not None:
            density = Density(self.density_fn, self.density_flavor)
        return BoundaryMeasure(domain, tuple(Atom(t, w) for t, w in self.atoms), density)


_INV_TWO_PI = 1.0 / (2.0 * math.pi)

DEFAULT_FUNCTIONS: Mapping[str, Any] = MappingProxyType({
    "f_const": {"kind": "constant", "value": 2.0},
    "f_identity": {"kind": "polynomial", "coeffs": [0.0, 1.0]},
    "f_square": {"kind": "polynomial", "coeffs": [0.0, 0.0, 1.0]},
    "f_cube": {"kind": "polynomial", "coeffs": [0.0, 0.0, 0.0, 1.0]},
    "f_pole": {"kind": "rational", "poles": [{"a": 2.0, "order": 1, "c": 1.0}]},
})

DEFAULT_MEASURES: Mapping[str, Any] = MappingProxyType({
    "delta_one": {"atoms": [{"theta": 0.0, "w": 1.0}]},
    "dipole": {"atoms": [{"theta": 0.0, "w": 1.0}, {"theta": math.pi, "w": -1.0}]},
    "dzeta": {"density": {"flavor": "complex-line",
                          "fn": {"kind": "constant", "value": [0.0, -_INV_TWO_PI]}}},
})


@dataclass(frozen=True)
class ExperimentConfig:
    domain: DomainSpec = field(default_factory=DomainSpec)
    functions: Mapping[str, Any] = field(default_factory=lambda: dict(DEFAULT_FUNCTIONS))
    measures: Mapping[str, Any] = field(default_factory=lambda: dict(DEFAULT_MEASURES))
    family: FamilySpec = field(default_factory=FamilySpec)
    grids: GridSpec = field(default_factory=GridSpec)
    tolerances: ToleranceSpec = field(default_factory=ToleranceSpec)
    search: SearchSpec = field(default_factory=SearchSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    source: Optional[str] = None

    @property
    def phi(self) -> Tuple[complex, ...]:
        return tuple(parse_complex(c, f"domain.phi[{i}]") for i, c in enumerate(self.domain.phi))

    def function(self, name: str) -> AnalyticFunction:
        if name not in self.functions:
            raise ConfigError(f"functions.{name}: not defined in the configuration")
        return parse_function(self.functions[name], f"functions.{name}")

    def measure(self, name: str) -> MeasureSpec:
        if name not in self.measures:
            raise ConfigError(f"measures.{name}: not defined in the configuration")
        return parse_measure(self.measures[name], f"measures.{name}")

    def search_measures(self) -> Tuple[str, ...]:
        return self.search.measures or tuple(self.measures)

    def with_overrides(self, *, n: Optional[int] = None, out: Optional[str] = None) -> "ExperimentConfig":
        config = self
        if n is not None:
            config = replace(config, grids=replace(config.grids, n=n))
        if out is not None:
            config = replace(config, output=replace(config.output, directory=out))
        return config

    def echo(self) -> dict:
        """Plain-data view of the configuration for reports."""
        return {
            "source": self.source,
            "domain": {"phi": [list(c) if isinstance(c, (list, tuple)) else c for c in self.domain.phi],
                       "n_check": self.domain.n_check},
            "functions": dict(self.functions),
            "measures": dict(self.measures),
            "family": {f.name: getattr(self.family, f.name) for f in fields(self.family)},
            "grids": {f.name: getattr(self.grids, f.name) for f in fields(self.grids)},
            "tolerances": {f.name: getattr(self.tolerances, f.name) for f in fields(self.tolerances)},
            "search": {f.name: getattr(self.search, f.name) for f in fields(self.search)},
            "output": {f.name: getattr(self.output, f.name) for f in fields(self.output)},
        }


# ── Value parsers ────────────────────────────────────────────────────────


def parse_complex(value: Any, path: str) -> complex:
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected a number or [re, im] pair, got {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise ConfigError(f"{path}: expected a number or [re, im] pair, got {value!r}")


def _complex_list(values: Any, path: str) -> Tuple[complex, ...]:
    if not isinstance(values, (list, tuple)) or not values:
        raise ConfigError(f"{path}: expected a non-empty list of coefficients")
    return tuple(parse_complex(v, f"{path}[{i}]") for i, v in enumerate(values))


def _require_mapping(spec: Any, path: str) -> Mapping[str, Any]:
    if not isinstance(spec, Mapping):
        raise ConfigError(f"{path}: expected an object, got {type(spec).__name__}")
    return spec


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def parse_function(spec: Any, path: str) -> AnalyticFunction:
    """Turn a function spec into an AnalyticFunction, naming the failing field."""
    spec = _require_mapping(spec, path)
    kind = spec.get("kind")
    if kind == "constant":
        return constant(parse_complex(spec.get("value", 0.0), f"{path}.value"))
    if kind == "polynomial":
        return polynomial(_complex_list(spec.get("coeffs"), f"{path}.coeffs"))
    if kind == "pullback":
        return PullbackSeries(_complex_list(spec.get("coeffs"), f"{path}.coeffs"))
    if kind == "rational":
        poly = _complex_list(spec.get("poly", [0.0]), f"{path}.poly")
        raw_poles = spec.get("poles", [])
        if not isinstance(raw_poles, list):
            raise ConfigError(f"{path}.poles: expected a list")
        poles = []
        for i, item in enumerate(raw_poles):
            item_path = f"{path}.poles[{i}]"
            item = _require_mapping(item, item_path)
            order = _int(item.get("order", 1), f"{item_path}.order")
            if order < 1:
                raise ConfigError(f"{item_path}.order: must be at least 1")
            poles.append(PoleTerm(
                parse_complex(item.get("a", item.get("at")), f"{item_path}.a"),
                order,
                parse_complex(item.get("c", 1.0), f"{item_path}.c"),
            ))
        return Rational(poly, tuple(poles))
    if kind == "diffquot":
        theta = spec.get("eta_theta")
        if isinstance(theta, bool) or not isinstance(theta, (int, float)):
            raise ConfigError(f"{path}.eta_theta: expected a real boundary parameter")
        return UnboundQuotient(parse_function(spec.get("base"), f"{path}.base"), float(theta))
    raise ConfigError(f"{path}.kind: unknown function kind {kind!r}")


def parse_measure(spec: Any, path: str) -> MeasureSpec:
    spec = _require_mapping(spec, path)
    for key in spec:
        if key not in ("atoms", "density"):
            _logger.warning("Unknown measure key '%s' in %s, skipping", key, path)

    atoms = []
    raw_atoms = spec.get("atoms", [])
    if not isinstance(raw_atoms, list):
        raise ConfigError(f"{path}.atoms: expected a list")
    for i, item in enumerate(raw_atoms):
        item_path = f"{path}.atoms[{i}]"
        item = _require_mapping(item, item_path)
        theta = item.get("theta")
        if isinstance(theta, bool) or not isinstance(theta, (int, float)):
            raise ConfigError(f"{item_path}.theta: expected a real boundary parameter")
        atoms.append((float(theta), parse_complex(item.get("w", 1.0), f"{item_path}.w")))

    flavor, fn = None, None
    if "density" in spec:
        density = _require_mapping(spec["density"], f"{path}.density")
        flavor = density.get("flavor", "complex-line")
        if flavor not in FLAVORS:
            raise ConfigError(f"{path}.density.flavor: expected one of {FLAVORS}, got {flavor!r}")
        fn = parse_function(density.get("fn"), f"{path}.density.fn")
    return MeasureSpec(tuple(atoms), flavor, fn)


# ── JSON loader ──────────────────────────────────────────────────────────


def _get_nested_type(cls: type, field_name: str):
    """Return the dataclass type for a nested field, or None."""
    try:
        hints = get_type_hints(cls)
    except Exception:
        return None
    hint = hints.get(field_name)
    if hint is None:
        return None
    if get_origin(hint) is Union:
        args = [a for a in get_args(hint) if a is not type(None)]
        if len(args) == 1:
            hint = args[0]
    if isinstance(hint, type) and hasattr(hint, "__dataclass_fields__"):
        return hint
    return None


def _build(cls: type, data: Mapping[str, Any], base=None, path: str = ""):
    """Build a frozen dataclass by merging *data* over a *base* instance.

    Nested sections recurse with the base's value, lists become tuples, and
    unknown keys are logged and skipped.
    """
    if base is None:
        base = cls()
    kwargs = {}
    known = {f.name for f in fields(cls)}
    for f in fields(cls):
        if f.name not in data:
            kwargs[f.name] = getattr(base, f.name)
            continue
        val = data[f.name]
        nested_cls = _get_nested_type(cls, f.name)
        if nested_cls is not None:
            section = _require_mapping(val, f"{path}{f.name}")
            kwargs[f.name] = _build(nested_cls, section, getattr(base, f.name), f"{path}{f.name}.")
        elif isinstance(val, Mapping) and isinstance(getattr(base, f.name), Mapping):
            kwargs[f.name] = {**getattr(base, f.name), **val}
        elif isinstance(val, list):
            kwargs[f.name] = tuple(val)
        else:
            kwargs[f.name] = val
    for key in data:
        if key not in known:
            _logger.warning("Unknown config key '%s%s', skipping", path, key)
    return cls(**kwargs)


def _validate(config: ExperimentConfig) -> None:
    config.phi  # noqa: B018 - parses every coefficient
    for name in config.functions:
        config.function(name)
    for name in config.measures:
        config.measure(name)
    for name in config.search.measures:
        if name not in config.measures:
            raise ConfigError(f"search.measures: unknown measure {name!r}")
    for f in fields(config.tolerances):
        value = getattr(config.tolerances, f.name)
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
            raise ConfigError(f"tolerances.{f.name}: must be a positive number, got {value!r}")
    grids = config.grids
    for name in ("n", "n_eta", "n_zeta", "n_max", "interior_angles", "n_moments"):
        value = getattr(grids, name)
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ConfigError(f"grids.{name}: must be a positive integer, got {value!r}")
    if grids.n_zeta % grids.n_eta:
        raise ConfigError(f"grids.n_zeta: {grids.n_zeta} is not a multiple of grids.n_eta={grids.n_eta}")
    if not 0.0 < grids.pairing_r < 1.0:
        raise ConfigError(f"grids.pairing_r: must lie in (0, 1), got {grids.pairing_r}")
    _int(config.family.seed, "family.seed")


def default_experiment() -> ExperimentConfig:
    return ExperimentConfig()


def load_experiment(path: Union[str, Path]) -> ExperimentConfig:
    """Read a JSON experiment file; errors carry line/column or the field path."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read configuration ({exc.strerror})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")

    try:
        config = _build(ExperimentConfig, data)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    config = replace(config, source=str(path))
    try:
        _validate(config)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    _logger.info("Loaded experiment config from %s", path)
    return config


__all__ = [
    "ConfigError",
    "DomainSpec",
    "ExperimentConfig",
    "FamilySpec",
    "GridSpec",
    "MeasureSpec",
    "OutputSpec",
    "SearchSpec",
    "ToleranceSpec",
    "default_experiment",
    "load_experiment",
    "parse_complex",
    "parse_function",
    "parse_measure",
]

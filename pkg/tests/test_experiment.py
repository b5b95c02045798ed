import json
import logging
import math

import pytest

from csmult.analysis.functions import PullbackSeries, Rational, UnboundQuotient
from csmult.analysis.geometry import build_domain
from csmult.config import Settings
from csmult.experiment import (
    ConfigError,
    default_experiment,
    load_experiment,
    parse_complex,
    parse_function,
)


def _write(tmp_path, payload):
    path = tmp_path / "experiment.json"
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload), encoding="utf-8")
    return path


def test_defaults_describe_the_disc():
    config = default_experiment()

    assert config.phi == (1 + 0j,)
    assert config.grids.n_zeta % config.grids.n_eta == 0
    assert isinstance(config.function("f_square"), Rational)
    assert config.search_measures() == ("delta_one", "dipole", "dzeta")


def test_default_dzeta_measure_is_cauchy_line():
    mu = default_experiment().measure("dzeta").build(build_domain((1.0,)))

    # dζ/(2πi) on the circle has total variation 1
    assert mu.variation == pytest.approx(1.0, abs=1e-12)
    assert not mu.atoms


def test_file_merges_over_defaults(tmp_path):
    path = _write(tmp_path, {
        "domain": {"phi": [[1, 0], [0.2, 0]]},
        "grids": {"n_zeta": 128},
        "functions": {"f_pull": {"kind": "pullback", "coeffs": [0, 1, [0, 0.5]]}},
    })
    config = load_experiment(path)

    assert config.phi == (1 + 0j, 0.2 + 0j)
    assert config.grids.n_zeta == 128
    assert config.grids.n_eta == 32
    assert isinstance(config.function("f_pull"), PullbackSeries)
    # Default functions survive the merge
    assert "f_square" in config.functions
    assert config.source == str(path)


def test_unknown_keys_are_logged(tmp_path, caplog):
    path = _write(tmp_path, {"grids": {"n_zta": 10}, "colour": "red"})

    with caplog.at_level(logging.WARNING, logger="csmult.experiment"):
        config = load_experiment(path)

    assert config.grids.n_zeta == 64
    assert "grids.n_zta" in caplog.text
    assert "colour" in caplog.text


def test_json_syntax_error_reports_position(tmp_path):
    path = _write(tmp_path, '{\n  "grids": {"n": 12,}\n}\n')

    with pytest.raises(ConfigError, match=r":2:\d+:"):
        load_experiment(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_experiment(tmp_path / "absent.json")


def test_bad_function_kind_names_the_field(tmp_path):
    path = _write(tmp_path, {"functions": {"f_bad": {"kind": "spline"}}})

    with pytest.raises(ConfigError, match=r"functions\.f_bad\.kind"):
        load_experiment(path)


def test_bad_pole_order_names_the_field(tmp_path):
    path = _write(tmp_path, {"functions": {"f_bad": {"kind": "rational", "poles": [{"a": 2, "order": 0}]}}})

    with pytest.raises(ConfigError, match=r"functions\.f_bad\.poles\[0\]\.order"):
        load_experiment(path)


def test_grid_nesting_is_validated(tmp_path):
    path = _write(tmp_path, {"grids": {"n_eta": 32, "n_zeta": 48}})

    with pytest.raises(ConfigError, match="n_zeta"):
        load_experiment(path)


def test_unknown_search_measure(tmp_path):
    path = _write(tmp_path, {"search": {"measures": ["nope"]}})

    with pytest.raises(ConfigError, match="search.measures"):
        load_experiment(path)


def test_pole_key_accepts_legacy_spelling():
    f = parse_function({"kind": "rational", "poles": [{"at": [0, 2], "order": 2, "c": 3}]}, "f")

    assert f.poles[0].location == 2j
    assert f.poles[0].order == 2


def test_diffquot_spec():
    f = parse_function({"kind": "diffquot", "base": {"kind": "polynomial", "coeffs": [0, 0, 1]}, "eta_theta": 0.5}, "f")

    assert isinstance(f, UnboundQuotient)
    assert f.eta_theta == 0.5
    with pytest.raises(ConfigError, match=r"f\.eta_theta"):
        parse_function({"kind": "diffquot", "base": {"kind": "constant"}}, "f")


def test_parse_complex_forms():
    assert parse_complex(2, "x") == 2 + 0j
    assert parse_complex([1, -1], "x") == 1 - 1j
    with pytest.raises(ConfigError):
        parse_complex(True, "x")
    with pytest.raises(ConfigError):
        parse_complex([1, 2, 3], "x")


def test_overrides():
    config = default_experiment().with_overrides(n=512, out="/tmp/out")

    assert config.grids.n == 512
    assert config.output.directory == "/tmp/out"
    assert default_experiment().with_overrides() == default_experiment()


def test_echo_is_plain_data():
    echo = default_experiment().echo()

    assert echo["grids"]["n_eta"] == 32
    assert echo["tolerances"]["theorem"] == 1e-6
    json.dumps(echo)


def test_settings_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("CSMULT_THREADS", "3")
    monkeypatch.setenv("CSMULT_QUIET", "yes")
    monkeypatch.setenv("CSMULT_OUT_DIR", str(tmp_path))
    monkeypatch.setenv("CSMULT_N_MAX", "4096")
    settings = Settings.load()

    assert settings.threads == 3
    assert settings.quiet
    assert settings.out_dir == tmp_path.resolve()
    assert settings.n_max == 4096


def test_settings_clamp_threads(monkeypatch):
    monkeypatch.setenv("CSMULT_THREADS", "0")
    monkeypatch.setenv("CSMULT_QUIET", "maybe")

    settings = Settings.load()
    assert settings.threads == 1
    assert not settings.quiet
    assert math.isfinite(settings.n_max)

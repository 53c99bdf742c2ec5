"""Config parsing, validation, defaults, hashing."""

import json
import math

import pytest

import franson as fr
from franson.config import DEFAULTS, config_from_dict, default_config
from franson.errors import ConfigError


def test_minimal_config_uses_defaults_and_flags_the_regime():
    cfg = fr.parse_config("{}")
    assert cfg.source.delta == 1e12
    assert cfg.umzi_a.t_sl == 100e-12
    assert cfg.flags["A"]["incoherent_ensemble"]
    assert cfg.flags["B"]["incoherent_ensemble"]
    assert cfg.warnings == ()


def test_gamma_defaults_to_the_coherence_overlap():
    cfg = fr.parse_config("{}")
    expected = math.exp(-((100e-12 / 10e-9) ** 2) * math.log(2))
    assert cfg.umzi_a.gamma == pytest.approx(expected, rel=1e-12)
    override = fr.parse_config('{"umzi_a": {"gamma": 0.5}}')
    assert override.umzi_a.gamma == 0.5


def test_zero_delta_is_a_validation_error():
    with pytest.raises(ConfigError, match="delta must be > 0"):
        fr.parse_config('{"source": {"delta": 0.0}}')


def test_unknown_keys_are_rejected_by_name():
    with pytest.raises(ConfigError, match="source.bandwidth"):
        fr.parse_config('{"source": {"bandwidth": 1e12}}')
    with pytest.raises(ConfigError, match="turbo"):
        fr.parse_config('{"turbo": true}')


def test_parse_errors_carry_line_and_column():
    with pytest.raises(ConfigError, match=r"line 2, column"):
        fr.parse_config('{\n  "seed": ,\n}')


def test_unsatisfied_critical_condition_becomes_a_warning():
    cfg = fr.parse_config('{"source": {"delta": 1e10}}')  # delta * t_sl = 1
    assert any("critical UMZI condition" in w for w in cfg.warnings)


def test_mismatched_delays_warn():
    cfg = fr.parse_config('{"umzi_b": {"t_sl": 90e-12}}')
    assert any("delays differ" in w for w in cfg.warnings)


def test_seed_must_be_a_non_negative_integer():
    with pytest.raises(ConfigError, match="seed"):
        fr.parse_config('{"seed": -1}')
    with pytest.raises(ConfigError, match="seed"):
        fr.parse_config('{"seed": 1.5}')


def test_schema_version_is_checked():
    with pytest.raises(ConfigError, match="schema_version"):
        fr.parse_config('{"schema_version": "99"}')


def test_round_trip_is_lossless():
    cfg = fr.parse_config(
        '{"seed": 7, "source": {"delta": 2.5e11, "pump_linewidth": 3e9},'
        ' "umzi_a": {"t_sl": 120e-12, "phase": 0.25}, "detector": {"efficiency": 0.7}}'
    )
    again = config_from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    assert fr.config_hash(again) == fr.config_hash(cfg)


def test_config_hash_ignores_seed_but_not_physics():
    base = fr.parse_config("{}")
    reseeded = fr.parse_config('{"seed": 99}')
    assert fr.config_hash(base) == fr.config_hash(reseeded)
    detuned = fr.parse_config('{"source": {"delta": 2e12}}')
    assert fr.config_hash(base) != fr.config_hash(detuned)


def test_correlator_side_offset_follows_the_interferometer_delay():
    cfg = fr.parse_config('{"umzi_a": {"t_sl": 80e-12}, "umzi_b": {"t_sl": 80e-12}}')
    assert cfg.correlator.side_offset == 80e-12


def test_default_config_matches_defaults_table():
    cfg = default_config()
    assert cfg.to_dict()["correlator"] == DEFAULTS["correlator"]
    assert cfg.scan.pairs_per_point == 100_000


def test_scan_validation():
    with pytest.raises(ConfigError, match="n_points"):
        fr.parse_config('{"scan": {"n_points": 4}}')
    with pytest.raises(ConfigError, match="chsh_settings"):
        fr.parse_config('{"scan": {"chsh_settings": [0.0, 1.0]}}')

"""Run configuration: parsing, validation, defaults and hashing.

Configs are JSON with one object per module section.  Unknown keys are
rejected by name; every numeric invariant of the domain types is checked at
parse time and regime warnings (critical delay condition, narrowband
assumption) are collected into ``RunConfig.warnings`` for output metadata.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .correlator import CorrelatorConfig
from .detection import DetectorModel
from .errors import ConfigError
from .interferometer import UmziConfig, default_overlap, regime_flags
from .source import SpectralModel

SCHEMA_VERSION = "1"

DEFAULTS: dict = {
    "schema_version": SCHEMA_VERSION,
    "seed": 0,
    "source": {
        "f0": 3.7e14,
        "delta": 1e12,
        "pump_linewidth": 0.0,
        "tau_ind": 10e-9,
        "pair_rate": 1e6,
    },
    "umzi_a": {"t_sl": 100e-12, "phase": 0.0, "gamma": None},
    "umzi_b": {"t_sl": 100e-12, "phase": 0.0, "gamma": None},
    "detector": {"jitter": 2e-12, "efficiency": 1.0},
    "correlator": {
        "window": 10e-12,
        "bin_width": 2e-12,
        "tau_max": 200e-12,
    },
    "scan": {
        "n_points": 16,
        "pairs_per_point": 100_000,
        "chsh_settings": [0.0, math.pi / 2, -math.pi / 4, math.pi / 4],
    },
}


@dataclass(frozen=True)
class ScanConfig:
    """Experiment-runner knobs shared by all scan kinds."""

    n_points: int = 16
    pairs_per_point: int = 100_000
    chsh_settings: tuple[float, float, float, float] = (
        0.0,
        math.pi / 2,
        -math.pi / 4,
        math.pi / 4,
    )

    def validate(self) -> list[str]:
        if self.n_points < 8:
            raise ValueError(f"scan.n_points must be >= 8, got {self.n_points}")
        if self.pairs_per_point < 1:
            raise ValueError(f"scan.pairs_per_point must be >= 1, got {self.pairs_per_point}")
        if len(self.chsh_settings) != 4:
            raise ValueError("scan.chsh_settings must hold exactly 4 phases")
        return []


@dataclass(frozen=True)
class RunConfig:
    source: SpectralModel
    umzi_a: UmziConfig
    umzi_b: UmziConfig
    detector: DetectorModel
    correlator: CorrelatorConfig
    scan: ScanConfig
    seed: int = 0
    schema_version: str = SCHEMA_VERSION
    warnings: tuple[str, ...] = field(default=(), compare=False)
    flags: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "seed": self.seed,
            "source": {
                "f0": self.source.f0,
                "delta": self.source.delta,
                "pump_linewidth": self.source.pump_linewidth,
                "tau_ind": self.source.tau_ind,
                "pair_rate": self.source.pair_rate,
            },
            "umzi_a": {
                "t_sl": self.umzi_a.t_sl,
                "phase": self.umzi_a.phase,
                "gamma": self.umzi_a.gamma,
            },
            "umzi_b": {
                "t_sl": self.umzi_b.t_sl,
                "phase": self.umzi_b.phase,
                "gamma": self.umzi_b.gamma,
            },
            "detector": {
                "jitter": self.detector.jitter,
                "efficiency": self.detector.efficiency,
            },
            "correlator": {
                "window": self.correlator.window,
                "bin_width": self.correlator.bin_width,
                "tau_max": self.correlator.tau_max,
            },
            "scan": {
                "n_points": self.scan.n_points,
                "pairs_per_point": self.scan.pairs_per_point,
                "chsh_settings": list(self.scan.chsh_settings),
            },
        }


def _reject_unknown(section: str, given: dict, allowed: set[str]) -> None:
    for key in given:
        if key not in allowed:
            where = f"{section}.{key}" if section else key
            raise ConfigError(f"unknown config key: {where!r}")


def _merged(section: str, data: dict) -> dict:
    given = data.get(section, {})
    if not isinstance(given, dict):
        raise ConfigError(f"config section {section!r} must be an object")
    defaults = DEFAULTS[section]
    _reject_unknown(section, given, set(defaults))
    merged = dict(defaults)
    merged.update(given)
    return merged


def config_from_dict(data: dict) -> RunConfig:
    """Build and validate a RunConfig from a plain dict (defaults applied)."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    _reject_unknown("", data, set(DEFAULTS))

    version = data.get("schema_version", SCHEMA_VERSION)
    if str(version) != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION!r})")

    seed = data.get("seed", DEFAULTS["seed"])
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")

    try:
        src = SpectralModel(**_merged("source", data))
        det = DetectorModel(**_merged("detector", data))
        cor = CorrelatorConfig(**_merged("correlator", data), side_offset=0.0)
        scan_kwargs = _merged("scan", data)
        scan_kwargs["chsh_settings"] = tuple(scan_kwargs["chsh_settings"])
        scan = ScanConfig(**scan_kwargs)

        umzis = {}
        for section, party in (("umzi_a", "A"), ("umzi_b", "B")):
            kwargs = _merged(section, data)
            if kwargs["gamma"] is None:
                kwargs["gamma"] = default_overlap(kwargs["t_sl"], src.tau_ind)
            umzis[party] = UmziConfig(party=party, **kwargs)

        cor = replace(cor, side_offset=umzis["A"].t_sl)

        warnings: list[str] = []
        warnings += src.validate()
        warnings += det.validate()
        warnings += cor.validate()
        warnings += scan.validate()
        warnings += umzis["A"].validate()
        warnings += umzis["B"].validate()
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    flags = {
        "A": regime_flags(umzis["A"], src),
        "B": regime_flags(umzis["B"], src),
    }
    for party, f in flags.items():
        if not f["incoherent_ensemble"]:
            warnings.append(
                f"critical UMZI condition not satisfied at party {party}: "
                f"delta * t_sl = {src.delta * umzis[party].t_sl:g} <= 10 "
                "(local intensities will not be uniform)"
            )
        if not f["individually_coherent"]:
            warnings.append(
                f"critical UMZI condition not satisfied at party {party}: "
                f"t_sl = {umzis[party].t_sl:g} s is not small against the "
                f"individual coherence time {src.tau_ind:g} s"
            )
    if umzis["A"].t_sl != umzis["B"].t_sl:
        warnings.append(
            "interferometer delays differ between parties; the joint fringe "
            "is no longer detuning-immune"
        )

    return RunConfig(
        source=src,
        umzi_a=umzis["A"],
        umzi_b=umzis["B"],
        detector=det,
        correlator=cor,
        scan=scan,
        seed=seed,
        schema_version=SCHEMA_VERSION,
        warnings=tuple(warnings),
        flags=flags,
    )


def parse_config(text: str) -> RunConfig:
    """Parse JSON config text; errors carry line/column or the failing key."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(data)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def default_config() -> RunConfig:
    return config_from_dict({})


def config_hash(cfg: RunConfig) -> str:
    """Stable hash of the resolved configuration (seed excluded, so replays
    with an overridden seed remain traceable to the same physics)."""
    payload = cfg.to_dict()
    payload.pop("seed")
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

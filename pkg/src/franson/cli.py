"""Command-line interface.

Every subcommand reads a JSON run config, runs one experiment and writes its
data products (CSV plus a JSON summary) into the output directory.  Data
products are byte-identical for identical (config, seed); volatile run
information (wall time, timestamp) goes to a separate ``*.meta.json`` file so
it never breaks the determinism contract.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from . import rng as rng_mod
from .config import RunConfig, config_hash, load_config
from .correlator import correlate, peak_counts, write_histogram_csv
from .detection import read_timetags, simulate_tags, write_timetags
from .experiment import (
    run_chsh,
    run_crossover_sweep,
    run_fringe_scan,
    run_local_scan,
    run_pump_sweep,
    run_tau_decay,
)
from .source import sample_pairs


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _write_meta(out: Path, name: str, cfg_hash: str, seed: int, t_start: float) -> None:
    _write_json(
        out / f"{name}.meta.json",
        {
            "command": name,
            "version": __version__,
            "seed": seed,
            "config_hash": cfg_hash,
            "wall_time_s": time.monotonic() - t_start,
            "created_utc": datetime.now(timezone.utc).isoformat(),
        },
    )


def _emit_scan(result, out: Path, name: str) -> None:
    (out / f"{name}.csv").write_text(result.to_csv_text(), encoding="utf-8")
    _write_json(out / f"{name}.json", result.to_summary_dict())


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    for w in cfg.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return cfg


def _cmd_fringe_scan(args) -> None:
    cfg = _load(args)
    result = run_fringe_scan(cfg, mode=args.mode)
    _emit_scan(result, args.out, "fringe-scan")


def _cmd_local_scan(args) -> None:
    cfg = _load(args)
    result = run_local_scan(cfg)
    _emit_scan(result, args.out, "local-scan")


def _cmd_crossover(args) -> None:
    cfg = _load(args)
    result = run_crossover_sweep(cfg)
    _emit_scan(result, args.out, "crossover")


def _cmd_tau_decay(args) -> None:
    cfg = _load(args)
    result = run_tau_decay(cfg, mode=args.mode)
    _emit_scan(result, args.out, "tau-decay")


def _cmd_chsh(args) -> None:
    cfg = _load(args)
    result = run_chsh(cfg, mode=args.mode)
    _write_json(args.out / "chsh.json", result.to_summary_dict())


def _cmd_timetags(args) -> None:
    cfg = _load(args)
    pairs = sample_pairs(
        cfg.source, args.pairs or cfg.scan.pairs_per_point, cfg.seed, stream=rng_mod.KIND_TIMETAGS
    )
    tags_a, tags_b = simulate_tags(
        pairs, cfg.umzi_a, cfg.umzi_b, cfg.detector, cfg.seed, stream=rng_mod.KIND_TIMETAGS
    )
    write_timetags(args.out / "timetags.dat", tags_a, tags_b, cfg.seed, config_hash(cfg))


def _cmd_correlate(args) -> None:
    cfg = _load(args)
    tags_a, tags_b, header = read_timetags(args.input)
    cfg_hash = config_hash(cfg)
    if header.get("config_hash") not in (None, cfg_hash):
        print(
            f"warning: dump was produced under config {header['config_hash']}, "
            f"correlating under {cfg_hash}",
            file=sys.stderr,
        )
    hist = correlate(tags_a, tags_b, cfg.correlator)
    for w in hist.warnings:
        print(f"warning: {w}", file=sys.stderr)
    write_histogram_csv(hist, args.out / "histogram.csv", cfg.seed, cfg_hash)
    peaks = peak_counts(hist)
    _write_json(
        args.out / "correlate.json",
        {
            "kind": "correlate",
            "seed": cfg.seed,
            "config_hash": cfg_hash,
            "n_matches": hist.n_matches,
            "central": peaks.central.tolist(),
            "side_plus": peaks.side_plus.tolist(),
            "side_minus": peaks.side_minus.tolist(),
            "central_fraction": peaks.central_fraction,
            "overlap_warning": hist.overlap_warning,
            "warnings": list(hist.warnings),
        },
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="franson",
        description=(
            "Two-photon interferometry simulator: paired unbalanced "
            "Mach-Zehnder interferometers, time-tag generation and "
            "coincidence correlation."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, mode_choice=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, type=Path, help="run config JSON path")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        if mode_choice:
            p.add_argument(
                "--mode", choices=["analytic", "montecarlo"], default="montecarlo"
            )
        p.set_defaults(func=func)
        return p

    add("fringe-scan", _cmd_fringe_scan, "nonlocal fringe vs joint phase", mode_choice=True)
    add("local-scan", _cmd_local_scan, "local intensities and nonlocal fringe vs phase")
    add("crossover", _cmd_crossover, "local visibility vs delta * t_sl")
    add("tau-decay", _cmd_tau_decay, "nonlocal visibility vs coincidence offset", mode_choice=True)
    add("chsh", _cmd_chsh, "four-setting CHSH sum", mode_choice=True)
    p_tags = add("timetags", _cmd_timetags, "dump raw time-tag streams")
    p_tags.add_argument("--pairs", type=int, default=None, help="number of pairs to emit")
    p_corr = add("correlate", _cmd_correlate, "histogram a time-tag dump")
    p_corr.add_argument("--input", required=True, type=Path, help="time-tag dump path")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t_start = time.monotonic()
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        args.func(args)
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else cfg.seed
        _write_meta(args.out, args.command, config_hash(cfg), seed, t_start)
    except Exception as exc:  # one-line diagnostic, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

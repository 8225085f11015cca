"""Batch command-line entry point.

Dispatches the experiment families, resolves configuration (defaults <-
config file <- flags), and writes one CSV per invocation. The first line of
every CSV is a `#` comment recording the timestamp, worker count, and the
fully resolved configuration; everything below it is reproducible
byte-for-byte from (config, seed) alone.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields, replace
from datetime import datetime, timezone

import numpy as np

from .asymptotics import write_floor_csv
from .config import (ConfigError, SystemConfig, config_from_mapping,
                     load_config_file, validate_config)
from .geometry import build_layout, placement_to_csv
from .gramstats import estimate_gram_moments, write_gram_csv
from .harness import floor_table, run_scenario, write_ber_csv

EXPERIMENTS = (
    "single-cell-perfect",
    "multicell-perfect",
    "multicell-noisy-csi",
    "multicell-contaminated",
    "gram-moments",
    "asymptotic-floor",
)

_BER_EXPERIMENTS = {
    # experiment -> (forced csi_mode, single_cell)
    "single-cell-perfect": ("Perfect", True),
    "multicell-perfect": ("Perfect", False),
    "multicell-noisy-csi": ("NoisyNoContamination", False),
    "multicell-contaminated": ("Contaminated", False),
}

_SEED_MASK = (1 << 64) - 1
_GRAM_DOMAIN = 0x6A
_PLACE_DOMAIN = 0x9C


def _expand_progression(a: int, b: int, end: int) -> list[int]:
    # geometric continuation preferred (sweeps are log-spaced), else arithmetic
    if 0 < a < b and b % a == 0 and b // a >= 2:
        r = b // a
        vals = []
        v = b * r
        while v < end:
            vals.append(v)
            v *= r
        if v == end:
            return vals + [end]
    step = b - a
    if step > 0 and end > b and (end - b) % step == 0:
        return list(range(b + step, end + 1, step))
    raise ConfigError(f"cannot continue the progression {a},{b},...,{end}")


def parse_sweep(text: str) -> list[int]:
    """Comma-separated antenna counts; 'a,b,...,c' continues the progression
    of a,b (doubling-style geometric if it lands on c exactly, else the
    arithmetic step) up to c."""
    tokens = [t.strip() for t in str(text).split(",") if t.strip()]
    out: list[int] = []
    i = 0
    while i < len(tokens):
        if tokens[i] == "...":
            if len(out) < 2 or i + 1 >= len(tokens):
                raise ConfigError("'...' needs two values before it and one after")
            try:
                end = int(tokens[i + 1])
            except ValueError:
                raise ConfigError(f"bad sweep value {tokens[i + 1]!r}")
            out.extend(_expand_progression(out[-2], out[-1], end))
            i += 2
        else:
            try:
                out.append(int(tokens[i]))
            except ValueError:
                raise ConfigError(f"bad sweep value {tokens[i]!r}")
            i += 1
    return out


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mcmimo",
        description="Multi-cell massive-MIMO downlink Monte-Carlo simulator")
    p.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    p.add_argument("--scenario", choices=("n-equals-k", "k-fixed"),
                   default="k-fixed", help="sweep mode for BER experiments")
    p.add_argument("--precoder", choices=("mf", "zf", "rzf", "mmse", "all"),
                   default=None,
                   help="technique(s); default: the config's precoder_kind")
    p.add_argument("--sweep", default=None,
                   help="antenna counts, e.g. '4,8,16' or '4,8,...,512'")
    p.add_argument("--seed", type=int, default=None, help="master RNG seed")
    p.add_argument("--drops", type=int, default=None,
                   help="Monte-Carlo drops per point")
    p.add_argument("--frames", type=int, default=None,
                   help="fading blocks per drop")
    p.add_argument("--min-errors", type=int, default=None,
                   help="bit-error target per point (0 disables extension)")
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--workers", type=int, default=1,
                   help="parallel processes for the drop loop")
    p.add_argument("--N", type=int, default=None, help="BS antennas")
    p.add_argument("--K", type=int, default=None, help="users per cell")
    p.add_argument("--trials", type=int, default=10000,
                   help="gram-moments trials per N")
    p.add_argument("--cells", type=int, default=None, help="number of cells")
    p.add_argument("--modulation", type=int, default=None, help="QAM order M")
    p.add_argument("--snr-dl", type=float, default=None, help="downlink SNR (dB)")
    p.add_argument("--snr-ul", type=float, default=None, help="uplink SNR (dB)")
    p.add_argument("--radius", type=float, default=None, help="cell radius (m)")
    p.add_argument("--exclusion", type=float, default=None,
                   help="BS exclusion radius (m)")
    p.add_argument("--pathloss", type=float, default=None,
                   help="path-loss exponent")
    p.add_argument("--shadowing", type=float, default=None,
                   help="shadowing sigma (dB)")
    p.add_argument("--zeta", default=None, help="RZF ridge: number or 'auto'")
    p.add_argument("--dump-placement", default=None, metavar="PATH",
                   help="also write one placement realization to PATH")
    return p


def _flag_overrides(args: argparse.Namespace) -> dict:
    pairs = {
        "seed": ("rng_seed", int),
        "drops": ("num_drops", int),
        "frames": ("frames_per_drop", int),
        "min_errors": ("min_bit_errors", int),
        "N": ("bs_antennas", int),
        "K": ("users_per_cell", int),
        "cells": ("num_cells", int),
        "modulation": ("modulation_order", int),
        "snr_dl": ("snr_dl_db", float),
        "snr_ul": ("snr_ul_db", float),
        "radius": ("cell_radius_m", float),
        "exclusion": ("exclusion_radius_m", float),
        "pathloss": ("pathloss_exponent", float),
        "shadowing": ("shadowing_sigma_db", float),
    }
    out = {}
    for flag, (key, conv) in pairs.items():
        val = getattr(args, flag)
        if val is not None:
            out[key] = conv(val)
    if args.zeta is not None:
        out["rzf_zeta"] = args.zeta if str(args.zeta).lower() == "auto" \
            else float(args.zeta)
    if args.precoder is not None and args.precoder != "all":
        out["precoder_kind"] = args.precoder.upper()
    return out


def _resolve_config(args: argparse.Namespace) -> SystemConfig:
    mapping = {}
    if args.config:
        mapping.update(load_config_file(args.config))
    mapping.update(_flag_overrides(args))

    experiment = args.experiment
    if experiment in _BER_EXPERIMENTS:
        csi, single = _BER_EXPERIMENTS[experiment]
        mapping["csi_mode"] = csi
        cells = mapping.get("num_cells")
        if single:
            if cells is not None and cells != 1:
                raise ConfigError(
                    f"{experiment} is single-cell; drop --cells {cells}")
            mapping["num_cells"] = 1
        elif cells is not None and cells < 2:
            raise ConfigError(f"{experiment} needs at least 2 cells, got {cells}")
    return config_from_mapping(mapping)


def _config_summary(cfg: SystemConfig) -> str:
    return " ".join(f"{f.name}={getattr(cfg, f.name)}" for f in fields(cfg))


def _header(experiment: str, cfg: SystemConfig, workers: int) -> str:
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return f"mcmimo {experiment} | {stamp} | workers={workers} | {_config_summary(cfg)}"


def _techniques(args: argparse.Namespace, cfg: SystemConfig) -> list[str]:
    if args.precoder == "all":
        return ["MF", "ZF", "RZF", "MMSE"]
    if args.precoder is not None:
        return [args.precoder.upper()]
    return [cfg.precoder_kind]


def parse_and_run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        header = _header(args.experiment, cfg, args.workers)

        if args.dump_placement:
            gen = np.random.default_rng(np.random.SeedSequence(
                (cfg.rng_seed & _SEED_MASK, _PLACE_DOMAIN)))
            placement_to_csv(build_layout(cfg, gen), args.dump_placement)

        if args.experiment in _BER_EXPERIMENTS:
            sweep = parse_sweep(args.sweep) if args.sweep else [cfg.bs_antennas]
            points = run_scenario(cfg, args.scenario, sweep,
                                  techniques=_techniques(args, cfg),
                                  workers=args.workers)
            write_ber_csv(args.out, points, args.scenario, cfg,
                          header_comment=header)
        elif args.experiment == "gram-moments":
            sweep = parse_sweep(args.sweep) if args.sweep else [cfg.bs_antennas]
            if args.trials < 1:
                raise ConfigError(f"--trials must be >= 1, got {args.trials}")
            stats = []
            for n_antennas in sweep:
                gen = np.random.default_rng(np.random.SeedSequence(
                    (cfg.rng_seed & _SEED_MASK, _GRAM_DOMAIN, n_antennas,
                     cfg.users_per_cell)))
                stats.append(estimate_gram_moments(
                    n_antennas, cfg.users_per_cell, args.trials, gen))
            write_gram_csv(args.out, stats, header_comment=header)
        elif args.experiment == "asymptotic-floor":
            if cfg.num_cells < 2:
                raise ConfigError("asymptotic-floor needs at least 2 cells")
            rows = floor_table(cfg)
            write_floor_csv(args.out, rows, header_comment=header)
        else:  # unreachable: argparse restricts choices
            raise ConfigError(f"unknown experiment {args.experiment!r}")
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


main = parse_and_run

if __name__ == "__main__":
    sys.exit(parse_and_run())

#!/usr/bin/env python3
"""Render figures from the simulator's CSV output.

Two figure kinds: BER-vs-antennas sweeps (two panels, one per sweep
scenario, log BER axis, one line per precoding technique, optional dashed
floor references) and Gram-moment scaling (log-log variance and off-diagonal
energy against the 1/N reference). This module only reads, groups, and
draws; every number comes from the input files, which are never modified.

Usage: render.py --kind {ber,gram} --in CSV [CSV ...] [--floor CSV] --out PNG
"""
from __future__ import annotations

import argparse
import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

BER_COLUMNS = ("technique", "scenario", "csi_mode", "N", "K", "snr_dl_db",
               "bits", "bit_errors", "ber", "drops", "seed")
GRAM_COLUMNS = ("N", "statistic", "empirical", "closed_form", "ci3sigma")
FLOOR_COLUMNS = ("cell", "user", "sinr_asymptotic", "sinr_simplified",
                 "ber_floor")

TECHNIQUE_ORDER = ("MF", "ZF", "RZF", "MMSE")
TECHNIQUE_STYLE = {
    "MF": ("tab:blue", "o"),
    "ZF": ("tab:orange", "s"),
    "RZF": ("tab:green", "^"),
    "MMSE": ("tab:red", "D"),
}
PANELS = (("NEqualsK", "a) users scale with antennas (N = K)"),
          ("KFixed", "b) users fixed"))

FIGSIZE = (12.0, 8.0)  # inches at DPI=100 -> fixed 1200 x 800 PNG
DPI = 100


class SchemaError(ValueError):
    """Input CSV lacks a required column (or any header at all)."""


class EmptyData(ValueError):
    """Input CSV parsed fine but holds no data rows."""


def read_rows(path, required) -> list[dict]:
    """DictReader over `path`, skipping '#' comment lines, schema-checked."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(ln for ln in fh if not ln.startswith("#"))
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: no header row")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing columns {', '.join(missing)}")
        return list(reader)


def _technique_series(rows):
    """{technique: (N array, BER array)} sorted by N, stable label order."""
    grouped: dict[str, list[tuple[int, float]]] = defaultdict(list)
    for row in rows:
        grouped[row["technique"]].append((int(row["N"]), float(row["ber"])))
    names = [t for t in TECHNIQUE_ORDER if t in grouped]
    names += sorted(set(grouped) - set(TECHNIQUE_ORDER))
    out = {}
    for name in names:
        pts = sorted(grouped[name])
        out[name] = (np.array([p[0] for p in pts]),
                     np.array([p[1] for p in pts]))
    return out


def _floor_levels(floor_csv) -> dict[int, float]:
    """Per-cell mean BER floor from an asymptotic-floor CSV."""
    rows = read_rows(floor_csv, FLOOR_COLUMNS)
    acc: dict[int, list[float]] = defaultdict(list)
    for row in rows:
        acc[int(row["cell"])].append(float(row["ber_floor"]))
    return {cell: float(np.mean(vals)) for cell, vals in sorted(acc.items())}


def render_ber_figure(csv_paths, out_image, floor_csv=None) -> None:
    """Two-panel BER figure from one or more harness CSVs.

    Left panel takes the NEqualsK rows, right panel the KFixed rows; x is
    the antenna count, y is BER on a log axis, one line per technique.
    Zero-BER points cannot sit on a log axis and are left out. When
    `floor_csv` is given, per-cell limiting floors appear as dashed
    horizontal lines on both panels.
    """
    if isinstance(csv_paths, (str, bytes)) or hasattr(csv_paths, "__fspath__"):
        csv_paths = [csv_paths]
    rows = []
    for path in csv_paths:
        rows.extend(read_rows(path, BER_COLUMNS))
    if not rows:
        raise EmptyData(f"no data rows in {', '.join(str(p) for p in csv_paths)}")
    floors = _floor_levels(floor_csv) if floor_csv is not None else {}

    fig, axes = plt.subplots(1, 2, figsize=FIGSIZE)
    for ax, (scenario, title) in zip(axes, PANELS):
        panel = [r for r in rows if r["scenario"] == scenario]
        for name, (n, ber) in _technique_series(panel).items():
            keep = ber > 0
            color, marker = TECHNIQUE_STYLE.get(name, ("tab:gray", "x"))
            ax.semilogy(n[keep], ber[keep], color=color, marker=marker,
                        label=name)
        for i, (cell, level) in enumerate(floors.items()):
            if level > 0:
                ax.axhline(level, color="black", linestyle="--", linewidth=1,
                           alpha=0.6,
                           label="limiting floor" if i == 0 else None)
        ax.set_title(title)
        ax.set_xlabel("N = K" if scenario == "NEqualsK" else "BS antennas N")
        ax.set_ylabel("BER")
        ax.grid(True, which="both", alpha=0.3)
        if panel or floors:
            ax.legend()
        else:
            ax.text(0.5, 0.5, f"no {scenario} rows", ha="center", va="center",
                    transform=ax.transAxes, color="gray")
    fig.tight_layout()
    fig.savefig(out_image, dpi=DPI)
    plt.close(fig)


def render_gram_figure(csv_path, out_image) -> None:
    """Log-log Gram-moment scaling figure from a gram-moments CSV.

    Plots empirical var(q_ii) and E[|q_ij|^2] against N with 3-sigma
    whiskers, plus the 1/N reference line over the file's N range. Rows
    with a blank `empirical` cell contribute only to the reference span,
    so a closed-form-only file yields just the reference line.
    """
    rows = read_rows(csv_path, GRAM_COLUMNS)
    wanted = {"var_diag": ("var(q_ii)", "tab:blue", "o"),
              "mean_offdiag_sqmag": ("E[|q_ij|^2]", "tab:orange", "s")}

    fig, ax = plt.subplots(figsize=FIGSIZE)
    span: list[int] = []
    series: dict[str, list[tuple[int, float, float]]] = defaultdict(list)
    for row in rows:
        if row["statistic"] not in wanted:
            continue
        n = int(row["N"])
        span.append(n)
        if row["empirical"].strip():
            ci = float(row["ci3sigma"]) if row["ci3sigma"].strip() else 0.0
            series[row["statistic"]].append((n, float(row["empirical"]), ci))
    for stat, pts in series.items():
        label, color, marker = wanted[stat]
        pts.sort()
        n = np.array([p[0] for p in pts])
        emp = np.array([p[1] for p in pts])
        ci = np.array([p[2] for p in pts])
        ax.errorbar(n, emp, yerr=ci, color=color, marker=marker, label=label,
                    capsize=3)
    if span:
        grid = np.geomspace(min(span), max(span), 64)
        ax.plot(grid, 1.0 / grid, color="black", linestyle="--", linewidth=1,
                label="1/N")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("BS antennas N")
    ax.set_ylabel("Gram-entry moment")
    ax.grid(True, which="both", alpha=0.3)
    if span:
        ax.legend()
    fig.tight_layout()
    fig.savefig(out_image, dpi=DPI)
    plt.close(fig)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render", description="Render figures from simulator CSV files")
    parser.add_argument("--kind", required=True, choices=("ber", "gram"))
    parser.add_argument("--in", dest="inputs", required=True, nargs="+",
                        metavar="CSV", help="input CSV path(s)")
    parser.add_argument("--floor", metavar="CSV",
                        help="asymptotic-floor CSV for dashed references "
                             "(ber only)")
    parser.add_argument("--out", required=True, metavar="PNG",
                        help="output image path")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.kind == "gram":
        if args.floor:
            parser.error("--floor only applies to --kind ber")
        if len(args.inputs) != 1:
            parser.error("--kind gram takes exactly one --in path")
    try:
        if args.kind == "ber":
            render_ber_figure(args.inputs, args.out, floor_csv=args.floor)
        else:
            render_gram_figure(args.inputs[0], args.out)
    except (SchemaError, EmptyData, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

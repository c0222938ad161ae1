"""Render simulator CSV results as publication-style figures.

Two figure kinds, both reading the documented CSV schemas and never
recomputing any rate: `cdf` overlays the raw (dashed) and P-scaled (solid)
empirical CDF curves per subpacketization; `bars` draws grouped
rate-improvement bars, one group per SNR point, one bar per P.

Rendering is deterministic: fixed series ordering, fixed style, salted SVG
ids and no embedded timestamps, so re-running reproduces identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

CDF_COLUMNS = ("gamma", "P", "statistic", "x", "F")
BARS_COLUMNS = ("gamma", "P", "snr_db", "baseline_P", "improvement_pct")

EXIT_OK = 0
EXIT_SCHEMA = 2


class SchemaError(ValueError):
    """CSV does not match the documented column layout."""


@dataclass
class FigureSpec:
    kind: str               # cdf | bars
    csv_path: str
    out_path: str
    gamma: str = ""         # empty: render every structure, one figure each


def _style():
    plt.rcParams.update({
        "svg.hashsalt": "ccbeam-plots",
        "font.size": 9,
        "axes.labelsize": 10,
        "legend.fontsize": 8,
        "figure.figsize": (5.2, 3.4),
        "axes.grid": True,
        "grid.alpha": 0.3,
        "grid.linestyle": "--",
        "lines.linewidth": 1.2,
    })


def _read_rows(path: str, required) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        missing = [c for c in required if c not in fields]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}; found {fields}")
        return list(reader)


def _gamma_order(rows):
    seen = []
    for row in rows:
        if row["gamma"] not in seen:
            seen.append(row["gamma"])
    return seen


def _shade(i: int, n: int) -> str:
    # darkest for the smallest P, readable down to light gray
    level = 0.0 if n == 1 else 0.75 * i / (n - 1)
    return str(level)


def _save(fig, path: str):
    fig.savefig(path, metadata={"Date": None} if path.endswith(".svg") else None)
    plt.close(fig)


def _render_cdf(rows, gamma: str, out_path: str):
    rows = [r for r in rows if r["gamma"] == gamma]
    p_values = sorted({int(r["P"]) for r in rows})
    fig, ax = plt.subplots()
    for i, P in enumerate(p_values):
        color = _shade(i, len(p_values))
        for statistic, dashed, label in (("raw", True, f"P = {P}"),
                                         ("p_scaled", False, f"P = {P} (xP)")):
            pts = [(float(r["x"]), float(r["F"])) for r in rows
                   if int(r["P"]) == P and r["statistic"] == statistic]
            if not pts:
                continue
            pts.sort()
            xs = [p[0] for p in pts]
            fs = [p[1] for p in pts]
            ax.plot(xs, fs, linestyle="--" if dashed else "-", color=color,
                    label=label)
    ax.set_xlabel("max-min value [W]")
    ax.set_ylabel("CDF F(x)")
    ax.set_ylim(0.0, 1.05)
    ax.set_title(f"Empirical CDF, {gamma}")
    ax.legend(loc="lower right")
    fig.tight_layout()
    _save(fig, out_path)


def _render_bars(rows, gamma: str, out_path: str):
    rows = [r for r in rows if r["gamma"] == gamma]
    baselines = {int(r["baseline_P"]) for r in rows}
    p_values = sorted({int(r["P"]) for r in rows} - baselines)
    snrs = sorted({float(r["snr_db"]) for r in rows})
    table = {(int(r["P"]), float(r["snr_db"])): float(r["improvement_pct"])
             for r in rows}
    fig, ax = plt.subplots()
    width = 0.8 / max(len(p_values), 1)
    for i, P in enumerate(p_values):
        xs = [j + (i - (len(p_values) - 1) / 2.0) * width for j in range(len(snrs))]
        ys = [table.get((P, snr), 0.0) for snr in snrs]
        ax.bar(xs, ys, width=width, color=_shade(i, len(p_values)),
               edgecolor="black", linewidth=0.5, label=f"P = {P}")
    ax.set_xticks(range(len(snrs)))
    ax.set_xticklabels([f"{snr:g}" for snr in snrs])
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel("Rate improvement [%]")
    baseline = min(baselines) if baselines else "?"
    ax.set_title(f"Rate improvement over P={baseline}, {gamma}")
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.legend(loc="best")
    fig.tight_layout()
    _save(fig, out_path)


def _multi_gamma_path(out_path: str, gamma: str) -> str:
    root, ext = os.path.splitext(out_path)
    return f"{root}_{gamma}{ext}"


def render(spec: FigureSpec) -> list:
    """Render one figure (or one per structure) and return the paths written."""
    _style()
    if spec.kind == "cdf":
        rows = _read_rows(spec.csv_path, CDF_COLUMNS)
        draw = _render_cdf
    elif spec.kind == "bars":
        rows = _read_rows(spec.csv_path, BARS_COLUMNS)
        draw = _render_bars
    else:
        raise ValueError(f"unknown figure kind {spec.kind!r}")
    gammas = [spec.gamma] if spec.gamma else _gamma_order(rows)
    if not gammas:
        raise SchemaError(f"{spec.csv_path}: no data rows")
    written = []
    for gamma in gammas:
        path = (spec.out_path if len(gammas) == 1
                else _multi_gamma_path(spec.out_path, gamma))
        draw(rows, gamma, path)
        written.append(path)
    return written


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="ccbeam-render",
                                 description="Render ccbeam CSVs as figures")
    ap.add_argument("--kind", required=True, choices=["cdf", "bars"])
    ap.add_argument("--in", dest="csv_path", required=True, help="input CSV")
    ap.add_argument("--out", required=True, help="output image (svg recommended)")
    ap.add_argument("--gamma", default="", help="EP, PL or BF; empty for all")
    args = ap.parse_args(argv)
    spec = FigureSpec(kind=args.kind, csv_path=args.csv_path,
                      out_path=args.out, gamma=args.gamma)
    try:
        written = render(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: scenario selection, experiment execution, CSV emission.

Exit codes: 0 success, 1 validation failures, 2 invalid config/usage,
3 numerical failure rate above 1% of trials.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .placement import (
    PlacementError,
    PlacementMatrix,
    decode_check,
    mac_size,
    n_of_v,
    standard_placements,
)
from .montecarlo import (
    ExperimentConfig,
    cdf_series_from_rows,
    rate_improvement,
    run_experiment,
    write_cdf_csv,
    write_improvement_csv,
    write_samples_csv,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_BAD_CONFIG = 2
EXIT_NUMERICAL = 3
MAX_FAILURE_RATE = 0.01


@dataclass
class ScenarioSpec:
    """A named preset or a custom config, plus command-line overrides."""

    name: str
    config_path: str = None
    out_dir: str = "."
    overrides: dict = field(default_factory=dict)


# Preset parameters for the two bundled experiments: grouped rate-improvement
# bars over a 6-user t=2 network, and max-min CDFs over a 6-user t=3 network.
SCENARIOS = {
    "bars-fig1to3": dict(k=6, t=2, placements=[3, 6, 9, 12, 15],
                         snr_db=[0.0, 4.0, 8.0, 12.0, 16.0, 20.0],
                         trials=500, mode="exact", gammas=["EP", "PL", "BF"],
                         bf_restarts=8, baseline_p=3, repeated_supports=False),
    "cdf-fig4to6": dict(k=6, t=3, placements=[2, 8, 20], snr_db=[0.0],
                        trials=1000, mode="lowsnr", gammas=["EP", "PL", "BF"],
                        bf_restarts=8, baseline_p=2, repeated_supports=True),
}


class ConfigError(ValueError):
    pass


def parse_config_file(path: str) -> dict:
    """key=value config; '#' starts a comment.  Keys match the scenario dict."""
    raw = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            raw[key.lower()] = value
    out = {}
    try:
        for key in ("k", "t", "trials", "seed", "bf_restarts", "workers", "baseline_p"):
            if key in raw:
                out[key] = int(raw[key])
        if "n0" in raw:
            out["n0"] = float(raw["n0"])
        if "mode" in raw:
            out["mode"] = raw["mode"].lower()
        if "repeated_supports" in raw:
            out["repeated_supports"] = raw["repeated_supports"].lower() in ("1", "true", "yes")
        if "snr_db" in raw:
            out["snr_db"] = [float(s) for s in raw["snr_db"].split(",") if s.strip()]
        if "gammas" in raw:
            out["gammas"] = [s.strip().upper() for s in raw["gammas"].split(",") if s.strip()]
        if "placements" in raw:
            vals = [s.strip() for s in raw["placements"].split(",") if s.strip()]
            out["placements"] = [int(v) if v.isdigit() else v for v in vals]
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    unknown = set(raw) - {"k", "t", "trials", "seed", "bf_restarts", "workers", "baseline_p",
                          "n0", "mode", "snr_db", "gammas", "placements", "repeated_supports"}
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    return out


def _resolve_placements(params) -> tuple:
    """Turn P values / file paths into (label, PlacementMatrix) pairs."""
    entries = params["placements"]
    p_values = [e for e in entries if isinstance(e, int)]
    out = []
    if p_values:
        out += standard_placements(params["k"], params["t"], p_values,
                                   params.get("repeated_supports", False))
    for e in entries:
        if isinstance(e, str):
            with open(e) as fh:
                V = PlacementMatrix.from_text(fh.read())
            out.append((f"P{V.P}", V))
    return tuple(out)


def build_experiment(spec: ScenarioSpec) -> tuple:
    """(ExperimentConfig, resolved-params) for a scenario spec."""
    if spec.name in SCENARIOS:
        params = dict(SCENARIOS[spec.name])
    elif spec.name == "custom":
        if not spec.config_path:
            raise ConfigError("custom scenario requires --config")
        params = {}
    else:
        raise ConfigError(f"unknown scenario {spec.name!r}; "
                          f"choose from {sorted(SCENARIOS)} or 'custom'")
    if spec.config_path:
        params.update(parse_config_file(spec.config_path))
    params.update({k: v for k, v in spec.overrides.items() if v is not None})
    params.setdefault("seed", int(os.environ.get("CCBEAM_SEED", "0")))
    params.setdefault("workers", 1)
    params.setdefault("n0", 1.0)
    params.setdefault("mode", "lowsnr")
    params.setdefault("gammas", ["EP", "PL", "BF"])
    params.setdefault("trials", 1000)
    params.setdefault("bf_restarts", 3)
    for key in ("k", "t", "placements", "snr_db"):
        if key not in params:
            raise ConfigError(f"missing required config key {key!r}")

    placements = _resolve_placements(params)
    if not placements:
        raise ConfigError("no placements resolved")
    params.setdefault("baseline_p", min(V.P for _, V in placements))
    ec = ExperimentConfig(
        K=params["k"], t=params["t"], placements=placements,
        gammas=tuple(params["gammas"]), snr_db_grid=tuple(params["snr_db"]),
        trials=params["trials"], seed=params["seed"], mode=params["mode"],
        bf_restarts=params["bf_restarts"], workers=params["workers"], N0=params["n0"])
    return ec, params


def run_scenario(spec: ScenarioSpec) -> int:
    try:
        ec, params = build_experiment(spec)
    except (ConfigError, PlacementError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG

    os.makedirs(spec.out_dir, exist_ok=True)
    t0 = time.perf_counter()
    result = run_experiment(ec)
    wall = time.perf_counter() - t0

    write_samples_csv(result.rows, os.path.join(spec.out_dir, "samples.csv"))
    write_cdf_csv(cdf_series_from_rows(result.rows), os.path.join(spec.out_dir, "cdf.csv"))
    write_improvement_csv(rate_improvement(result.rows, params["baseline_p"]),
                          os.path.join(spec.out_dir, "improvement.csv"))

    manifest = {
        "scenario": spec.name,
        "config": {k: v for k, v in sorted(params.items()) if k != "placements"},
        "placements": [{"label": label, "text": V.to_text()} for label, V in ec.placements],
        "seed": ec.seed,
        "trials": ec.trials,
        "resampled_trials": result.resampled_trials,
        "rows": len(result.rows),
        "wall_time_s": round(wall, 3),
        "versions": {
            "ccbeam": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
        },
        "outputs": ["samples.csv", "cdf.csv", "improvement.csv"],
    }
    with open(os.path.join(spec.out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")

    print(f"{spec.name}: {ec.trials} trials, {len(result.rows)} rows, "
          f"{result.resampled_trials} resampled, {wall:.1f}s -> {spec.out_dir}")
    if result.failure_rate > MAX_FAILURE_RATE:
        print(f"error: resample rate {result.failure_rate:.1%} exceeds "
              f"{MAX_FAILURE_RATE:.0%}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


# --- validate ------------------------------------------------------------------

def _placement_report(V: PlacementMatrix) -> list:
    print(f"placement: P={V.P} K={V.K} t={V.t}")
    print(f"  row sums: all {V.t}; column sums: all {V.P * V.t // V.K}")
    print(f"  codewords n(V) = {n_of_v(V)}, MAC size m(V) = {mac_size(V)}")
    print(f"  decodable (distinct demands): {decode_check(V)}")
    return []


def _loose_placement_failures(arr: np.ndarray, P: int, K: int, t: int) -> list:
    """Itemized invariant violations for a matrix that failed validation."""
    failures = []
    if arr.shape != (P, K):
        return [f"matrix shape {arr.shape} does not match header ({P}, {K})"]
    if not np.isin(arr, (0, 1)).all():
        failures.append("entries must be 0/1")
        return failures
    if (P * t) % K != 0:
        failures.append(f"P*t = {P * t} not divisible by K = {K}")
    row = arr.sum(axis=1)
    bad = np.flatnonzero(row != t)
    if bad.size:
        failures.append(f"rows {bad.tolist()} sum to {row[bad].tolist()}, expected t = {t}")
    if (P * t) % K == 0:
        want = P * t // K
        col = arr.sum(axis=0)
        bad = np.flatnonzero(col != want)
        if bad.size:
            failures.append(f"columns {bad.tolist()} sum to {col[bad].tolist()}, "
                            f"expected P*t/K = {want}")
    return failures


def validate_path(path: str) -> int:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG

    first = next((ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")), "")
    failures = []
    if "=" not in first:
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        try:
            P, K, t = (int(x) for x in lines[0].split())
            arr = np.array([[int(x) for x in ln.split()] for ln in lines[1:]], dtype=np.int8)
        except (ValueError, IndexError) as exc:
            print(f"error: malformed placement file: {exc}", file=sys.stderr)
            return EXIT_BAD_CONFIG
        try:
            V = PlacementMatrix(bits=arr, t=t)
        except PlacementError:
            print(f"placement: P={P} K={K} t={t}")
            failures += _loose_placement_failures(arr, P, K, t)
        else:
            failures += _placement_report(V)
    else:
        try:
            params = parse_config_file(path)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_BAD_CONFIG
        K, t = params.get("k"), params.get("t")
        print(f"config: K={K} t={t} L={None if K is None or t is None else K - t}")
        if K is None or t is None:
            failures.append("config must set k and t")
        elif t < 1 or K - t < 1:
            failures.append(f"model requires K = t + L with t >= 1, L >= 1; "
                            f"got K={K}, t={t}, L={K - t}")
        if not failures and "placements" in params:
            try:
                placements = _resolve_placements(params)
            except (PlacementError, OSError) as exc:
                failures.append(f"placements: {exc}")
            else:
                for label, V in placements:
                    print(f"  {label}: P={V.P}, n(V)={n_of_v(V)}, m(V)={mac_size(V)}, "
                          f"decodable={decode_check(V)}")

    if failures:
        for f in failures:
            print(f"FAIL: {f}")
        return EXIT_VALIDATION
    print("all checks passed")
    return EXIT_OK


# --- argument parsing ------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ccbeam",
                                 description="Cache-aided MISO multicast rate simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte Carlo scenario")
    run.add_argument("scenario", nargs="?", default=None,
                     help=f"{sorted(SCENARIOS)} or 'custom' (also via --scenario)")
    run.add_argument("--scenario", dest="scenario_opt", default=None)
    run.add_argument("--config", default=None, help="key=value config file")
    run.add_argument("--out", default=".", help="output directory")
    run.add_argument("--trials", type=int, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--snr", default=None, help="comma-separated dB list")
    run.add_argument("--mode", choices=["exact", "lowsnr"], default=None)
    run.add_argument("--gammas", default=None, help="comma list from EP,PL,BF")
    run.add_argument("--workers", type=int, default=None)
    run.add_argument("--bf-restarts", type=int, default=None)

    val = sub.add_parser("validate", help="check a placement or config file")
    val.add_argument("path")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "validate":
        return validate_path(args.path)

    name = args.scenario_opt or args.scenario
    if not name:
        print("error: no scenario given", file=sys.stderr)
        return EXIT_BAD_CONFIG
    overrides = {
        "trials": args.trials,
        "seed": args.seed,
        "mode": args.mode,
        "workers": args.workers,
        "bf_restarts": args.bf_restarts,
    }
    if args.snr is not None:
        try:
            overrides["snr_db"] = [float(s) for s in args.snr.split(",") if s.strip()]
        except ValueError:
            print(f"error: bad --snr value {args.snr!r}", file=sys.stderr)
            return EXIT_BAD_CONFIG
    if args.gammas is not None:
        overrides["gammas"] = [s.strip().upper() for s in args.gammas.split(",") if s.strip()]
    spec = ScenarioSpec(name=name, config_path=args.config, out_dir=args.out,
                        overrides=overrides)
    return run_scenario(spec)


if __name__ == "__main__":
    sys.exit(main())

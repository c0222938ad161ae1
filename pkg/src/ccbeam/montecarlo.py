"""Seeded Monte Carlo ensembles over channel realizations.

Each trial draws one channel, solves the requested beamformers for every
(placement, SNR) pair and records the max-min statistic plus the full rate
pipeline.  Trials are independent tasks with per-trial derived seeds, so
results are byte-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import RESTART_STREAM, SeedSpec, sample_channel, trial_rng
from .placement import NetworkConfig, PlacementMatrix, standard_placements
from .beamform import (
    DeliveryIndex,
    InfeasibleRealizationError,
    maxmin_statistic,
    sinr_table,
    solve_bf,
    solve_ep,
    solve_pl_exact,
    solve_pl_lowsnr,
    zf_bundle,
)
from .rate import rate_result

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "CdfSeries",
    "run_experiment",
    "empirical_cdf",
    "cdf_series_from_rows",
    "rate_improvement",
    "write_samples_csv",
    "write_cdf_csv",
    "write_improvement_csv",
    "SAMPLES_HEADER",
]

MAX_ATTEMPTS = 8
GAMMAS = ("EP", "PL", "BF")
SAMPLES_HEADER = ("trial", "gamma", "P", "snr_db", "mode", "maxmin", "r_s", "T", "R")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one ensemble bit-for-bit."""

    K: int
    t: int
    placements: tuple          # of (label, PlacementMatrix)
    gammas: tuple = GAMMAS
    snr_db_grid: tuple = (0.0,)
    trials: int = 1000
    seed: int = 0
    mode: str = "lowsnr"       # lowsnr | exact
    bf_restarts: int = 3
    workers: int = 1
    N0: float = 1.0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.mode not in ("lowsnr", "exact"):
            raise ValueError(f"unknown mode {self.mode!r}")
        bad = [g for g in self.gammas if g not in GAMMAS]
        if bad:
            raise ValueError(f"unknown beamformer structures {bad}; valid: {GAMMAS}")
        for label, V in self.placements:
            if V.K != self.K or V.t != self.t:
                raise ValueError(f"placement {label} built for (K={V.K}, t={V.t}), "
                                 f"experiment has (K={self.K}, t={self.t})")

    @classmethod
    def from_p_values(cls, K: int, t: int, P_values,
                      allow_repeated_supports: bool = False, **kw) -> "ExperimentConfig":
        placements = standard_placements(K, t, P_values, allow_repeated_supports)
        return cls(K=K, t=t, placements=tuple(placements), **kw)


@dataclass(frozen=True)
class ExperimentResult:
    rows: tuple                # of dict, one per (trial, placement, snr, gamma)
    trials: int
    resampled_trials: int      # trials that needed at least one channel redraw

    @property
    def failure_rate(self) -> float:
        return self.resampled_trials / self.trials


def _solve(gamma, V, H, cfg, mode, index, zf, bf_restarts, rng):
    if gamma == "EP":
        return solve_ep(V, H, cfg, index, zf, mode=mode)
    if gamma == "PL":
        if mode == "exact":
            return solve_pl_exact(V, H, cfg, index, zf, rel_tol=1e-7)
        return solve_pl_lowsnr(V, H, cfg, index, zf)
    return solve_bf(V, H, cfg, mode=mode, restarts=bf_restarts, rng=rng,
                    index=index, zf=zf)


def _rows_for_channel(ec: ExperimentConfig, indexes, trial, H, spec):
    rows = []
    rng = trial_rng(spec, RESTART_STREAM)
    for label, V in ec.placements:
        index = indexes[label]
        zf = zf_bundle(V, H, index)
        if zf.degenerate:
            raise InfeasibleRealizationError("rank-deficient excluded channels")
        for snr_db in ec.snr_db_grid:
            cfg = NetworkConfig.from_snr_db(ec.K, ec.t, snr_db, ec.N0)
            for gamma in ec.gammas:
                sol = _solve(gamma, V, H, cfg, ec.mode, index, zf, ec.bf_restarts, rng)
                table = sinr_table(V, H, sol, cfg, index)
                rr = rate_result(cfg, V.P, table.per_user(),
                                 "exact" if ec.mode == "exact" else "lowsnr")
                rows.append({
                    "trial": trial,
                    "gamma": gamma,
                    "P": V.P,
                    "snr_db": snr_db,
                    "mode": ec.mode,
                    "maxmin": maxmin_statistic(sol, table, cfg),
                    "r_s": rr.r_s,
                    "T": rr.T,
                    "R": rr.R,
                })
    return rows


def _run_trial(ec: ExperimentConfig, indexes, trial: int):
    for attempt in range(MAX_ATTEMPTS):
        spec = SeedSpec(ec.seed, trial, attempt)
        cfg0 = NetworkConfig(K=ec.K, L=ec.K - ec.t, t=ec.t, Po=1.0, N0=ec.N0)
        H = sample_channel(cfg0, spec)
        try:
            return _run_trial_rows_tagged(ec, indexes, trial, H, spec, attempt)
        except InfeasibleRealizationError:
            continue
    raise InfeasibleRealizationError(
        f"trial {trial}: no usable realization in {MAX_ATTEMPTS} attempts")


def _run_trial_rows_tagged(ec, indexes, trial, H, spec, attempt):
    rows = _rows_for_channel(ec, indexes, trial, H, spec)
    return trial, rows, attempt


def _trial_batch(args):
    ec, indexes, trials = args
    return [_run_trial(ec, indexes, t) for t in trials]


def run_experiment(ec: ExperimentConfig) -> ExperimentResult:
    """Run all trials; deterministic for a given config regardless of workers."""
    indexes = {label: DeliveryIndex.build(V) for label, V in ec.placements}
    results = []
    if ec.workers > 1 and ec.trials > 1:
        chunks = np.array_split(np.arange(ec.trials), min(ec.workers * 4, ec.trials))
        payloads = [(ec, indexes, chunk.tolist()) for chunk in chunks if chunk.size]
        with ProcessPoolExecutor(max_workers=ec.workers) as pool:
            for batch in pool.map(_trial_batch, payloads):
                results.extend(batch)
    else:
        for t in range(ec.trials):
            results.append(_run_trial(ec, indexes, t))
    results.sort(key=lambda r: r[0])
    rows = tuple(row for _, trial_rows, _ in results for row in trial_rows)
    resampled = sum(1 for _, _, attempt in results if attempt > 0)
    return ExperimentResult(rows=rows, trials=ec.trials, resampled_trials=resampled)


# --- aggregation --------------------------------------------------------------

@dataclass(frozen=True)
class CdfSeries:
    """Empirical CDF samples: F(x[i]) = (i+1)/n, x sorted ascending."""

    x: np.ndarray
    F: np.ndarray
    gamma: str = ""
    P: int = 0
    statistic: str = "raw"     # raw | p_scaled


def empirical_cdf(values, scale_by_P: bool = False, P: int = 1,
                  gamma: str = "") -> CdfSeries:
    vals = np.asarray(list(values), dtype=float)
    if vals.size == 0:
        raise ValueError("empirical_cdf needs at least one sample")
    if scale_by_P:
        vals = vals * P
    x = np.sort(vals)
    F = np.arange(1, x.size + 1) / x.size
    return CdfSeries(x=x, F=F, gamma=gamma, P=P,
                     statistic="p_scaled" if scale_by_P else "raw")


def cdf_series_from_rows(rows, value_key: str = "maxmin") -> list:
    """Raw and P-scaled CDF series for every (gamma, P) group, in first-appearance order."""
    groups, order = {}, []
    for row in rows:
        key = (row["gamma"], row["P"])
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row[value_key])
    out = []
    for gamma, P in order:
        vals = groups[(gamma, P)]
        out.append(empirical_cdf(vals, scale_by_P=False, P=P, gamma=gamma))
        out.append(empirical_cdf(vals, scale_by_P=True, P=P, gamma=gamma))
    return out


def rate_improvement(rows, baseline_P: int) -> list:
    """Mean-R improvement (percent) of every P over the baseline, per (gamma, snr)."""
    sums, order = {}, []
    for row in rows:
        key = (row["gamma"], row["snr_db"], row["P"])
        if key not in sums:
            sums[key] = [0.0, 0]
            order.append(key)
        sums[key][0] += row["R"]
        sums[key][1] += 1
    if not any(P == baseline_P for _, _, P in sums):
        raise ValueError(f"baseline P = {baseline_P} not present in the samples")
    out = []
    for gamma, snr_db, P in order:
        base = sums.get((gamma, snr_db, baseline_P))
        if base is None:
            raise ValueError(f"baseline P = {baseline_P} missing for "
                             f"gamma={gamma}, snr_db={snr_db}")
        mean_r = sums[(gamma, snr_db, P)][0] / sums[(gamma, snr_db, P)][1]
        mean_base = base[0] / base[1]
        out.append({
            "gamma": gamma,
            "P": P,
            "snr_db": snr_db,
            "baseline_P": baseline_P,
            "improvement_pct": 100.0 * (mean_r - mean_base) / mean_base,
        })
    return out


# --- CSV interchange ----------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_samples_csv(rows, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(SAMPLES_HEADER) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[k]) for k in SAMPLES_HEADER) + "\n")


def write_cdf_csv(series_list, path):
    with open(path, "w", newline="\n") as fh:
        fh.write("gamma,P,statistic,x,F\n")
        for s in series_list:
            for xv, fv in zip(s.x, s.F):
                fh.write(f"{s.gamma},{s.P},{s.statistic},{float(xv)!r},{float(fv)!r}\n")


def write_improvement_csv(rows, path):
    header = ("gamma", "P", "snr_db", "baseline_P", "improvement_pct")
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[k]) for k in header) + "\n")

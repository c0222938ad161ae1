"""Miniature of the CDF experiment: seeded ensemble, per-P medians, CSV dump.

The full run is `ccbeam run cdf-fig4to6 --out results/`; this keeps the trial
count small enough to finish in under a minute.
"""

import collections

import numpy as np

from ccbeam import ExperimentConfig, empirical_cdf, run_experiment
from ccbeam.montecarlo import cdf_series_from_rows, write_cdf_csv, write_samples_csv

ec = ExperimentConfig.from_p_values(
    6, 3, [2, 8, 20], allow_repeated_supports=True,
    gammas=("EP", "PL", "BF"), snr_db_grid=(0.0,), trials=100, seed=42,
    mode="lowsnr", bf_restarts=4, workers=2)
result = run_experiment(ec)
print(f"{result.trials} trials, {len(result.rows)} rows, "
      f"{result.resampled_trials} resampled")

vals = collections.defaultdict(list)
for row in result.rows:
    vals[(row["gamma"], row["P"])].append(row["maxmin"])

print(f"\n{'':>4} {'raw median':>32} {'P-scaled median':>32}")
print(f"{'':>4} {'P=2':>10} {'P=8':>10} {'P=20':>10} {'P=2':>10} {'P=8':>10} {'P=20':>10}")
for gamma in ("EP", "PL", "BF"):
    med = {P: float(np.median(vals[(gamma, P)])) for P in (2, 8, 20)}
    print(f"{gamma:>4} " + " ".join(f"{med[P]:10.4f}" for P in (2, 8, 20))
          + " " + " ".join(f"{P * med[P]:10.4f}" for P in (2, 8, 20)))

write_samples_csv(result.rows, "samples_mini.csv")
write_cdf_csv(cdf_series_from_rows(result.rows), "cdf_mini.csv")
print("\nwrote samples_mini.csv and cdf_mini.csv")

series = empirical_cdf(vals[("BF", 20)], scale_by_P=True, P=20, gamma="BF")
print(f"BF P=20 scaled CDF: F({series.x[len(series.x) // 2]:.3f}) = "
      f"{series.F[len(series.F) // 2]:.2f}")

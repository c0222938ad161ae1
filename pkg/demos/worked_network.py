"""The 4-user worked network end to end: one channel draw, all three
beamformers, all three subpacketizations, rates and delivery times."""

import numpy as np

from ccbeam import (
    NetworkConfig,
    SeedSpec,
    delivery_time,
    effective_rate,
    mac_size,
    sample_channel,
    sinr_table,
    solve_bf,
    solve_ep,
    solve_pl_lowsnr,
    standard_placements,
    symmetric_rate_lowsnr,
)

cfg = NetworkConfig(K=4, L=2, t=2, Po=1.0, N0=1.0)   # 0 dB
H = sample_channel(cfg, SeedSpec(seed=2024, trial=0))
print(f"channel draw (K={cfg.K} users x L={cfg.L} antennas), Po/N0 = {cfg.snr:.0f}")

for label, V in standard_placements(4, 2):
    print(f"\n--- {label}: P={V.P}, MAC size {mac_size(V)} ---")
    solutions = [
        solve_ep(V, H, cfg),
        solve_pl_lowsnr(V, H, cfg),
        solve_bf(V, H, cfg, restarts=3, rng=0),
    ]
    for sol in solutions:
        table = sinr_table(V, H, sol, cfg)
        r_s = min(symmetric_rate_lowsnr(row) for row in table.per_user())
        T = delivery_time(V.P, r_s)
        R = effective_rate(cfg, T)
        print(f"  {sol.gamma}: min SINR {table.min_sinr():.4f}  "
              f"r_s {r_s:.4f} nats/use  T {T:.2f}  R {R:.3f}")

print("\nEvery structure trades the same power budget differently; the fully "
      "optimized beamformer tolerates interference to lift the weakest link.")

"""ccbeam: achievable-rate simulator for cache-aided MISO multicast networks.

Networks have K = t + L single-antenna users served by an L-antenna
transmitter; every user caches a t/K fraction of each file according to a
P x K placement matrix.  The package computes symmetric rates, delivery
times and effective rates for zero-forcing (EP, PL) and fully optimized
(BF) beamformers, and runs seeded Monte Carlo ensembles over Rayleigh
channels.
"""

from .placement import (
    NetworkConfig,
    PlacementMatrix,
    CodewordSpec,
    PlacementError,
    build_stride_cyclic,
    build_cyclic_orbit,
    build_combinatorial,
    concat,
    phi,
    build_codeword,
    n_of_v,
    mac_size,
    decode_check,
    distinct_demands,
    standard_placements,
)
from .channel import SeedSpec, sample_channel
from .beamform import (
    DeliveryIndex,
    BeamformerSolution,
    SinrTable,
    InfeasibleRealizationError,
    zf_direction,
    zf_bundle,
    solve_ep,
    solve_pl_lowsnr,
    solve_pl_exact,
    solve_bf,
    sinr_table,
    maxmin_statistic,
)
from .rate import (
    mac_symmetric_rate,
    symmetric_rate_lowsnr,
    delivery_time,
    effective_rate,
    RateResult,
    rate_result,
)
from .montecarlo import ExperimentConfig, CdfSeries, run_experiment, empirical_cdf, rate_improvement

__version__ = "0.1.0"

"""Reproducible Rayleigh channel generation.

Channels are drawn from a counter-based Philox stream keyed by
(master seed, trial, stream), so any (seed, trial) pair maps to the same
matrix on every run and under any worker scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SeedSpec", "sample_channel", "trial_rng"]

# stream ids carved out of each trial's seed space
CHANNEL_STREAM = 0
RESTART_STREAM = 1


@dataclass(frozen=True)
class SeedSpec:
    """(master seed, trial index) pair identifying one deterministic draw."""

    seed: int
    trial: int = 0
    attempt: int = 0  # bumped when a degenerate realization is resampled


def trial_rng(spec: SeedSpec, stream: int) -> np.random.Generator:
    """Independent generator for one (seed, trial, attempt, stream) tuple."""
    ss = np.random.SeedSequence(entropy=spec.seed,
                                spawn_key=(spec.trial, spec.attempt, stream))
    return np.random.Generator(np.random.Philox(ss))


def sample_channel(cfg, spec: SeedSpec) -> np.ndarray:
    """K x L i.i.d. CN(0, 1) channel matrix; row k is user k's channel."""
    rng = trial_rng(spec, CHANNEL_STREAM)
    re = rng.standard_normal((cfg.K, cfg.L))
    im = rng.standard_normal((cfg.K, cfg.L))
    return (re + 1j * im) / np.sqrt(2.0)

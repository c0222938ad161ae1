"""Symmetric rates, delivery times and effective rates from SINR tables.

Rates are in nats per channel use throughout (natural log).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "mac_symmetric_rate",
    "symmetric_rate_lowsnr",
    "delivery_time",
    "effective_rate",
    "RateResult",
    "rate_result",
]


def mac_symmetric_rate(sinrs) -> float:
    """Largest per-term rate decodable over a MAC with the given SINRs.

    The region is sum_{j in J} r <= log(1 + sum_{j in J} SINR_j) over all
    nonempty subsets J.  For a fixed symmetric rate the binding subset of
    each size is the one with the smallest SINR sum, so only the sorted
    prefixes need checking.
    """
    s = np.sort(np.asarray(sinrs, dtype=float))
    if s.size == 0:
        raise ValueError("empty SINR list")
    if (s < 0).any():
        raise ValueError("SINRs must be nonnegative")
    prefix = np.cumsum(s)
    sizes = np.arange(1, s.size + 1)
    return float(np.min(np.log1p(prefix) / sizes))


def symmetric_rate_lowsnr(sinrs) -> float:
    """Low-SNR (log(1+x) ~ x) symmetric rate: the smallest SINR."""
    s = np.asarray(sinrs, dtype=float)
    if s.size == 0:
        raise ValueError("empty SINR list")
    return float(s.min())


def delivery_time(P: int, r_s: float) -> float:
    """Time to deliver all parts: T = 1/(P * r_s); infinite if r_s <= 0."""
    if r_s <= 0:
        return math.inf
    return 1.0 / (P * r_s)


def effective_rate(cfg, T: float) -> float:
    """Users served per channel use: R = K(1 - t/K)/T = L/T."""
    if T <= 0:
        raise ValueError("delivery time must be positive")
    return cfg.K * (1.0 - cfg.t / cfg.K) / T


@dataclass(frozen=True)
class RateResult:
    """Symmetric rate r_s = min_k r_k plus the derived T = 1/(P r_s) and R = L/T."""

    r_s: float
    per_user: tuple
    T: float
    R: float
    mode: str


def rate_result(cfg, P: int, per_user_sinrs, mode: str) -> RateResult:
    """Evaluate the full rate pipeline for one solved realization.

    per_user_sinrs: sequence of K SINR lists (one per user, m(V) entries each).
    mode 'exact' uses the MAC rate region, 'lowsnr' the per-term SINR bound.
    """
    if mode == "exact":
        per_user = tuple(mac_symmetric_rate(s) for s in per_user_sinrs)
    elif mode == "lowsnr":
        per_user = tuple(symmetric_rate_lowsnr(s) for s in per_user_sinrs)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    r_s = min(per_user)
    T = delivery_time(P, r_s)
    R = 0.0 if math.isinf(T) else effective_rate(cfg, T)
    return RateResult(r_s=r_s, per_user=per_user, T=T, R=R, mode=mode)

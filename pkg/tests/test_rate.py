import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccbeam.placement import NetworkConfig
from ccbeam.rate import (
    delivery_time,
    effective_rate,
    mac_symmetric_rate,
    rate_result,
    symmetric_rate_lowsnr,
)


def brute_mac_rate(sinrs):
    """Oracle: min over all 2^m - 1 nonempty subsets of log(1+sum)/|J|."""
    best = math.inf
    m = len(sinrs)
    for r in range(1, m + 1):
        for J in itertools.combinations(range(m), r):
            val = math.log1p(sum(sinrs[j] for j in J)) / r
            best = min(best, val)
    return best


class TestMacSymmetricRate:
    def test_single_term(self):
        assert mac_symmetric_rate([0.5]) == pytest.approx(math.log(1.5), abs=1e-15)

    def test_two_terms_example(self):
        # min(log 2, log 4, log(5)/2) = log 2; frozen from the subset oracle
        assert brute_mac_rate([1.0, 3.0]) == pytest.approx(math.log(2.0), abs=1e-15)
        assert mac_symmetric_rate([1.0, 3.0]) == pytest.approx(math.log(2.0), abs=1e-15)

    def test_equal_terms(self):
        m, s = 5, 0.25
        want = math.log1p(m * s) / m
        assert mac_symmetric_rate([s] * m) == pytest.approx(want, abs=1e-15)
        assert brute_mac_rate([s] * m) == pytest.approx(want, abs=1e-15)

    def test_matches_bruteforce_random(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            m = int(rng.integers(1, 9))
            s = rng.exponential(1.0, size=m)
            assert mac_symmetric_rate(s) == pytest.approx(brute_mac_rate(s.tolist()),
                                                          abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            mac_symmetric_rate([])

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            mac_symmetric_rate([0.5, -0.1])


class TestLowSnrRate:
    def test_min(self):
        assert symmetric_rate_lowsnr([0.1, 0.3]) == 0.1

    def test_zero_entry(self):
        assert symmetric_rate_lowsnr([0.2, 0.0, 1.0]) == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            symmetric_rate_lowsnr([])

    def test_taylor_gap(self):
        # for SINRs below eps the two rates differ by at most eps^2 * m
        rng = np.random.default_rng(2)
        eps = 1e-3
        for _ in range(50):
            m = int(rng.integers(1, 13))
            s = rng.uniform(0, eps, size=m)
            gap = abs(mac_symmetric_rate(s) - symmetric_rate_lowsnr(s))
            assert gap <= eps * eps * m


class TestDeliveryAndEffectiveRate:
    def test_delivery_time(self):
        assert delivery_time(1, 1.0) == 1.0
        assert delivery_time(4, 0.5) == pytest.approx(0.5)

    def test_nonpositive_rate_gives_infinity(self):
        assert math.isinf(delivery_time(2, 0.0))
        assert math.isinf(delivery_time(2, -1.0))

    def test_effective_rate_examples(self):
        assert effective_rate(NetworkConfig(K=6, L=4, t=2), 1.0) == pytest.approx(4.0)
        assert effective_rate(NetworkConfig(K=4, L=2, t=2), 0.5) == pytest.approx(4.0)

    def test_pipeline_identities(self):
        cfg = NetworkConfig(K=6, L=3, t=3)
        rng = np.random.default_rng(3)
        for _ in range(20):
            P = int(rng.integers(1, 30))
            sinrs = [rng.exponential(1.0, size=3) for _ in range(6)]
            rr = rate_result(cfg, P, sinrs, "exact")
            assert rr.r_s == min(rr.per_user)
            assert rr.T == pytest.approx(1.0 / (P * rr.r_s))
            assert rr.R == pytest.approx(cfg.L * P * rr.r_s, rel=1e-12)
            assert rr.R * rr.T == pytest.approx(cfg.L, rel=1e-12)

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            rate_result(NetworkConfig(K=4, L=2, t=2), 2, [[1.0]] * 4, "sideways")


@given(st.lists(st.floats(min_value=0.0, max_value=50.0), min_size=1, max_size=10),
       st.integers(min_value=0, max_value=9), st.floats(min_value=1e-6, max_value=5.0))
@settings(max_examples=200, deadline=None)
def test_monotonicity_property(sinrs, pos, bump):
    """Increasing any single SINR never decreases either rate."""
    pos = pos % len(sinrs)
    bumped = list(sinrs)
    bumped[pos] += bump
    assert mac_symmetric_rate(bumped) >= mac_symmetric_rate(sinrs) - 1e-12
    assert symmetric_rate_lowsnr(bumped) >= symmetric_rate_lowsnr(sinrs)

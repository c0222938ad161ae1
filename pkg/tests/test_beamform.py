import math

import numpy as np
import pytest

from ccbeam.placement import (
    NetworkConfig,
    PlacementMatrix,
    build_combinatorial,
    standard_placements,
)
from ccbeam.beamform import (
    BeamformerSolution,
    DeliveryIndex,
    InfeasibleRealizationError,
    _codeword_floor_gains,
    _zf_term_gains,
    maxmin_statistic,
    sinr_table,
    solve_bf,
    solve_ep,
    solve_pl_exact,
    solve_pl_lowsnr,
    zf_bundle,
    zf_direction,
)
from ccbeam.rate import mac_symmetric_rate

V1 = PlacementMatrix(bits=np.array([[1, 0, 1, 0], [0, 1, 0, 1]]), t=2)
CFG4 = NetworkConfig(K=4, L=2, t=2, Po=1.0, N0=1.0)
CFG6 = NetworkConfig(K=6, L=3, t=3, Po=1.0, N0=1.0)


def rayleigh(K, L, rng):
    return (rng.standard_normal((K, L)) + 1j * rng.standard_normal((K, L))) / np.sqrt(2)


def grid_maxmin_alpha(c, step=1e-3):
    """Oracle for the low-SNR power split: refine an exhaustive simplex grid.

    The objective min_S alpha_S c_S is concave in alpha, so the grid argmax
    is within one cell of the true optimum and coarse-to-fine refinement
    with a generous (four-cell) search box reaches grid-step accuracy.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    points = 17

    def sweep(lo, hi):
        axes = [np.linspace(lo[i], hi[i], points) for i in range(n - 1)]
        grids = np.meshgrid(*axes, indexing="ij")
        flat = np.stack([g.ravel() for g in grids], axis=1)
        last = 1.0 - flat.sum(axis=1)
        ok = last >= -1e-12
        alphas = np.concatenate([flat[ok], np.maximum(last[ok], 0.0)[:, None]], axis=1)
        vals = (alphas * c).min(axis=1)
        best = int(np.argmax(vals))
        return alphas[best], float(vals[best])

    lo = np.zeros(n - 1)
    hi = np.ones(n - 1)
    spacing = 1.0 / (points - 1)
    alpha, val = sweep(lo, hi)
    while spacing > step / 2.0:
        lo = np.maximum(alpha[:n - 1] - 4.0 * spacing, 0.0)
        hi = np.minimum(alpha[:n - 1] + 4.0 * spacing, 1.0)
        alpha, val = sweep(lo, hi)
        spacing = 8.0 * spacing / (points - 1)
    return alpha, val


class TestZfDirection:
    def test_orthogonal_complement(self):
        H = np.array([[1.0, 0.0], [0.2, 0.5], [0.1, 0.9], [1.0, 1.0]], dtype=complex)
        u = zf_direction(H, (1, 2, 3))
        assert np.allclose(u, [0.0, 1.0])

    def test_phase_convention(self):
        H = np.array([[1.0, 1.0], [0.2, 0.5], [0.1, 0.9], [1.0, -1.0]],
                     dtype=complex) / np.sqrt(2)
        u = zf_direction(H, (1, 2, 3))
        assert np.allclose(u, [1.0 / np.sqrt(2), -1.0 / np.sqrt(2)])
        assert u[0].imag == pytest.approx(0.0, abs=1e-14)
        assert u[0].real > 0

    def test_residuals_all_subsets(self):
        rng = np.random.default_rng(4)
        H = rayleigh(4, 2, rng)
        idx = DeliveryIndex.build(V1)
        for S in idx.codeword_sets:
            u = zf_direction(H, S)
            assert abs(np.linalg.norm(u) - 1.0) < 1e-12
            for k in range(4):
                if k not in S:
                    assert abs(H[k] @ u) < 1e-10

    def test_degenerate_exclusions_flagged(self):
        rng = np.random.default_rng(5)
        H = rayleigh(6, 3, rng)
        H[5] = H[4]  # the two excluded rows of S = {0,1,2,3} become rank one
        V = build_combinatorial(6, 3)
        bundle = zf_bundle(V, H)
        assert bundle.degenerate
        u = zf_direction(H, (0, 1, 2, 3))
        assert abs(np.linalg.norm(u) - 1.0) < 1e-12
        assert abs(H[4] @ u) < 1e-10

    def test_nonfinite_rejected(self):
        H = np.full((4, 2), np.nan, dtype=complex)
        with pytest.raises(ValueError):
            zf_direction(H, (0, 1, 2))


class TestSolveEp:
    def test_uniform_quarter_power(self):
        rng = np.random.default_rng(6)
        H = rayleigh(4, 2, rng)
        sol = solve_ep(V1, H, CFG4)
        assert np.allclose(sol.alphas, 0.25)
        assert len(sol.sets) == 4

    def test_v3_also_quarter(self):
        fam = dict((V.P, V) for _, V in standard_placements(4, 2))
        rng = np.random.default_rng(7)
        H = rayleigh(4, 2, rng)
        sol = solve_ep(fam[6], H, CFG4)
        assert np.allclose(sol.alphas, 0.25)

    def test_single_codeword_full_power(self):
        V = PlacementMatrix(bits=np.array([[1, 0], [0, 1]]), t=1)
        cfg = NetworkConfig(K=2, L=1, t=1)
        H = rayleigh(2, 1, np.random.default_rng(8))
        sol = solve_ep(V, H, cfg)
        assert sol.alphas.tolist() == [1.0]


class TestSolvePlLowSnr:
    def test_two_codeword_example(self):
        # c = {1.0, 0.5}: equalizing gives alpha = {1/3, 2/3}, objective 1/3
        alpha, val = grid_maxmin_alpha([1.0, 0.5])
        assert val == pytest.approx(1.0 / 3.0, rel=1e-3)
        assert alpha[0] == pytest.approx(1.0 / 3.0, abs=2e-3)

    def test_four_codeword_example(self):
        # c = {1,2,4,8}: alpha proportional to {1,.5,.25,.125}, objective 1/1.875
        alpha, val = grid_maxmin_alpha([1.0, 2.0, 4.0, 8.0])
        assert val == pytest.approx(1.0 / 1.875, rel=1e-3)

    def test_closed_form_matches_grid_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            H = rayleigh(4, 2, rng)
            idx = DeliveryIndex.build(V1)
            zf = zf_bundle(V1, H, idx)
            sol = solve_pl_lowsnr(V1, H, CFG4, idx, zf)
            c = _codeword_floor_gains(idx, _zf_term_gains(idx, H, zf.U))
            _, val = grid_maxmin_alpha(c, step=2e-4)
            closed = sol.objective * CFG4.N0 / CFG4.Po
            assert closed >= val - 1e-12  # the grid point is achievable
            assert closed == pytest.approx(val, rel=1e-3)

    def test_equal_gains_give_uniform_split(self):
        idx = DeliveryIndex.build(V1)
        # craft gains via the closed form: all-equal c means alpha = 1/n
        rng = np.random.default_rng(10)
        H = rayleigh(4, 2, rng)
        sol = solve_pl_lowsnr(V1, H, CFG4)
        inv = 1.0 / _codeword_floor_gains(idx, _zf_term_gains(idx, H, zf_bundle(V1, H, idx).U))
        assert np.allclose(sol.alphas, inv / inv.sum())

    def test_alpha_sums_to_one(self):
        rng = np.random.default_rng(11)
        H = rayleigh(6, 3, rng)
        V = standard_placements(6, 3, [8])[0][1]
        sol = solve_pl_lowsnr(V, H, CFG6)
        assert sol.alphas.sum() == pytest.approx(1.0, abs=1e-12)

    def test_scale_invariant_alphas(self):
        rng = np.random.default_rng(12)
        H = rayleigh(4, 2, rng)
        a = solve_pl_lowsnr(V1, H, CFG4).alphas
        b = solve_pl_lowsnr(V1, 3.7 * H, CFG4).alphas
        assert np.allclose(a, b)


class TestSolvePlExact:
    def test_never_below_uniform_split(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            H = rayleigh(4, 2, rng)
            idx = DeliveryIndex.build(V1)
            zf = zf_bundle(V1, H, idx)
            ep = solve_ep(V1, H, CFG4, idx, zf)
            pl = solve_pl_exact(V1, H, CFG4, idx, zf)
            gains = _zf_term_gains(idx, H, zf.U)
            snr = CFG4.Po / CFG4.N0

            def rate_of(alphas):
                s = alphas[idx.term_codeword] * gains * snr
                return min(mac_symmetric_rate(s[idx.term_user == k]) for k in range(4))

            assert pl.objective >= rate_of(ep.alphas) - 1e-12
            assert pl.objective == pytest.approx(rate_of(pl.alphas), abs=1e-12)

    def test_single_user_terms_match_grid(self):
        # m(V1) = 1: the optimum equalizes log(1 + alpha c snr) across codewords
        rng = np.random.default_rng(14)
        H = rayleigh(4, 2, rng)
        idx = DeliveryIndex.build(V1)
        zf = zf_bundle(V1, H, idx)
        pl = solve_pl_exact(V1, H, CFG4, idx, zf, rel_tol=1e-10)
        c = _zf_term_gains(idx, H, zf.U)[np.argsort(idx.term_codeword)]

        def rate(alpha):
            return np.log1p(alpha * c).min()

        alpha, val = grid_maxmin_alpha(np.log1p(c))  # coarse structure only
        # refine around the solver's own alpha with a fine local grid
        best = rate(pl.alphas)
        rng2 = np.random.default_rng(15)
        for _ in range(2000):
            trial = pl.alphas + rng2.uniform(-1e-3, 1e-3, size=4)
            trial = np.maximum(trial, 0)
            s = trial.sum()
            if s > 0:
                trial /= max(s, 1.0)
                best = max(best, rate(trial))
        assert pl.objective >= best - 1e-3 * abs(best)

    def test_low_snr_limit_matches_equalizer(self):
        rng = np.random.default_rng(16)
        cfg = NetworkConfig(K=4, L=2, t=2, Po=1e-4, N0=1.0)
        for _ in range(5):
            H = rayleigh(4, 2, rng)
            low = solve_pl_lowsnr(V1, H, cfg)
            exact = solve_pl_exact(V1, H, cfg, rel_tol=1e-10)
            assert np.allclose(exact.alphas, low.alphas, rtol=0.01)


class TestSolveBf:
    def test_never_below_pl_lowsnr(self):
        rng = np.random.default_rng(17)
        for i in range(5):
            H = rayleigh(4, 2, rng)
            pl = solve_pl_lowsnr(V1, H, CFG4)
            bf = solve_bf(V1, H, CFG4, restarts=2, rng=i)
            assert bf.objective >= pl.objective - 1e-6

    def test_never_below_pl_exact(self):
        rng = np.random.default_rng(18)
        for i in range(3):
            H = rayleigh(6, 3, rng)
            V = standard_placements(6, 3, [8])[0][1]
            pl = solve_pl_exact(V, H, CFG6)
            bf = solve_bf(V, H, CFG6, mode="exact", restarts=1, rng=i)
            assert bf.objective >= pl.objective - 1e-6

    def test_single_term_matched_filter(self):
        # one codeword serving one user with no interference: the optimum is
        # the conjugate matched filter and the SINR cap Po ||h||^2 / N0
        h = np.array([[0.7 - 0.2j, 0.1 + 0.9j, -0.4 + 0.3j]])
        index = DeliveryIndex(
            K=1, L=3, t=0, P=1, codeword_sets=((0,),),
            term_user=np.array([0]), term_part=np.array([0]),
            term_codeword=np.array([0]), intf_mask=np.zeros((1, 1), dtype=bool))
        cfg = NetworkConfig(K=4, L=2, t=2, Po=2.0, N0=0.5)  # only Po/N0 is used
        from ccbeam.beamform import ZFBundle, _fix_phase
        zf = ZFBundle(U=np.ones((3, 1), dtype=complex) / np.sqrt(3), degenerate=False)

        class VStub:
            pass

        sol = solve_bf(VStub(), h, cfg, restarts=1, rng=0, index=index, zf=zf)
        cap = cfg.Po * np.linalg.norm(h) ** 2 / cfg.N0
        assert sol.objective == pytest.approx(cap, rel=1e-4)
        # the objective is locally flat, so the direction converges more
        # slowly than the value it certifies
        v = sol.directions[:, 0]
        matched = _fix_phase(np.conj(h[0]) / np.linalg.norm(h))
        assert np.allclose(v, matched, atol=2e-2)

    def test_high_snr_stays_at_zero_forcing(self):
        # interference dominates at high SNR, so the ZF warm start is already
        # essentially optimal and BF cannot do much better
        rng = np.random.default_rng(19)
        cfg = NetworkConfig(K=4, L=2, t=2, Po=1e6, N0=1.0)
        H = rayleigh(4, 2, rng)
        pl = solve_pl_lowsnr(V1, H, cfg)
        bf = solve_bf(V1, H, cfg, restarts=2, rng=0)
        assert bf.objective >= pl.objective - 1e-6
        assert bf.objective <= pl.objective * 1.10

    def test_deterministic_given_rng_seed(self):
        rng = np.random.default_rng(20)
        H = rayleigh(4, 2, rng)
        a = solve_bf(V1, H, CFG4, restarts=3, rng=123)
        b = solve_bf(V1, H, CFG4, restarts=3, rng=123)
        assert np.array_equal(a.directions, b.directions)
        assert np.array_equal(a.alphas, b.alphas)

    def test_restarts_validated(self):
        H = rayleigh(4, 2, np.random.default_rng(0))
        with pytest.raises(ValueError):
            solve_bf(V1, H, CFG4, restarts=0)
        with pytest.raises(ValueError):
            solve_bf(V1, H, CFG4, mode="mystery")


class TestSinrTable:
    def test_ep_entry_formula(self):
        rng = np.random.default_rng(21)
        H = rayleigh(4, 2, rng)
        idx = DeliveryIndex.build(V1)
        zf = zf_bundle(V1, H, idx)
        sol = solve_ep(V1, H, CFG4, idx, zf)
        table = sinr_table(V1, H, sol, CFG4, idx)
        (S, p, sinr), = table.entries[0]
        j = idx.codeword_sets.index(S)
        want = 0.25 * CFG4.Po * abs(H[0] @ zf.U[:, j]) ** 2 / CFG4.N0
        assert sinr == pytest.approx(want, rel=1e-15)

    def test_cardinality_is_p_times_l(self):
        fam = dict((V.P, V) for _, V in standard_placements(4, 2))
        rng = np.random.default_rng(22)
        H = rayleigh(4, 2, rng)
        for P, V in fam.items():
            sol = solve_ep(V, H, CFG4)
            assert sinr_table(V, H, sol, CFG4).n_entries() == P * CFG4.L

    def test_zero_alpha_gives_zero_sinr(self):
        rng = np.random.default_rng(23)
        H = rayleigh(4, 2, rng)
        sol = solve_ep(V1, H, CFG4)
        dead = BeamformerSolution(gamma="BF", mode="lowsnr", sets=sol.sets,
                                  directions=sol.directions,
                                  alphas=np.zeros_like(sol.alphas))
        table = sinr_table(V1, H, dead, CFG4)
        assert table.min_sinr() == 0.0

    def test_scale_covariance(self):
        rng = np.random.default_rng(24)
        H = rayleigh(4, 2, rng)
        sol = solve_ep(V1, H, CFG4)
        t1 = sinr_table(V1, H, sol, CFG4)
        sol2 = solve_ep(V1, 2.0 * H, CFG4)
        t2 = sinr_table(V1, 2.0 * H, sol2, CFG4)
        for r1, r2 in zip(t1.per_user(), t2.per_user()):
            assert np.allclose(np.array(r2), 4.0 * np.array(r1))

    def test_maxmin_statistic_equals_lowsnr_rate_scaled(self):
        rng = np.random.default_rng(25)
        H = rayleigh(4, 2, rng)
        cfg = NetworkConfig(K=4, L=2, t=2, Po=5.0, N0=2.0)
        sol = solve_ep(V1, H, cfg)
        table = sinr_table(V1, H, sol, cfg)
        assert maxmin_statistic(sol, table, cfg) == pytest.approx(
            table.min_sinr() * cfg.N0 / cfg.Po, rel=1e-15)


class TestOrdering:
    def test_ep_pl_bf_lowsnr_chain(self):
        rng = np.random.default_rng(26)
        V = standard_placements(6, 3, [8])[0][1]
        idx = DeliveryIndex.build(V)
        for i in range(5):
            H = rayleigh(6, 3, rng)
            zf = zf_bundle(V, H, idx)
            ep = solve_ep(V, H, CFG6, idx, zf)
            pl = solve_pl_lowsnr(V, H, CFG6, idx, zf)
            bf = solve_bf(V, H, CFG6, restarts=1, rng=i, index=idx, zf=zf)
            assert ep.objective <= pl.objective + 1e-12
            assert pl.objective <= bf.objective + 1e-6


class TestSolutionJson:
    def test_round_trip(self):
        rng = np.random.default_rng(27)
        H = rayleigh(4, 2, rng)
        sol = solve_pl_lowsnr(V1, H, CFG4)
        back = BeamformerSolution.from_json(sol.to_json())
        assert back.gamma == sol.gamma
        assert back.sets == sol.sets
        assert np.allclose(back.directions, sol.directions)
        assert np.allclose(back.alphas, sol.alphas)

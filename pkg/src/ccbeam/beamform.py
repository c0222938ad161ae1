"""Beamformer design for the three transmit structures.

EP: zero-forcing directions with uniform power split.
PL: zero-forcing directions with max-min optimized power split.
BF: jointly optimized directions and powers (local optimum via bisection on
the target plus successive convex approximation of the SINR constraints).

Every solver is a pure function of (placement, channel, config, seed).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .placement import PlacementMatrix, all_codewords
from .rate import mac_symmetric_rate

__all__ = [
    "DeliveryIndex",
    "ZFBundle",
    "BeamformerSolution",
    "SinrTable",
    "InfeasibleRealizationError",
    "zf_direction",
    "zf_bundle",
    "solve_ep",
    "solve_pl_lowsnr",
    "solve_pl_exact",
    "solve_bf",
    "sinr_table",
    "maxmin_statistic",
]

_PHASE_TOL = 1e-12


class InfeasibleRealizationError(RuntimeError):
    """Channel realization on which the requested solver has no solution."""


# --- delivery-side index -----------------------------------------------------

@dataclass(frozen=True)
class DeliveryIndex:
    """Per-placement term bookkeeping shared by all solvers.

    codeword_sets: transmitted subsets S (phi nonempty), lex order.
    terms: one entry per MAC term, ordered by (user, part):
        term_user[i], term_part[i], term_codeword[i] (index into codeword_sets).
    intf_mask[k, j] = True iff user k is outside codeword j (interference source).
    """

    K: int
    L: int
    t: int
    P: int
    codeword_sets: tuple
    term_user: np.ndarray
    term_part: np.ndarray
    term_codeword: np.ndarray
    intf_mask: np.ndarray

    @classmethod
    def build(cls, V: PlacementMatrix) -> "DeliveryIndex":
        cws = all_codewords(V)
        sets = tuple(cw.S for cw in cws)
        index = {S: j for j, S in enumerate(sets)}
        users, parts, serving = [], [], []
        for k in range(V.K):
            for p in V.missing_parts(k):
                S = tuple(sorted(V.row_support(p) | {k}))
                users.append(k)
                parts.append(p)
                serving.append(index[S])
        intf = np.ones((V.K, len(sets)), dtype=bool)
        for j, S in enumerate(sets):
            intf[list(S), j] = False
        return cls(K=V.K, L=V.K - V.t, t=V.t, P=V.P, codeword_sets=sets,
                   term_user=np.array(users), term_part=np.array(parts),
                   term_codeword=np.array(serving), intf_mask=intf)

    @property
    def n_codewords(self) -> int:
        return len(self.codeword_sets)

    @property
    def n_terms(self) -> int:
        return self.term_user.size

    def serving_sets(self, k: int) -> tuple:
        """S(k): subsets whose codeword carries a term for user k."""
        js = sorted(set(self.term_codeword[self.term_user == k].tolist()))
        return tuple(self.codeword_sets[j] for j in js)

    def excluded_sets(self, k: int) -> tuple:
        """S-bar(k): transmitted subsets not containing user k."""
        return tuple(S for j, S in enumerate(self.codeword_sets) if self.intf_mask[k, j])


# --- zero-forcing directions -------------------------------------------------

def _fix_phase(u: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(u) > _PHASE_TOL)
    if nz.size:
        pivot = u[nz[0]]
        u = u * (pivot.conj() / abs(pivot))
    return u


def zf_direction(H: np.ndarray, S) -> np.ndarray:
    """Unit vector u with h_k^T u = 0 for every user k outside S.

    The null space of the stacked excluded rows is generically
    one-dimensional; the phase is fixed so the first nonzero component is
    real and positive.
    """
    u, _ = _zf_direction(np.asarray(H), tuple(S))
    return u


def _zf_direction(H: np.ndarray, S) -> tuple:
    if not np.isfinite(H).all():
        raise ValueError("channel matrix contains non-finite entries")
    K, L = H.shape
    excluded = [k for k in range(K) if k not in set(S)]
    if not excluded:
        u = np.zeros(L, dtype=complex)
        u[0] = 1.0
        return u, False
    ns = null_space(H[excluded])
    if ns.shape[1] == 0:
        raise InfeasibleRealizationError("excluded channels span the whole space")
    u = _fix_phase(ns[:, 0].astype(complex))
    u /= np.linalg.norm(u)
    return u, ns.shape[1] > 1


@dataclass(frozen=True)
class ZFBundle:
    """ZF directions for all transmitted codewords; columns of U follow the
    codeword order of the index.  degenerate marks rank-deficient exclusions."""

    U: np.ndarray
    degenerate: bool


def zf_bundle(V: PlacementMatrix, H: np.ndarray, index: DeliveryIndex = None) -> ZFBundle:
    index = index or DeliveryIndex.build(V)
    H = np.asarray(H)
    U = np.zeros((H.shape[1], index.n_codewords), dtype=complex)
    degenerate = False
    for j, S in enumerate(index.codeword_sets):
        u, deg = _zf_direction(H, S)
        U[:, j] = u
        degenerate |= deg
    return ZFBundle(U=U, degenerate=degenerate)


# --- solution container ------------------------------------------------------

@dataclass(frozen=True)
class BeamformerSolution:
    """Directions and power coefficients for every transmitted codeword."""

    gamma: str                 # EP | PL | BF
    mode: str                  # lowsnr | exact
    sets: tuple                # codeword subsets, lex order
    directions: np.ndarray     # L x n, unit columns
    alphas: np.ndarray         # n, nonnegative, sums to 1
    objective: float = math.nan  # solver's max-min value (min SINR or rate)
    converged: bool = True
    degenerate: bool = False

    def weights(self, Po: float) -> np.ndarray:
        """Actual transmit vectors w_S = sqrt(alpha_S * Po) * direction."""
        return self.directions * np.sqrt(self.alphas * Po)

    def to_json(self) -> str:
        return json.dumps({
            "gamma": self.gamma,
            "mode": self.mode,
            "converged": self.converged,
            "degenerate": self.degenerate,
            "objective": self.objective,
            "codewords": [
                {"S": list(S),
                 "alpha": float(a),
                 "direction_re": np.real(d).tolist(),
                 "direction_im": np.imag(d).tolist()}
                for S, a, d in zip(self.sets, self.alphas, self.directions.T)
            ],
        })

    @classmethod
    def from_json(cls, text: str) -> "BeamformerSolution":
        obj = json.loads(text)
        sets = tuple(tuple(c["S"]) for c in obj["codewords"])
        dirs = np.array([np.array(c["direction_re"]) + 1j * np.array(c["direction_im"])
                         for c in obj["codewords"]]).T
        alphas = np.array([c["alpha"] for c in obj["codewords"]])
        return cls(gamma=obj["gamma"], mode=obj["mode"], sets=sets,
                   directions=dirs, alphas=alphas, objective=obj["objective"],
                   converged=obj["converged"], degenerate=obj["degenerate"])


# --- SINR evaluation ---------------------------------------------------------

@dataclass(frozen=True)
class SinrTable:
    """Per-user MAC term SINRs: entries[k] is a tuple of (S, part, sinr),
    ordered by part index; K * m(V) entries in total."""

    entries: tuple

    def per_user(self) -> list:
        return [[e[2] for e in row] for row in self.entries]

    def min_sinr(self) -> float:
        return min(e[2] for row in self.entries for e in row)

    def n_entries(self) -> int:
        return sum(len(row) for row in self.entries)


def _term_sinrs(index: DeliveryIndex, H, W, N0, zero_forced: bool) -> np.ndarray:
    """SINR of every MAC term for transmit columns W (power absorbed in W)."""
    Z = H @ W
    sig = np.abs(Z[index.term_user, index.term_codeword]) ** 2
    if zero_forced:
        den = N0
    else:
        intf = (np.abs(Z) ** 2 * index.intf_mask).sum(axis=1)
        den = intf[index.term_user] + N0
    return sig / den


def sinr_table(V: PlacementMatrix, H, sol: BeamformerSolution, cfg,
               index: DeliveryIndex = None) -> SinrTable:
    """SINR of every (user, term) pair under the given solution.

    For the ZF structures the residual interference is below numerical noise
    and treated as exactly zero.
    """
    index = index or DeliveryIndex.build(V)
    W = sol.weights(cfg.Po)
    sinrs = _term_sinrs(index, np.asarray(H), W, cfg.N0,
                        zero_forced=sol.gamma in ("EP", "PL"))
    rows = []
    for k in range(index.K):
        sel = np.flatnonzero(index.term_user == k)
        rows.append(tuple(
            (index.codeword_sets[index.term_codeword[i]], int(index.term_part[i]), float(sinrs[i]))
            for i in sel))
    return SinrTable(entries=tuple(rows))


def maxmin_statistic(sol: BeamformerSolution, table: SinrTable, cfg) -> float:
    """Max-min statistic recorded by the CDF experiments (watts).

    The weakest term's SINR rescaled by N0/Po, which puts all three
    structures on the same power-split-inclusive scale; it equals the
    low-SNR symmetric rate times N0/Po.
    """
    return table.min_sinr() * cfg.N0 / cfg.Po


# --- EP and PL (ZF-based) solvers ---------------------------------------------

def _zf_term_gains(index: DeliveryIndex, H, U) -> np.ndarray:
    """|h_k^T u_S|^2 for every term (k served by S)."""
    Z = H @ U
    return np.abs(Z[index.term_user, index.term_codeword]) ** 2


def solve_ep(V: PlacementMatrix, H, cfg, index: DeliveryIndex = None,
             zf: ZFBundle = None, mode: str = "lowsnr") -> BeamformerSolution:
    """ZF directions, alpha_S = 1/n(V) for every transmitted codeword."""
    index = index or DeliveryIndex.build(V)
    zf = zf or zf_bundle(V, H, index)
    n = index.n_codewords
    alphas = np.full(n, 1.0 / n)
    gains = _zf_term_gains(index, np.asarray(H), zf.U)
    objective = float((alphas[index.term_codeword] * gains).min()) * cfg.Po / cfg.N0
    return BeamformerSolution(gamma="EP", mode=mode, sets=index.codeword_sets,
                              directions=zf.U, alphas=alphas, objective=objective,
                              degenerate=zf.degenerate)


def _codeword_floor_gains(index: DeliveryIndex, gains: np.ndarray) -> np.ndarray:
    """c_S = weakest served-term gain of each codeword."""
    c = np.full(index.n_codewords, np.inf)
    np.minimum.at(c, index.term_codeword, gains)
    return c


def solve_pl_lowsnr(V: PlacementMatrix, H, cfg, index: DeliveryIndex = None,
                    zf: ZFBundle = None) -> BeamformerSolution:
    """Closed-form max-min power split over ZF directions.

    With c_S the weakest served gain of codeword S, equalizing
    alpha_S * c_S yields alpha_S proportional to 1/c_S and objective
    1 / sum_S (1/c_S).
    """
    index = index or DeliveryIndex.build(V)
    zf = zf or zf_bundle(V, H, index)
    gains = _zf_term_gains(index, np.asarray(H), zf.U)
    c = _codeword_floor_gains(index, gains)
    if (c <= 0).any():
        raise InfeasibleRealizationError("a codeword has zero gain toward a served user")
    inv = 1.0 / c
    alphas = inv / inv.sum()
    objective = float(1.0 / inv.sum()) * cfg.Po / cfg.N0  # = min SINR
    return BeamformerSolution(gamma="PL", mode="lowsnr", sets=index.codeword_sets,
                              directions=zf.U, alphas=alphas, objective=objective,
                              degenerate=zf.degenerate)


# --- exact-rate PL solver (bisection + LP with lazy MAC subsets) ---------------

def _violated_prefixes(sinrs_by_user, r, active, slack=1e-12):
    """Most violated MAC subset per user at symmetric rate r.

    For fixed SINRs the binding subset of each size is the ascending-sorted
    prefix, so only prefixes are examined.  Returns new (k, term-index tuple)
    pairs not already active.
    """
    new = []
    for k, (idx, s) in enumerate(sinrs_by_user):
        order = np.argsort(s)
        csum = np.cumsum(s[order])
        sizes = np.arange(1, s.size + 1)
        need = np.expm1(sizes * r)
        ratio = (csum + slack) / np.maximum(need, 1e-300)
        worst = int(np.argmin(ratio))
        if csum[worst] < need[worst] * (1.0 - 1e-12):
            J = tuple(sorted(idx[order[: worst + 1]].tolist()))
            if (k, J) not in active:
                new.append((k, J))
    return new


def solve_pl_exact(V: PlacementMatrix, H, cfg, index: DeliveryIndex = None,
                   zf: ZFBundle = None, rel_tol: float = 1e-9,
                   max_rounds: int = 60) -> BeamformerSolution:
    """Max symmetric MAC rate over the ZF power split.

    Bisection on the rate; each feasibility check is an LP in alpha with the
    subset-rate constraints generated lazily (ascending-prefix separation).
    The returned split is the best evaluated feasible point, so it never
    falls below the uniform (EP) split.
    """
    index = index or DeliveryIndex.build(V)
    zf = zf or zf_bundle(V, H, index)
    H = np.asarray(H)
    gains = _zf_term_gains(index, H, zf.U)
    snr = cfg.Po / cfg.N0
    n = index.n_codewords
    by_user = [np.flatnonzero(index.term_user == k) for k in range(index.K)]

    def evaluate(alphas):
        s = alphas[index.term_codeword] * gains * snr
        return min(mac_symmetric_rate(s[idx]) for idx in by_user), s

    # incumbents: uniform split and the low-SNR equalizer
    best_alpha = np.full(n, 1.0 / n)
    best_rate, _ = evaluate(best_alpha)
    c = _codeword_floor_gains(index, gains)
    if (c > 0).all():
        inv = 1.0 / c
        a_low = inv / inv.sum()
        r_low, _ = evaluate(a_low)
        if r_low > best_rate:
            best_rate, best_alpha = r_low, a_low

    r_hi = min(mac_symmetric_rate(gains[idx] * snr) for idx in by_user)
    r_lo = best_rate
    active = set()
    for k, idx in enumerate(by_user):
        for i in idx:
            active.add((k, (int(i),)))
        active.add((k, tuple(int(i) for i in idx)))

    converged = True
    rounds = 0
    while r_hi - r_lo > rel_tol * max(r_hi, 1e-300):
        rounds += 1
        if rounds > max_rounds:
            converged = False
            break
        r = 0.5 * (r_lo + r_hi)
        feasible = False
        for _ in range(40):
            rows = sorted(active)
            A = np.zeros((len(rows), n + 1))
            for ci, (k, J) in enumerate(rows):
                for i in J:
                    A[ci, index.term_codeword[i]] -= gains[i]
                A[ci, n] = math.expm1(len(J) * r) / snr
            A_sum = np.zeros((1, n + 1))
            A_sum[0, :n] = 1.0
            cvec = np.zeros(n + 1)
            cvec[n] = -1.0
            res = linprog(cvec, A_ub=np.vstack([A, A_sum]),
                          b_ub=np.concatenate([np.zeros(len(rows)), [1.0]]),
                          bounds=[(0, 1)] * n + [(0, 1e12)], method="highs")
            if not res.success or res.x[n] < 1.0 - 1e-9:
                break
            alphas = np.maximum(res.x[:n], 0.0)
            ssum = alphas.sum()
            if ssum > 1.0:
                alphas /= ssum
            s = alphas[index.term_codeword] * gains * snr
            new = _violated_prefixes([(idx, s[idx]) for idx in by_user], r, active)
            if not new:
                feasible = True
                rate, _ = evaluate(alphas)
                if rate > best_rate:
                    best_rate, best_alpha = rate, alphas
                r_lo = max(r_lo, rate)
                break
            active.update(new)
        if not feasible:
            r_hi = r

    alphas = best_alpha / best_alpha.sum()
    return BeamformerSolution(gamma="PL", mode="exact", sets=index.codeword_sets,
                              directions=zf.U, alphas=alphas, objective=best_rate,
                              converged=converged, degenerate=zf.degenerate)


# --- BF solver: bisection on the target + SCA ---------------------------------
#
# Directions and powers are merged into unnormalized columns W (so
# alpha_S = ||w_S||^2) and every constraint takes the common form
#
#     sum_{i in J} Po |h_{k_i}^T w_{S_i}|^2  >=  rhs * (I_k + N0),
#     I_k = Po * sum_{S' not containing k} |h_k^T w_{S'}|^2,
#
# with rhs = tau (low-SNR targets) or e^{|J| r} - 1 (exact MAC subsets).
# The signal quadratics are linearized around the incumbent, which makes the
# feasibility subproblem concave; it is solved by accelerated projected
# ascent on a softmin of the constraint margins.


class _ConstraintSystem:
    """Linearized margins, true residuals and gradients for an active
    constraint set; targets (rhs) are swappable so one system serves a whole
    bisection sweep."""

    def __init__(self, index: DeliveryIndex, H, Po, N0, groups):
        # groups: list of (user, tuple-of-term-indices)
        self.index = index
        self.H = np.ascontiguousarray(H)
        self.Hc = np.ascontiguousarray(H.conj().T)
        self.Po, self.N0 = Po, N0
        self.user_of_c = np.array([k for k, _ in groups])
        self.tu, self.tc = index.term_user, index.term_codeword
        self.imask = index.intf_mask.astype(float)
        T = index.n_terms
        if len(groups) == T and all(J == (i,) for i, (_, J) in enumerate(groups)):
            self.Msel = None  # identity: one singleton constraint per term
        else:
            self.Msel = np.zeros((len(groups), T))
            for ci, (_, J) in enumerate(groups):
                self.Msel[ci, list(J)] = 1.0
        self.rhs = None

    def set_rhs(self, rhs):
        self.rhs = np.asarray(rhs, dtype=float)

    def _gather(self, W):
        Z = self.H @ W
        absZ2 = Z.real ** 2 + Z.imag ** 2
        den = self.Po * (absZ2 * self.imask).sum(axis=1)[self.user_of_c] + self.N0
        return Z, absZ2, den

    def _group(self, per_term):
        return per_term if self.Msel is None else self.Msel @ per_term

    def true_margins(self, W):
        _, absZ2, den = self._gather(W)
        return self._group(self.Po * absZ2[self.tu, self.tc]) - self.rhs * den

    def linearize(self, Wbar):
        Z = self.H @ Wbar
        self.zbar = Z[self.tu, self.tc].copy()
        self.zbar2 = self.zbar.real ** 2 + self.zbar.imag ** 2
        m0 = self.true_margins(Wbar)
        self.scale = np.abs(m0) + self.rhs * self.N0 + 1e-30

    def eval_point(self, W, beta, want_grad=True):
        """(softmin of linearized margins, gradient, min true margin) in one pass."""
        Z, absZ2, den = self._gather(W)
        zs = Z[self.tu, self.tc]
        lsig = self.Po * (2.0 * (self.zbar.real * zs.real + self.zbar.imag * zs.imag)
                          - self.zbar2)
        margins = (self._group(lsig) - self.rhs * den) / self.scale
        true_min = float((self._group(self.Po * absZ2[self.tu, self.tc])
                          - self.rhs * den).min())
        mmin = margins.min()
        wexp = np.exp(-beta * (margins - mmin))
        wsum = wexp.sum()
        F = float(mmin - math.log(wsum) / beta)
        if not want_grad:
            return F, None, true_min
        ptilde = wexp / (wsum * self.scale)
        idx = self.index
        if self.Msel is None:
            tw = ptilde
        else:
            tw = self.Msel.T @ ptilde
        uw = np.bincount(self.user_of_c, weights=ptilde * self.rhs, minlength=idx.K)
        flat = self.tu * idx.n_codewords + self.tc
        vals = tw * self.zbar
        SW = (np.bincount(flat, weights=vals.real, minlength=idx.K * idx.n_codewords)
              + 1j * np.bincount(flat, weights=vals.imag, minlength=idx.K * idx.n_codewords)
              ).reshape(idx.K, idx.n_codewords)
        G = 2.0 * self.Po * (self.Hc @ (SW - (uw[:, None] * self.imask) * Z))
        return F, G, true_min


def _project_ball(W):
    nrm = np.linalg.norm(W)
    return W / nrm if nrm > 1.0 else W


def _ascend(system: _ConstraintSystem, W0, iters=45, betas=(10.0, 80.0)):
    """Accelerated projected ascent of the softmin of linearized margins.

    Exits as soon as the true (non-linearized) margins clear zero, since the
    caller only needs a feasible point.
    """
    x = _project_ball(W0.copy())
    best_x, best_F = x, -math.inf
    for beta in betas:
        F, G, true_min = system.eval_point(x, beta)
        if true_min >= 0.0:
            return x, True
        eta = 0.2 / max(np.linalg.norm(G), 1e-12)
        y, tk = x, 1.0
        F_best_stage, stall, damps = F, 0, 0
        for _ in range(iters):
            x_new = _project_ball(y + eta * G)
            tk_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
            y = _project_ball(x_new + ((tk - 1.0) / tk_new) * (x_new - x))
            x, tk = x_new, tk_new
            F, G, true_min = system.eval_point(y, beta)
            if true_min >= 0.0:
                return y, True
            if F > F_best_stage + 1e-14:
                F_best_stage, stall = F, 0
                eta *= 1.02
            else:
                stall += 1
                if stall == 3:      # diverging or flat: damp and restart momentum
                    damps += 1
                    if damps == 3:  # repeated stalls: this stage is done
                        break
                    eta *= 0.4
                    y, tk = x, 1.0
                    F, G, true_min = system.eval_point(y, beta)
                    stall = 0
        if F_best_stage > best_F:
            best_x, best_F = x, F_best_stage
    return best_x, False


def _sca_rounds(system: _ConstraintSystem, W_start, sca_max=3):
    """Re-linearize and ascend until the true margins clear zero or stall."""
    system.linearize(W_start)
    if float(system.true_margins(W_start).min()) >= 0.0:
        return True, W_start
    Wbar = W_start
    best_W, best_min = W_start, float(system.true_margins(W_start).min())
    for _ in range(sca_max):
        system.linearize(Wbar)
        W, feasible = _ascend(system, Wbar)
        if feasible:
            Wf = _rescale_full_power(W)
            return True, (Wf if float(system.true_margins(Wf).min()) >= 0.0 else W)
        tmin = float(system.true_margins(W).min())
        if tmin <= best_min + 1e-15:
            break
        best_W, best_min = W, tmin
        Wbar = W
    return False, best_W


def _rescale_full_power(W):
    nrm = np.linalg.norm(W)
    return W / nrm if nrm > 0 else W


def _decompose(index, W, fallback_dirs):
    alphas = np.sum(np.abs(W) ** 2, axis=0)
    total = alphas.sum()
    if total > 0:
        alphas = alphas / total
    dirs = np.array(fallback_dirs, copy=True)
    for j in range(index.n_codewords):
        nrm = np.linalg.norm(W[:, j])
        if nrm > 1e-30:
            dirs[:, j] = _fix_phase(W[:, j] / nrm)
    return dirs, alphas


def _exact_rate_of(index, H, W, Po, N0):
    sinrs = _term_sinrs(index, H, W, N0, zero_forced=False)
    return min(mac_symmetric_rate(sinrs[index.term_user == k]) for k in range(index.K))


def solve_bf(V: PlacementMatrix, H, cfg, mode: str = "lowsnr", restarts: int = 3,
             rng=None, index: DeliveryIndex = None, zf: ZFBundle = None,
             max_iters: int = 200, rel_tol: float = 1e-5) -> BeamformerSolution:
    """Locally optimal joint (direction, power) design.

    Initial points are the PL solution plus restarts-1 random draws; each is
    improved by bisection on the max-min target with SCA-convexified
    feasibility checks, and the best true objective wins.  The result never
    falls below its PL warm start.
    """
    if mode not in ("lowsnr", "exact"):
        raise ValueError(f"unknown mode {mode!r}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    index = index or DeliveryIndex.build(V)
    zf = zf or zf_bundle(V, H, index)
    H = np.asarray(H)
    Po, N0 = cfg.Po, cfg.N0
    if rng is None or isinstance(rng, int):
        rng = np.random.default_rng(0 if rng is None else rng)

    # PL warm start in merged-column form
    try:
        pl = (solve_pl_lowsnr(V, H, cfg, index, zf) if mode == "lowsnr"
              else solve_pl_exact(V, H, cfg, index, zf, rel_tol=1e-7))
        W_pl = zf.U * np.sqrt(pl.alphas)
    except InfeasibleRealizationError:
        W_pl = zf.U / math.sqrt(index.n_codewords)

    if mode == "lowsnr":
        def objective(W):
            return float(_term_sinrs(index, H, W * math.sqrt(Po), N0, False).min())
    else:
        def objective(W):
            return _exact_rate_of(index, H, W * math.sqrt(Po), Po, N0)

    # restart recipe: PL warm start, then alternating perturbations of it and
    # fully random points (diverse basins matter more than ascent depth)
    starts = [W_pl]
    for i in range(restarts - 1):
        G = rng.standard_normal((H.shape[1], index.n_codewords)) \
            + 1j * rng.standard_normal((H.shape[1], index.n_codewords))
        G /= np.linalg.norm(G)
        if i % 2 == 0:
            G = W_pl + 0.5 * G
            G /= np.linalg.norm(G)
        starts.append(G)

    best_W = W_pl
    best_obj = objective(W_pl)
    converged = True
    # each user's m serving codewords share the power budget, so its weakest
    # term has alpha <= 1/m and SINR <= Po ||h_k||^2 / (m N0)
    m = index.n_terms // index.K
    hmin2 = (np.abs(H) ** 2).sum(axis=1).min()
    if mode == "lowsnr":
        obj_cap = Po * hmin2 / (m * N0)
    else:
        obj_cap = math.log1p(Po * hmin2 / N0) / m
    lowsnr_groups = [(int(k), (i,)) for i, k in enumerate(index.term_user)]
    lowsnr_system = (_ConstraintSystem(index, H, Po, N0, lowsnr_groups)
                     if mode == "lowsnr" else None)

    for W0 in starts:
        W = _rescale_full_power(W0.copy())
        obj_hi = obj_cap
        obj_lo = objective(W)
        active = None  # lazily generated MAC subsets, persisted across the sweep
        iters = 0
        while obj_hi - obj_lo > rel_tol * max(obj_hi, 1e-300) and iters < max_iters:
            iters += 1
            target = 0.5 * (obj_lo + obj_hi)
            if mode == "lowsnr":
                lowsnr_system.set_rhs(np.full(index.n_terms, target))
                feasible, W_new = _sca_rounds(lowsnr_system, W)
            else:
                feasible, W_new, active = _solve_exact_target(
                    index, H, Po, N0, target, W, active)
            if feasible:
                W = W_new
                obj_lo = max(obj_lo, objective(W))
            else:
                obj_hi = target
        if iters >= max_iters:
            converged = False
        if obj_lo > best_obj:
            best_obj, best_W = obj_lo, W

    dirs, alphas = _decompose(index, best_W, zf.U)
    return BeamformerSolution(gamma="BF", mode=mode, sets=index.codeword_sets,
                              directions=dirs, alphas=alphas, objective=best_obj,
                              converged=converged, degenerate=zf.degenerate)


def _solve_exact_target(index, H, Po, N0, r, W_start, active=None, sep_rounds=8):
    """Feasibility of symmetric rate r with lazily generated MAC subsets.

    The active subset collection persists across calls (all subsets are true
    constraints at any rate, so accumulating them stays valid).
    """
    by_user = [np.flatnonzero(index.term_user == k) for k in range(index.K)]
    if active is None:
        active = set()
        for k, idx in enumerate(by_user):
            for i in idx:
                active.add((k, (int(i),)))
            active.add((k, tuple(int(i) for i in idx)))
    W = W_start
    for _ in range(sep_rounds):
        groups = sorted(active)
        system = _ConstraintSystem(index, H, Po, N0, groups)
        system.set_rhs([math.expm1(len(J) * r) for _, J in groups])
        ok, W = _sca_rounds(system, W)
        if not ok:
            return False, W, active
        sinrs = _term_sinrs(index, H, W * math.sqrt(Po), N0, zero_forced=False)
        new = _violated_prefixes([(idx, sinrs[idx]) for idx in by_user], r, active)
        if not new:
            return True, W, active
        active.update(new)
    return False, W, active

"""Cache placement matrices and the multicast codeword combinatorics built on them.

A placement matrix is a P x K binary matrix: entry (p, k) = 1 means user k
caches part p of every file.  All delivery-side quantities (eligible part
sets, codewords, MAC sizes) derive from it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NetworkConfig",
    "PlacementMatrix",
    "CodewordSpec",
    "PlacementError",
    "build_stride_cyclic",
    "build_cyclic_orbit",
    "build_combinatorial",
    "concat",
    "phi",
    "build_codeword",
    "n_of_v",
    "mac_size",
    "decode_check",
    "distinct_demands",
    "standard_placements",
]


class PlacementError(ValueError):
    """Raised for invalid placement constructions or malformed queries."""


@dataclass(frozen=True)
class NetworkConfig:
    """Physical scenario: K single-antenna users, L transmit antennas,
    caching gain t, total transmit power Po and noise power N0 (watts)."""

    K: int
    L: int
    t: int
    Po: float = 1.0
    N0: float = 1.0

    def __post_init__(self):
        if self.t < 1 or self.L < 1:
            raise ValueError("t and L must be >= 1")
        if self.K != self.t + self.L:
            raise ValueError(f"model requires K = t + L, got K={self.K}, t={self.t}, L={self.L}")
        if self.Po <= 0 or self.N0 <= 0:
            raise ValueError("Po and N0 must be positive")

    @property
    def snr(self) -> float:
        return self.Po / self.N0

    @classmethod
    def from_snr_db(cls, K: int, t: int, snr_db: float, N0: float = 1.0) -> "NetworkConfig":
        """Config at a given SNR in dB, with Po = N0 * 10^(dB/10)."""
        return cls(K=K, L=K - t, t=t, Po=N0 * 10.0 ** (snr_db / 10.0), N0=N0)


@dataclass(frozen=True)
class PlacementMatrix:
    """P x K binary placement with uniform row sums t and column sums P*t/K."""

    bits: np.ndarray
    t: int
    provenance: tuple = ()

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.int8)
        object.__setattr__(self, "bits", bits)
        self.validate()

    @property
    def P(self) -> int:
        return self.bits.shape[0]

    @property
    def K(self) -> int:
        return self.bits.shape[1]

    def validate(self):
        bits, t = self.bits, self.t
        if bits.ndim != 2:
            raise PlacementError("placement must be a 2-D array")
        P, K = bits.shape
        if not np.isin(bits, (0, 1)).all():
            raise PlacementError("placement entries must be 0/1")
        if (P * t) % K != 0:
            raise PlacementError(f"P*t = {P * t} not divisible by K = {K}")
        row = bits.sum(axis=1)
        if not (row == t).all():
            bad = int(np.flatnonzero(row != t)[0])
            raise PlacementError(f"row {bad} sums to {int(row[bad])}, expected t = {t}")
        col = bits.sum(axis=0)
        want = P * t // K
        if not (col == want).all():
            bad = int(np.flatnonzero(col != want)[0])
            raise PlacementError(f"column {bad} sums to {int(col[bad])}, expected P*t/K = {want}")

    def row_support(self, p: int) -> frozenset:
        return frozenset(np.flatnonzero(self.bits[p]).tolist())

    def cached_parts(self, k: int) -> frozenset:
        return frozenset(np.flatnonzero(self.bits[:, k]).tolist())

    def missing_parts(self, k: int) -> tuple:
        return tuple(np.flatnonzero(self.bits[:, k] == 0).tolist())

    def to_text(self) -> str:
        """Plain-text form: first line 'P K t', then P lines of 0/1 digits."""
        lines = [f"{self.P} {self.K} {self.t}"]
        lines += [" ".join(str(int(b)) for b in row) for row in self.bits]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PlacementMatrix":
        lines = [ln for ln in (s.strip() for s in text.splitlines()) if ln and not ln.startswith("#")]
        if not lines:
            raise PlacementError("empty placement file")
        try:
            P, K, t = (int(x) for x in lines[0].split())
        except ValueError as exc:
            raise PlacementError(f"malformed header {lines[0]!r}, expected 'P K t'") from exc
        if len(lines) != P + 1:
            raise PlacementError(f"expected {P} matrix rows, found {len(lines) - 1}")
        rows = []
        for ln in lines[1:]:
            vals = [int(x) for x in ln.split()]
            if len(vals) != K:
                raise PlacementError(f"row {ln!r} has {len(vals)} entries, expected K = {K}")
            rows.append(vals)
        return cls(bits=np.array(rows, dtype=np.int8), t=t, provenance=("from_text",))


@dataclass(frozen=True)
class CodewordSpec:
    """One multicast codeword: user subset S of size t+1, its eligible part
    set phi, and the XOR-combined (user, part) terms."""

    S: tuple
    phi: tuple
    terms: tuple  # of (user k, part p), each with V[p, k] = 0

    @property
    def empty(self) -> bool:
        return not self.terms


def _check_subset(V: PlacementMatrix, S) -> tuple:
    S = tuple(sorted(set(int(k) for k in S)))
    if any(k < 0 or k >= V.K for k in S):
        raise PlacementError(f"subset {S} out of range for K = {V.K}")
    if len(S) != V.t + 1:
        raise PlacementError(f"subset size must be t+1 = {V.t + 1}, got {len(S)}")
    return S


def build_stride_cyclic(K: int, t: int, stride: int) -> PlacementMatrix:
    """Rows of t consecutive (cyclic) ones at starting offsets 0, stride, 2*stride, ...

    P = K/stride.  stride must divide both K and t so that column sums are
    uniform.
    """
    if stride < 1 or K % stride != 0 or t % stride != 0:
        raise PlacementError(f"stride {stride} must divide K = {K} and t = {t}")
    return build_cyclic_orbit(K, t, offsets=range(t), step=stride,
                              provenance=("stride_cyclic", K, t, stride))


def build_cyclic_orbit(K: int, t: int, offsets, step: int = 1, provenance=None) -> PlacementMatrix:
    """Rows are cyclic shifts of a base window of t user indices.

    Shifts 0, step, 2*step, ... are taken modulo K and rows with repeated
    support are dropped, so self-symmetric windows yield their orbit once
    (e.g. offsets {0, 2} with K = 4 gives the two diagonal rows).
    """
    offsets = tuple(sorted(set(int(o) % K for o in offsets)))
    if len(offsets) != t:
        raise PlacementError(f"offsets {offsets} must contain t = {t} distinct values mod K")
    if step < 1 or K % step != 0:
        raise PlacementError(f"step {step} must divide K = {K}")
    rows, seen = [], set()
    for i in range(0, K, step):
        support = frozenset((o + i) % K for o in offsets)
        if support in seen:
            continue
        seen.add(support)
        row = np.zeros(K, dtype=np.int8)
        row[list(support)] = 1
        rows.append(row)
    prov = provenance or ("cyclic_orbit", K, t, offsets, step)
    return PlacementMatrix(bits=np.array(rows, dtype=np.int8), t=t, provenance=(prov,))


def build_combinatorial(K: int, t: int) -> PlacementMatrix:
    """All C(K, t) characteristic vectors of t-subsets of [K], in lex order."""
    if not (1 <= t < K):
        raise PlacementError(f"need 1 <= t < K, got t = {t}, K = {K}")
    rows = []
    for T in itertools.combinations(range(K), t):
        row = np.zeros(K, dtype=np.int8)
        row[list(T)] = 1
        rows.append(row)
    return PlacementMatrix(bits=np.array(rows, dtype=np.int8), t=t,
                           provenance=(("combinatorial", K, t),))


def concat(Va: PlacementMatrix, Vb: PlacementMatrix) -> PlacementMatrix:
    """Stack the rows of Va above the rows of Vb (P = Pa + Pb)."""
    if Va.K != Vb.K or Va.t != Vb.t:
        raise PlacementError(
            f"cannot concat (K={Va.K}, t={Va.t}) with (K={Vb.K}, t={Vb.t})")
    return PlacementMatrix(bits=np.vstack([Va.bits, Vb.bits]), t=Va.t,
                           provenance=Va.provenance + Vb.provenance)


def phi(V: PlacementMatrix, S) -> tuple:
    """Parts cached by no user outside S: {p : V[p, k] = 0 for all k not in S}."""
    S = _check_subset(V, S)
    outside = np.setdiff1d(np.arange(V.K), S)
    mask = (V.bits[:, outside] == 0).all(axis=1)
    return tuple(np.flatnonzero(mask).tolist())


def build_codeword(V: PlacementMatrix, S, demands=None) -> CodewordSpec:
    """Codeword X(S): XOR of subfiles W_p(k) over k in S, p in phi(S) with V[p,k] = 0.

    The demand vector only relabels which file each term refers to; the term
    structure is demand-independent.
    """
    S = _check_subset(V, S)
    parts = phi(V, S)
    terms = tuple((k, p) for p in parts for k in S if V.bits[p, k] == 0)
    return CodewordSpec(S=S, phi=parts, terms=terms)


def all_codewords(V: PlacementMatrix) -> list:
    """Nonempty codewords for every (t+1)-subset, in lex subset order."""
    out = []
    for S in itertools.combinations(range(V.K), V.t + 1):
        cw = build_codeword(V, S)
        if not cw.empty:
            out.append(cw)
    return out


def n_of_v(V: PlacementMatrix) -> int:
    """Number of (t+1)-subsets S with phi(S) nonempty (= transmitted codewords)."""
    return len(all_codewords(V))


def mac_size(V: PlacementMatrix) -> int:
    """Terms each user decodes from its multiple access channel: P*L/K = P - P*t/K."""
    L = V.K - V.t
    return V.P * L // V.K


def distinct_demands(K: int) -> tuple:
    """Worst-case demand vector: user k requests file k."""
    return tuple(range(K))


def decode_check(V: PlacementMatrix, demands=None) -> bool:
    """Symbolically simulate delivery and decoding for every user.

    Each user collects the codewords of subsets containing it, strips the
    XOR terms it holds in cache, and must be left with exactly one of its
    own missing subfiles per codeword.  Returns True iff every user ends up
    with all P parts of its requested file.
    """
    if demands is None:
        demands = distinct_demands(V.K)
    demands = tuple(demands)
    if len(demands) != V.K:
        raise PlacementError(f"demand vector length {len(demands)} != K = {V.K}")

    codewords = all_codewords(V)
    for k in range(V.K):
        decoded = set()
        for cw in codewords:
            if k not in cw.S:
                continue  # zero-forced away from user k
            # XOR symbols are (file, part); duplicated symbols cancel over GF(2)
            symbols = set()
            for (kk, p) in cw.terms:
                sym = (demands[kk], p)
                symbols.symmetric_difference_update({sym})
            residual = {(w, p) for (w, p) in symbols if V.bits[p, k] == 0}
            if not residual:
                continue
            if len(residual) > 1:
                return False
            (w, p), = residual
            if w != demands[k]:
                return False
            decoded.add(p)
        if decoded != set(V.missing_parts(k)):
            return False
    return True


# --- standard placement families -------------------------------------------
#
# Default base blocks are chosen so that no two rows share a support:
# repeated supports put two subfiles of the same user into one XOR codeword,
# which no receiver can split (decode_check fails).  With
# allow_repeated_supports=True the intermediate P values are instead built by
# stacking plain stride blocks, which can repeat supports.  All SINR and rate
# quantities remain well defined on such matrices, and the tighter coupling
# between their MAC terms is part of what the CDF experiments measure; they
# are just not valid bit-level delivery schemes.

_FAMILIES = {
    (4, 2): {
        2: lambda: build_cyclic_orbit(4, 2, (0, 2)),            # V1: diagonals
        4: lambda: build_cyclic_orbit(4, 2, (0, 1)),            # V2: consecutive pairs
        6: lambda: concat(build_cyclic_orbit(4, 2, (0, 2)),
                          build_cyclic_orbit(4, 2, (0, 1))),    # V3
    },
    (6, 2): {
        3: lambda: build_cyclic_orbit(6, 2, (0, 3)),            # opposite-pair matching
        6: lambda: build_cyclic_orbit(6, 2, (0, 1)),            # distance-1 cycle
        9: lambda: concat(build_cyclic_orbit(6, 2, (0, 3)),
                          build_cyclic_orbit(6, 2, (0, 1))),
        12: lambda: concat(build_cyclic_orbit(6, 2, (0, 1)),
                           build_cyclic_orbit(6, 2, (0, 2))),   # distance-1 + distance-2
        15: lambda: build_combinatorial(6, 2),
    },
    (6, 3): {
        2: lambda: build_stride_cyclic(6, 3, 3),
        8: lambda: concat(build_cyclic_orbit(6, 3, (0, 2, 4)),
                          build_stride_cyclic(6, 3, 1)),
        20: lambda: build_combinatorial(6, 3),
    },
}

_REPEATED_SUPPORT_FAMILIES = {
    (6, 2): {
        9: lambda: concat(build_stride_cyclic(6, 2, 2), build_stride_cyclic(6, 2, 1)),
        12: lambda: concat(build_stride_cyclic(6, 2, 1), build_stride_cyclic(6, 2, 1)),
    },
    (6, 3): {
        8: lambda: concat(build_stride_cyclic(6, 3, 3), build_stride_cyclic(6, 3, 1)),
    },
}


def standard_placements(K: int, t: int, P_values=None,
                        allow_repeated_supports: bool = False) -> list:
    """Named (label, matrix) pairs for the standard subpacketization family of (K, t)."""
    try:
        family = dict(_FAMILIES[(K, t)])
    except KeyError:
        raise PlacementError(f"no standard placement family for (K={K}, t={t}); "
                             f"known: {sorted(_FAMILIES)}") from None
    if allow_repeated_supports:
        family.update(_REPEATED_SUPPORT_FAMILIES.get((K, t), {}))
    wanted = sorted(family) if P_values is None else list(P_values)
    out = []
    for P in wanted:
        if P not in family:
            raise PlacementError(f"P = {P} not in the (K={K}, t={t}) family {sorted(family)}")
        V = family[P]()
        assert V.P == P
        out.append((f"P{P}", V))
    return out

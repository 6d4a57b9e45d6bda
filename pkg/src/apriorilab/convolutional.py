"""Rate-1/2 binary convolutional codes on a 2^(K-1)-state trellis.

Generator and feedback polynomials are bitmasks with bit j holding the
coefficient of D^j, so 0b1101 is D^3 + D^2 + 1.  The encoder state is the
register (a_{t-1}, ..., a_{t-K+1}) with the most recent bit in the MSB;
with feedback H the register input is a_t = u_t xor sum_j h_j a_{t-j},
and output i taps the a-sequence through g_i.  H = 1 gives the classical
feedforward encoder; G1 = H makes output 1 equal the input (systematic).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .kernels import conv_encode_kernel, viterbi_kernel

__all__ = [
    "CodeSpec",
    "Trellis",
    "WeightSpectrum",
    "NONRECURSIVE_CODE",
    "RECURSIVE_CODE",
    "TURBO_CONSTITUENT",
    "build_trellis",
    "encode",
    "enumerate_spectrum",
    "viterbi_decode_api",
    "free_distance",
]


@dataclass(frozen=True)
class CodeSpec:
    """A rate-1/2 convolutional code: two feedforward masks and a feedback mask."""

    g1: int
    g2: int
    h: int = 1
    constraint_length: int = 4

    def __post_init__(self) -> None:
        bound = 1 << self.constraint_length
        for name, poly in (("g1", self.g1), ("g2", self.g2), ("h", self.h)):
            if not 0 < poly < bound:
                raise ValueError(f"{name}={poly:#b} out of range for K={self.constraint_length}")
        if self.h & 1 == 0:
            raise ValueError("feedback polynomial must have h0=1")

    @property
    def recursive(self) -> bool:
        return self.h != 1

    @property
    def memory(self) -> int:
        return self.constraint_length - 1

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    @property
    def rate(self) -> float:
        return 0.5


# the two study codes (K=4, maximum free distance 6) and the turbo constituent
NONRECURSIVE_CODE = CodeSpec(g1=0b1101, g2=0b1111, h=0b0001)
RECURSIVE_CODE = CodeSpec(g1=0b1011, g2=0b1111, h=0b1101)
TURBO_CONSTITUENT = CodeSpec(g1=0b1011, g2=0b1101, h=0b1011)


def _reversed_mask(poly: int, memory: int) -> int:
    """Map taps on (a_{t-1}..a_{t-m}) onto the state bit order (MSB = a_{t-1})."""
    mask = 0
    for j in range(1, memory + 1):
        if (poly >> j) & 1:
            mask |= 1 << (memory - j)
    return mask


@dataclass
class Trellis:
    """Tabulated transitions of a CodeSpec.

    next_state[s, u] and out_bits[s, u, :] describe the branch taken from
    state s on input u.  prev_state/prev_u/prev_out list the two incoming
    branches of each state, sorted by (u, predecessor); u_term[s] is the
    input that drives the register toward zero (the termination tail).
    """

    spec: CodeSpec
    next_state: np.ndarray = field(repr=False)
    out_bits: np.ndarray = field(repr=False)
    prev_state: np.ndarray = field(repr=False)
    prev_u: np.ndarray = field(repr=False)
    prev_out: np.ndarray = field(repr=False)
    u_term: np.ndarray = field(repr=False)

    @property
    def n_states(self) -> int:
        return self.spec.n_states

    @property
    def memory(self) -> int:
        return self.spec.memory


@lru_cache(maxsize=None)
def build_trellis(spec: CodeSpec) -> Trellis:
    m = spec.memory
    S = spec.n_states
    h_mask = _reversed_mask(spec.h, m)
    g_masks = [_reversed_mask(g, m) for g in (spec.g1, spec.g2)]
    g_lsb = [spec.g1 & 1, spec.g2 & 1]

    next_state = np.zeros((S, 2), dtype=np.int64)
    out_bits = np.zeros((S, 2, 2), dtype=np.int8)
    u_term = np.zeros(S, dtype=np.int8)
    for s in range(S):
        fb = bin(s & h_mask).count("1") & 1
        u_term[s] = fb
        for u in range(2):
            a = u ^ fb
            next_state[s, u] = (a << (m - 1)) | (s >> 1)
            for i in range(2):
                out_bits[s, u, i] = (g_lsb[i] & a) ^ (bin(s & g_masks[i]).count("1") & 1)

    prev_state = np.zeros((S, 2), dtype=np.int64)
    prev_u = np.zeros((S, 2), dtype=np.int8)
    prev_out = np.zeros((S, 2, 2), dtype=np.int8)
    incoming: list[list[tuple[int, int]]] = [[] for _ in range(S)]
    for s in range(S):
        for u in range(2):
            incoming[next_state[s, u]].append((u, s))
    for s, branches in enumerate(incoming):
        branches.sort()
        assert len(branches) == 2
        for c, (u, ps) in enumerate(branches):
            prev_state[s, c] = ps
            prev_u[s, c] = u
            prev_out[s, c] = out_bits[ps, u]
    return Trellis(spec, next_state, out_bits, prev_state, prev_u, prev_out, u_term)


def _as_batch(bits) -> tuple[np.ndarray, bool]:
    arr = np.asarray(bits, dtype=np.int8)
    if arr.ndim == 1:
        return arr[None, :], True
    if arr.ndim == 2:
        return arr, False
    raise ValueError("bit array must be 1- or 2-dimensional")


def encode(spec: CodeSpec, info, terminate: bool = True) -> np.ndarray:
    """Encode info bits; output interleaves (c1, c2) per trellis step.

    With termination the tail appends memory() forced steps, so the coded
    length is 2*(k + K - 1); otherwise 2*k and the final state is free.
    """
    coded, _tail = encode_with_tail(spec, info, terminate)
    return coded


def encode_with_tail(spec: CodeSpec, info, terminate: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Like ``encode`` but also returns the forced tail input bits (B, m)."""
    batch, squeeze = _as_batch(info)
    if batch.shape[1] < 1:
        raise ValueError("info must be non-empty")
    tr = build_trellis(spec)
    n_tail = tr.memory if terminate else 0
    B, k = batch.shape
    coded = np.zeros((B, 2 * (k + n_tail)), dtype=np.int8)
    tail_u = np.zeros((B, max(n_tail, 1)), dtype=np.int8)
    conv_encode_kernel(batch, tr.next_state, tr.out_bits, tr.u_term, n_tail, coded, tail_u)
    tail_u = tail_u[:, :n_tail]
    if squeeze:
        return coded[0], tail_u[0]
    return coded, tail_u


def viterbi_decode_api(spec: CodeSpec, channel_llrs, apriori=None, terminated: bool = True) -> np.ndarray:
    """Maximum-metric sequence decoding with additive a-priori LLRs.

    channel_llrs: (..., 2*(k+m)) when terminated else (..., 2*k), positive
    favoring bit 0.  apriori: (..., k) info-bit LLRs, zeros when absent.
    Ties break toward the 0 input.  Returns hard info decisions.
    """
    llrs = np.asarray(channel_llrs, dtype=np.float64)
    squeeze = llrs.ndim == 1
    if squeeze:
        llrs = llrs[None, :]
    if llrs.ndim != 2 or llrs.shape[1] % 2:
        raise ValueError("channel LLRs must pair two bits per trellis step")
    tr = build_trellis(spec)
    n_tail = tr.memory if terminated else 0
    T = llrs.shape[1] // 2
    k = T - n_tail
    if k < 1:
        raise ValueError("frame shorter than the termination tail")
    B = llrs.shape[0]
    if apriori is None:
        la = np.zeros((B, k))
    else:
        la = np.asarray(apriori, dtype=np.float64)
        if la.ndim == 1:
            la = la[None, :]
        if la.shape != (B, k):
            raise ValueError(f"apriori shape {la.shape} does not match ({B}, {k})")
    info_hat = np.zeros((B, k), dtype=np.int8)
    viterbi_kernel(
        llrs.reshape(B, T, 2), la, tr.prev_state, tr.prev_u, tr.prev_out,
        tr.u_term, n_tail, terminated, info_hat,
    )
    return info_hat[0] if squeeze else info_hat


@dataclass(frozen=True)
class WeightSpectrum:
    """Multiplicities beta of detours with input weight w and output weight d.

    records: tuple of (w, d, beta), unique in (w, d), sorted by d then w.
    k optionally carries the block length the spectrum was enumerated for
    (needed by the turbo floor fits).
    """

    records: tuple[tuple[int, int, int], ...]
    k: int | None = None

    def __post_init__(self) -> None:
        recs = tuple(sorted(self.records, key=lambda r: (r[1], r[0])))
        seen = set()
        for w, d, beta in recs:
            if beta < 1:
                raise ValueError("multiplicities must be >= 1")
            if (w, d) in seen:
                raise ValueError(f"duplicate spectrum record ({w}, {d})")
            seen.add((w, d))
        object.__setattr__(self, "records", recs)

    def min_distance(self) -> int:
        if not self.records:
            raise ValueError("empty spectrum")
        return min(d for _, d, _ in self.records)

    def as_dict(self) -> dict[tuple[int, int], int]:
        return {(w, d): beta for w, d, beta in self.records}


def _event_iter(spec: CodeSpec, d_max: int, w_max: int, collect_patterns: bool):
    """DFS over first-return-to-zero detours with weight caps.

    Yields (w, d) or, with patterns, (w, d, input_offsets, c2_offsets,
    span) where offsets are trellis steps from the detour start and span
    is the detour length in steps.  Path length is capped at 4*K*d_max;
    a non-catastrophic code exhausts the caps first.
    """
    tr = build_trellis(spec)
    max_len = 4 * spec.constraint_length * d_max
    # detours start with the state-0 branch on input 1
    start_out = tr.out_bits[0, 1]
    d0 = int(start_out[0]) + int(start_out[1])
    root = (int(tr.next_state[0, 1]), 1, d0, 1, (0,), (0,) if start_out[1] else ())
    stack = [root]
    while stack:
        s, w, d, steps, in_off, par_off = stack.pop()
        if s == 0:
            if d <= d_max and w <= w_max:
                if collect_patterns:
                    yield w, d, in_off, par_off, steps
                else:
                    yield w, d
            continue
        if steps >= max_len:
            continue
        for u in (0, 1):
            nw = w + u
            out = tr.out_bits[s, u]
            nd = d + int(out[0]) + int(out[1])
            if nw > w_max or nd > d_max:
                continue
            ni = in_off + (steps,) if (collect_patterns and u) else in_off
            npr = par_off + (steps,) if (collect_patterns and out[1]) else par_off
            stack.append((int(tr.next_state[s, u]), nw, nd, steps + 1, ni, npr))


def enumerate_spectrum(spec: CodeSpec, d_max: int = 16, w_max: int = 12) -> WeightSpectrum:
    """Exact beta_{w,d} for all single detours with d <= d_max, w <= w_max."""
    counts: dict[tuple[int, int], int] = {}
    for w, d in _event_iter(spec, d_max, w_max, collect_patterns=False):
        counts[(w, d)] = counts.get((w, d), 0) + 1
    if not counts:
        raise ValueError(f"no detours found within d<={d_max}, w<={w_max}")
    return WeightSpectrum(tuple((w, d, b) for (w, d), b in counts.items()))


def free_distance(spec: CodeSpec) -> tuple[int, int]:
    """(d_free, minimum input weight among detours at d_free)."""
    for d_cap in (12, 16, 24):
        try:
            spectrum = enumerate_spectrum(spec, d_max=d_cap, w_max=4 * d_cap)
        except ValueError:
            continue
        d_free = spectrum.min_distance()
        w_min = min(w for w, d, _ in spectrum.records if d == d_free)
        return d_free, w_min
    raise ValueError("free distance search caps exhausted")

"""Parallel concatenation of two identical RSC constituents.

Wire format (per frame of k info bits, constituent memory m = 3):

    [ systematic k | parity1 | parity2 | tail_sys m | tail_par1 m ]

Unpunctured (rate ~1/3) both parity streams carry all k bits; punctured
(rate ~1/2) parity1 keeps even trellis steps and parity2 odd ones, the
systematic stream is never punctured.  Encoder 1 is terminated with m
tail steps whose forced inputs and parity are appended; encoder 2 is
left open and its tail is not transmitted.

Decoding is exact log-MAP with the external a-priori LLRs entering each
constituent as a persistent prior: the prior input of a constituent is
(partner extrinsic + external API), and the exchanged extrinsic is the
posterior minus systematic minus that full prior, so the API is counted
exactly once per activation and never compounds across iterations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .convolutional import TURBO_CONSTITUENT, CodeSpec, WeightSpectrum, _event_iter, build_trellis
from .kernels import bcjr_kernel, conv_encode_kernel, rsc_sparse_weight

__all__ = [
    "Interleaver",
    "TurboSpec",
    "DecoderState",
    "build_interleaver",
    "turbo_encode",
    "bcjr_decode",
    "turbo_decode",
    "enumerate_turbo_floor_spectrum",
    "EXTRINSIC_CLAMP",
]

EXTRINSIC_CLAMP = 50.0


@dataclass(frozen=True, eq=False)
class Interleaver:
    """A bijection on {0..k-1}; interleaved[t] = x[permutation[t]]."""

    permutation: np.ndarray
    kind: str = "random"
    s_param: int | None = None

    def __post_init__(self) -> None:
        perm = np.asarray(self.permutation, dtype=np.int64)
        object.__setattr__(self, "permutation", perm)
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(perm.size)
        object.__setattr__(self, "_inverse", inverse)

    @property
    def k(self) -> int:
        return self.permutation.size

    @property
    def inverse(self) -> np.ndarray:
        return self._inverse  # type: ignore[attr-defined]

    def apply(self, x: np.ndarray) -> np.ndarray:
        return x[..., self.permutation]

    def deapply(self, x: np.ndarray) -> np.ndarray:
        return x[..., self.inverse]

    def verify(self) -> None:
        """Raise unless the permutation is a bijection meeting its S constraint."""
        perm = self.permutation
        if not np.array_equal(np.sort(perm), np.arange(perm.size)):
            raise ValueError("permutation is not a bijection")
        if self.kind == "s_random":
            if self.s_param is None:
                raise ValueError("s_random interleaver lacks its S parameter")
            s = self.s_param
            for off in range(1, s + 1):
                if np.any(np.abs(perm[off:] - perm[:-off]) <= s):
                    raise ValueError(f"S-random constraint violated at offset {off}")

    def save(self, path) -> None:
        Path(path).write_text("\n".join(str(int(i)) for i in self.permutation) + "\n")

    @classmethod
    def load(cls, path, kind: str = "random", s_param: int | None = None) -> "Interleaver":
        values = [int(line) for line in Path(path).read_text().split()]
        return cls(np.array(values, dtype=np.int64), kind=kind, s_param=s_param)


def _fits_at(perm: np.ndarray, placed_upto: int, pos: int, val: int, s: int) -> bool:
    """val placed at pos keeps the spread vs already-placed neighbors within s."""
    lo = max(0, pos - s)
    hi = min(placed_upto, pos + s + 1)
    for p in range(lo, hi):
        if p != pos and abs(int(perm[p]) - val) <= s:
            return False
    return True


def _s_random_attempt(rng, k: int, s: int, rescue_tries: int) -> np.ndarray | None:
    perm = np.full(k, -1, dtype=np.int64)
    pool = np.arange(k)
    for i in range(k):
        recent = perm[max(0, i - s):i]
        if recent.size:
            feasible = pool[np.all(np.abs(pool[:, None] - recent[None, :]) > s, axis=1)]
        else:
            feasible = pool
        if feasible.size:
            choice = int(feasible[rng.integers(feasible.size)])
            perm[i] = choice
            pool = pool[pool != choice]
            continue
        # dead end: trade pool values into earlier slots until one frees i.
        # Swaps that keep the prefix valid stand even when i stays blocked;
        # the resulting random walk unjams tails a single swap cannot fix.
        rescued = False
        for _ in range(rescue_tries):
            v = int(pool[rng.integers(pool.size)])
            j = int(rng.integers(i))
            old = int(perm[j])
            if not _fits_at(perm, i, j, v, s):
                continue
            perm[j] = v
            pool = np.append(pool[pool != v], old)
            recent = perm[max(0, i - s):i]
            feasible = pool[np.all(np.abs(pool[:, None] - recent[None, :]) > s, axis=1)]
            if feasible.size == 0:
                continue
            choice = int(feasible[rng.integers(feasible.size)])
            perm[i] = choice
            pool = pool[pool != choice]
            rescued = True
            break
        if not rescued:
            return None
    return perm


def build_interleaver(kind: str, k: int, seed: int = 0, s: int | None = None) -> Interleaver:
    """Construct a verified interleaver.

    kind "random": a uniform permutation.  kind "s_random": positions are
    filled left to right, each drawn uniformly among the still-unused
    values whose distance to the previous S images exceeds S (default
    S = floor(sqrt(k/2))).  A dead end swaps leftover values into earlier
    slots until the blocked position frees up; only if that walk stalls
    does the attempt restart with fresh randomness.
    """
    if k < 2:
        raise ValueError("interleaver size must be at least 2")
    kind = kind.replace("-", "_").lower()
    if kind == "srandom":
        kind = "s_random"
    rng = np.random.default_rng(seed)
    if kind == "random":
        return Interleaver(rng.permutation(k), kind="random")
    if kind != "s_random":
        raise ValueError(f"unknown interleaver kind {kind!r}")
    s_val = int(math.isqrt(k // 2)) if s is None else int(s)
    for _restart in range(40):
        perm = _s_random_attempt(rng, k, s_val, rescue_tries=3000)
        if perm is not None:
            il = Interleaver(perm, kind="s_random", s_param=s_val)
            il.verify()
            return il
    raise ValueError(f"S-random construction failed after 40 attempts; try S < {s_val}")


@dataclass(frozen=True, eq=False)
class TurboSpec:
    """Constituent code, interleaver, and puncturing choice of a turbo code."""

    interleaver: Interleaver
    constituent: CodeSpec = TURBO_CONSTITUENT
    punctured: bool = True

    def __post_init__(self) -> None:
        if self.constituent.g1 != self.constituent.h:
            raise ValueError("turbo constituent must be systematic (g1 = h)")

    @property
    def k(self) -> int:
        return self.interleaver.k

    @property
    def rate(self) -> float:
        return 0.5 if self.punctured else 1.0 / 3.0

    @property
    def n_coded(self) -> int:
        m = self.constituent.memory
        if self.punctured:
            return 2 * self.k + 2 * m
        return 3 * self.k + 2 * m


def _encode_batch(spec: CodeSpec, info: np.ndarray, terminate: bool):
    tr = build_trellis(spec)
    n_tail = tr.memory if terminate else 0
    B, k = info.shape
    coded = np.zeros((B, 2 * (k + n_tail)), dtype=np.int8)
    tail_u = np.zeros((B, max(n_tail, 1)), dtype=np.int8)
    conv_encode_kernel(info, tr.next_state, tr.out_bits, tr.u_term, n_tail, coded, tail_u)
    return coded, tail_u[:, :n_tail]


def turbo_encode(spec: TurboSpec, info) -> np.ndarray:
    """Encode a (B, k) or (k,) info block into the wire format above."""
    bits = np.asarray(info, dtype=np.int8)
    squeeze = bits.ndim == 1
    if squeeze:
        bits = bits[None, :]
    if bits.shape[1] != spec.k:
        raise ValueError(f"info length {bits.shape[1]} does not match interleaver size {spec.k}")
    k = spec.k
    coded1, _ = _encode_batch(spec.constituent, bits, terminate=True)
    coded2, _ = _encode_batch(spec.constituent, spec.interleaver.apply(bits), terminate=False)
    par1 = coded1[:, 1::2][:, :k]
    tail = coded1[:, 2 * k:]
    tail_sys = tail[:, 0::2]
    tail_par1 = tail[:, 1::2]
    par2 = coded2[:, 1::2]
    if spec.punctured:
        par1 = par1[:, 0::2]
        par2 = par2[:, 1::2]
    out = np.concatenate([bits, par1, par2, tail_sys, tail_par1], axis=1)
    return out[0] if squeeze else out


def bcjr_decode(spec: CodeSpec, channel_llrs, apriori_total, terminated: bool = True):
    """Exact log-MAP decoding of one systematic constituent.

    channel_llrs: (..., T, 2) or (..., 2T) systematic/parity pairs, T the
    number of trellis steps (k + m when terminated).  apriori_total:
    (..., k) total prior on the info bits.  Returns (posterior, extrinsic)
    over the k data steps, with posterior = Lsys + apriori_total +
    extrinsic by construction.
    """
    if spec.g1 != spec.h:
        raise ValueError("bcjr_decode requires a systematic constituent (g1 = h)")
    llrs = np.asarray(channel_llrs, dtype=np.float64)
    if llrs.ndim >= 2 and llrs.shape[-1] == 2:
        llrs = llrs.reshape(*llrs.shape[:-2], -1)
    squeeze = llrs.ndim == 1
    if squeeze:
        llrs = llrs[None, :]
    if not np.all(np.isfinite(llrs)):
        raise ValueError("channel LLRs must be finite")
    B = llrs.shape[0]
    T = llrs.shape[1] // 2
    m = spec.memory if terminated else 0
    k = T - m
    la = np.asarray(apriori_total, dtype=np.float64)
    if la.ndim == 1:
        la = la[None, :]
    if la.shape != (B, k):
        raise ValueError(f"apriori shape {la.shape} does not match ({B}, {k})")
    if not np.all(np.isfinite(la)):
        raise ValueError("a-priori LLRs must be finite")
    steps = llrs.reshape(B, T, 2)
    la_full = np.zeros((B, T))
    la_full[:, :k] = la
    tr = build_trellis(spec)
    posterior = np.zeros((B, T))
    bcjr_kernel(
        np.ascontiguousarray(steps[:, :, 0]), np.ascontiguousarray(steps[:, :, 1]),
        la_full, tr.next_state, np.ascontiguousarray(tr.out_bits[:, :, 1]),
        terminated, posterior,
    )
    post = posterior[:, :k]
    ext = post - steps[:, :k, 0] - la
    if squeeze:
        return post[0], ext[0]
    return post, ext


@dataclass
class DecoderState:
    """Final per-frame decoder internals: extrinsics, posterior, iterations used."""

    extrinsic_1: np.ndarray
    extrinsic_2: np.ndarray
    posterior: np.ndarray
    iteration: np.ndarray


def _unpack(spec: TurboSpec, llrs: np.ndarray):
    k = spec.k
    m = spec.constituent.memory
    B = llrs.shape[0]
    sys = llrs[:, :k]
    par1 = np.zeros((B, k))
    par2 = np.zeros((B, k))
    if spec.punctured:
        n1 = (k + 1) // 2
        par1[:, 0::2] = llrs[:, k:k + n1]
        par2[:, 1::2] = llrs[:, k + n1:2 * k]
        tail = llrs[:, 2 * k:]
    else:
        par1 = llrs[:, k:2 * k].copy()
        par2 = llrs[:, 2 * k:3 * k].copy()
        tail = llrs[:, 3 * k:]
    tail_sys = tail[:, :m]
    tail_par1 = tail[:, m:]
    return sys, par1, par2, tail_sys, tail_par1


def turbo_decode(spec: TurboSpec, channel_llrs, external_api=None, max_iters: int = 10,
                 init_extrinsic=None):
    """Iterative decoding; returns (hard decisions, DecoderState).

    external_api: (..., k) LLRs from side information, or None.  A frame
    exits early once its hard decisions survive a full iteration
    unchanged; every frame is decoded independently of the rest of the
    batch, so batching never changes results.

    init_extrinsic: (..., k) natural-order decoder-2 extrinsic from a
    previous call (DecoderState.extrinsic_2), or None for a cold start.
    Chaining max_iters=1 calls through it reproduces one longer run
    exactly, which lets an outer loop splice its own message exchange
    between turbo iterations.
    """
    llrs = np.asarray(channel_llrs, dtype=np.float64)
    squeeze = llrs.ndim == 1
    if squeeze:
        llrs = llrs[None, :]
    if llrs.shape[1] != spec.n_coded:
        raise ValueError(f"expected {spec.n_coded} channel LLRs, got {llrs.shape[1]}")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    B = llrs.shape[0]
    k = spec.k
    m = spec.constituent.memory
    if external_api is None:
        api = np.zeros((B, k))
    else:
        api = np.asarray(external_api, dtype=np.float64)
        if api.ndim == 1:
            api = api[None, :]
        if api.shape != (B, k):
            raise ValueError(f"external API shape {api.shape} does not match ({B}, {k})")
        api = api.copy()
    if init_extrinsic is None:
        ext2_init = np.zeros((B, k))
    else:
        ext2_init = np.asarray(init_extrinsic, dtype=np.float64)
        if ext2_init.ndim == 1:
            ext2_init = ext2_init[None, :]
        if ext2_init.shape != (B, k):
            raise ValueError(
                f"init_extrinsic shape {ext2_init.shape} does not match ({B}, {k})"
            )
        if not np.all(np.isfinite(ext2_init)):
            raise ValueError("init_extrinsic must be finite")
        ext2_init = np.clip(ext2_init, -EXTRINSIC_CLAMP, EXTRINSIC_CLAMP)

    sys, par1, par2, tail_sys, tail_par1 = _unpack(spec, llrs)
    tr = build_trellis(spec.constituent)
    perm = spec.interleaver.permutation
    inv = spec.interleaver.inverse

    lsys1 = np.concatenate([sys, tail_sys], axis=1)
    lpar1 = np.concatenate([par1, tail_par1], axis=1)
    lsys2 = sys[:, perm].copy()
    lpar2 = par2

    out_hard = np.zeros((B, k), dtype=np.int8)
    out_post = np.zeros((B, k))
    out_ext1 = np.zeros((B, k))
    out_ext2 = np.zeros((B, k))
    iters_used = np.zeros(B, dtype=np.int64)

    active = np.arange(B)
    ext2_nat = ext2_init
    prev_hard: np.ndarray | None = None
    par_out = np.ascontiguousarray(tr.out_bits[:, :, 1])

    for it in range(1, max_iters + 1):
        prior1 = ext2_nat + api
        la_full = np.zeros((active.size, k + m))
        la_full[:, :k] = prior1
        post1 = np.zeros((active.size, k + m))
        bcjr_kernel(lsys1, lpar1, la_full, tr.next_state, par_out, True, post1)
        ext1 = np.clip(post1[:, :k] - sys - prior1, -EXTRINSIC_CLAMP, EXTRINSIC_CLAMP)

        prior2 = (ext1 + api)[:, perm]
        post2 = np.zeros((active.size, k))
        bcjr_kernel(lsys2, lpar2, prior2, tr.next_state, par_out, False, post2)
        ext2 = np.clip(post2 - lsys2 - prior2, -EXTRINSIC_CLAMP, EXTRINSIC_CLAMP)
        ext2_nat = ext2[:, inv]

        post_nat = post2[:, inv]
        hard = (post_nat < 0).astype(np.int8)
        stable = (
            np.all(hard == prev_hard, axis=1)
            if prev_hard is not None
            else np.zeros(active.size, dtype=bool)
        )
        done = stable | (it == max_iters)
        if np.any(done):
            sel = active[done]
            out_hard[sel] = hard[done]
            out_post[sel] = post_nat[done]
            out_ext1[sel] = ext1[done]
            out_ext2[sel] = ext2_nat[done]
            iters_used[sel] = it
        keep = ~done
        if not np.any(keep):
            break
        active = active[keep]
        prev_hard = hard[keep]
        ext2_nat = ext2_nat[keep]
        api = api[keep]
        sys = sys[keep]
        lsys1 = lsys1[keep]
        lpar1 = lpar1[keep]
        lsys2 = lsys2[keep]
        lpar2 = lpar2[keep]

    state = DecoderState(out_ext1, out_ext2, out_post, iters_used)
    if squeeze:
        return out_hard[0], DecoderState(out_ext1[0], out_ext2[0], out_post[0], int(iters_used[0]))
    return out_hard, state


def enumerate_turbo_floor_spectrum(
    spec: TurboSpec, w_cap: int = 2, d_cap: int = 24
) -> WeightSpectrum:
    """Dominant low-weight turbo codewords for one concrete interleaver.

    Scans every placement of every constituent-1 self-terminating input
    pattern with weight <= w_cap, maps the input positions through the
    interleaver, and accumulates the full (punctured) turbo codeword
    weight when it does not exceed d_cap.  Encoder 2 need not
    self-terminate: its parity then runs to the block end and usually
    blows past d_cap.  Constituent events are enumerated up to parity
    weight 2*(d_cap - 2) + 2; longer events cannot reach d_cap except
    through pathological puncture alignment, a documented truncation.
    """
    if w_cap < 2 or w_cap > 4:
        raise ValueError("w_cap must lie in [2, 4]")
    if d_cap < 4:
        raise ValueError("d_cap too small to contain any turbo codeword")
    k = spec.k
    tr = build_trellis(spec.constituent)
    par_out = np.ascontiguousarray(tr.out_bits[:, :, 1])
    inv = spec.interleaver.inverse
    const_cap = 2 * (d_cap - 2) + 2
    counts: dict[tuple[int, int], int] = {}
    for w, _d, in_off, par_off, span in _event_iter(
        spec.constituent, d_max=const_cap, w_max=w_cap, collect_patterns=True
    ):
        if span > k:
            continue
        in_off_arr = np.array(in_off, dtype=np.int64)
        par_off_arr = np.array(par_off, dtype=np.int64)
        for i in range(k - span + 1):
            if spec.punctured:
                p1 = int(np.count_nonzero((i + par_off_arr) % 2 == 0))
            else:
                p1 = par_off_arr.size
            budget = d_cap - w - p1
            if budget < 0:
                continue
            pos2 = np.sort(inv[i + in_off_arr])
            p2 = rsc_sparse_weight(pos2, k, budget, spec.punctured, tr.next_state, par_out)
            if p2 > budget:
                continue
            key = (w, w + p1 + p2)
            counts[key] = counts.get(key, 0) + 1
    if not counts:
        raise ValueError(f"no turbo codewords found within w<={w_cap}, d<={d_cap}")
    return WeightSpectrum(tuple((w, d, b) for (w, d), b in counts.items()), k=k)

"""Numba kernels for the trellis codecs.

Every kernel loops frames in the outer dimension and touches nothing
across frames: no shared temporaries, no cross-frame reductions.  Results
are therefore bit-identical under any batching or process partitioning.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_NEG = -1.0e30  # effectively -inf for path metrics


@njit(cache=True, inline="always")
def _maxstar(a: float, b: float) -> float:
    # exact log-sum-exp of two terms
    if a < b:
        a, b = b, a
    return a + np.log1p(np.exp(b - a))


@njit(cache=True)
def conv_encode_kernel(info, next_state, out_bits, u_term, n_tail, coded, tail_u):
    """Encode a batch of frames; writes coded bits and the tail inputs.

    info: (B, k) int8; coded: (B, 2*(k+n_tail)) int8; tail_u: (B, n_tail) int8.
    """
    B, k = info.shape
    for b in range(B):
        s = 0
        for t in range(k):
            u = info[b, t]
            coded[b, 2 * t] = out_bits[s, u, 0]
            coded[b, 2 * t + 1] = out_bits[s, u, 1]
            s = next_state[s, u]
        for j in range(n_tail):
            u = u_term[s]
            t = k + j
            coded[b, 2 * t] = out_bits[s, u, 0]
            coded[b, 2 * t + 1] = out_bits[s, u, 1]
            tail_u[b, j] = u
            s = next_state[s, u]


@njit(cache=True)
def viterbi_kernel(
    Lch, La, prev_state, prev_u, prev_out, u_term, n_tail, terminated, info_hat
):
    """Max-metric sequence decoding with additive a-priori branch terms.

    Lch: (B, T, 2) channel LLRs with T = k + n_tail; La: (B, k) info priors.
    Branch metric: sum_j (1-2c_j)*Lch_j + (1-2u)*La (data steps only).
    Predecessors of each state are pre-sorted by (u, prev_state); a strict
    greater-than keeps the first candidate on ties, so ties break toward
    the 0 input deterministically.  Tail steps admit only the forced
    termination input of each predecessor.
    """
    B = Lch.shape[0]
    S = prev_state.shape[0]
    k = La.shape[1]
    T = k + n_tail
    for b in range(B):
        pm = np.full(S, _NEG)
        pm_new = np.full(S, _NEG)
        bp = np.zeros((T, S), dtype=np.int8)
        pm[0] = 0.0
        for t in range(T):
            l0 = Lch[b, t, 0]
            l1 = Lch[b, t, 1]
            for s in range(S):
                best = _NEG
                arg = 0
                for c in range(2):
                    ps = prev_state[s, c]
                    u = prev_u[s, c]
                    if t >= k and u != u_term[ps]:
                        continue
                    m = pm[ps]
                    if m <= _NEG:
                        continue
                    m += (1.0 - 2.0 * prev_out[s, c, 0]) * l0
                    m += (1.0 - 2.0 * prev_out[s, c, 1]) * l1
                    if t < k:
                        m += (1.0 - 2.0 * u) * La[b, t]
                    if m > best:
                        best = m
                        arg = c
                pm_new[s] = best
                bp[t, s] = arg
            for s in range(S):
                pm[s] = pm_new[s]
        if terminated:
            s = 0
        else:
            s = 0
            best = pm[0]
            for i in range(1, S):
                if pm[i] > best:
                    best = pm[i]
                    s = i
        for t in range(T - 1, -1, -1):
            c = bp[t, s]
            if t < k:
                info_hat[b, t] = prev_u[s, c]
            s = prev_state[s, c]


@njit(cache=True)
def rsc_sparse_weight(positions, k, budget, punctured, next_state, out_par):
    """Parity weight of an RSC fed ones at ``positions`` inside a k-block.

    Walks the trellis from the first one to self-termination or the block
    end (no tail), counting parity bits that survive puncturing (odd
    steps kept when ``punctured``).  Returns budget+1 as soon as the
    accumulated weight exceeds ``budget``.
    """
    s = 0
    weight = 0
    idx = 0
    n_pos = positions.shape[0]
    t = positions[0]
    while t < k:
        if idx < n_pos and t == positions[idx]:
            u = 1
            idx += 1
        else:
            u = 0
            if idx >= n_pos and s == 0:
                break
        p = out_par[s, u]
        if p == 1 and (not punctured or t % 2 == 1):
            weight += 1
            if weight > budget:
                return budget + 1
        s = next_state[s, u]
        t += 1
    return weight


@njit(cache=True)
def bcjr_kernel(Lsys, Lpar, La, next_state, out_par, terminated, posterior):
    """Exact log-MAP forward-backward pass for a systematic constituent.

    Lsys, Lpar, La, posterior: (B, T) float64.  Branch log-likelihood:
    0.5*(1-2u)*(Lsys+La) + 0.5*(1-2p)*Lpar.  Terminated frames pin the
    backward recursion at state 0; open frames start it uniform.  Both
    recursions are renormalized each step.  posterior[t] = ln(P(u_t=0)/
    P(u_t=1)) given the whole frame.
    """
    B, T = Lsys.shape
    S = next_state.shape[0]
    for b in range(B):
        gamma = np.empty((T, S, 2))
        for t in range(T):
            half_in = 0.5 * (Lsys[b, t] + La[b, t])
            half_par = 0.5 * Lpar[b, t]
            for s in range(S):
                for u in range(2):
                    g = half_in if u == 0 else -half_in
                    if out_par[s, u] == 0:
                        g += half_par
                    else:
                        g -= half_par
                    gamma[t, s, u] = g

        alpha = np.full((T + 1, S), _NEG)
        alpha[0, 0] = 0.0
        for t in range(T):
            for s in range(S):
                a = alpha[t, s]
                if a <= _NEG:
                    continue
                for u in range(2):
                    ns = next_state[s, u]
                    m = a + gamma[t, s, u]
                    if alpha[t + 1, ns] <= _NEG:
                        alpha[t + 1, ns] = m
                    else:
                        alpha[t + 1, ns] = _maxstar(alpha[t + 1, ns], m)
            peak = alpha[t + 1, 0]
            for s in range(1, S):
                if alpha[t + 1, s] > peak:
                    peak = alpha[t + 1, s]
            for s in range(S):
                if alpha[t + 1, s] > _NEG:
                    alpha[t + 1, s] -= peak

        beta = np.full((T + 1, S), _NEG)
        if terminated:
            beta[T, 0] = 0.0
        else:
            for s in range(S):
                beta[T, s] = 0.0
        for t in range(T - 1, -1, -1):
            for s in range(S):
                acc = _NEG
                for u in range(2):
                    nb = beta[t + 1, next_state[s, u]]
                    if nb <= _NEG:
                        continue
                    m = nb + gamma[t, s, u]
                    acc = m if acc <= _NEG else _maxstar(acc, m)
                beta[t, s] = acc
            peak = beta[t, 0]
            for s in range(1, S):
                if beta[t, s] > peak:
                    peak = beta[t, s]
            for s in range(S):
                if beta[t, s] > _NEG:
                    beta[t, s] -= peak

        for t in range(T):
            num = _NEG
            den = _NEG
            for s in range(S):
                a = alpha[t, s]
                if a <= _NEG:
                    continue
                for u in range(2):
                    nb = beta[t + 1, next_state[s, u]]
                    if nb <= _NEG:
                        continue
                    m = a + gamma[t, s, u] + nb
                    if u == 0:
                        num = m if num <= _NEG else _maxstar(num, m)
                    else:
                        den = m if den <= _NEG else _maxstar(den, m)
            posterior[b, t] = num - den

"""Two correlated sources, two channels, one receiver exchanging decisions.

Each node sends its k-bit frame through the rate-1/2 punctured turbo code
over its own channel.  The receiver runs both turbo decoders in lockstep:
after every turbo iteration each decoder hands its hard decisions to the
other, which takes them as side information on the next iteration,
weighted by the agreement fraction of the two current decision vectors
(starting from the agnostic 0.5, where the prior vanishes).  Turbo state
carries across iterations, so the exchange rides on top of the usual
extrinsic schedule instead of restarting it.  The distributed-source-
coding baseline sends ideally compressed (hence independent) bits through
the rate-1/3 unpunctured code at the same channel SNR, which works out to
a gamma_b higher by 10*log10(3/2) dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .apriori import _as_reliability, reliability_to_llr
from .channel import ChannelConfig, channel_llrs, transmit
from .turbo import TurboSpec, build_interleaver, turbo_decode, turbo_encode

__all__ = [
    "ScenarioConfig",
    "JscdResult",
    "run_jscd_frame",
    "run_dsc_baseline",
    "simulate_jscd_frames",
    "simulate_dsc_frames",
    "diversity_slope",
]


@dataclass(frozen=True)
class ScenarioConfig:
    """JSCD scenario: both links share SNR statistics, noise is independent.

    snr_db is the channel SNR = 2*r*gamma_b (the mean SNR under fading).
    Each decoder runs `iterations` turbo iterations; hard decisions and
    the agreement estimate cross over after every one.
    """

    k: int = 1000
    rho_source: float = 0.939
    snr_db: float = 0.0
    fading: str = "none"
    iterations: int = 10
    interleaver_kind: str = "random"
    interleaver_seed: int = 0
    oracle_rho_est: bool = False

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        _as_reliability(self.rho_source)

    def turbo_spec(self, punctured: bool = True) -> TurboSpec:
        il = build_interleaver(self.interleaver_kind, self.k, seed=self.interleaver_seed)
        return TurboSpec(interleaver=il, punctured=punctured)

    def channel_config(self, rate: float) -> ChannelConfig:
        # SNR = 2*r*gamma_b, so gamma_b(dB) = SNR(dB) - 10*log10(2*r)
        gamma_db = self.snr_db - 10.0 * math.log10(2.0 * rate)
        return ChannelConfig(gamma_b_db=gamma_db, rate=rate, fading=self.fading)


@dataclass
class JscdResult:
    """Outcome of one decoded frame pair."""

    ber_x: float
    ber_y: float
    rho_estimates: list[float]
    iterations_used: int


def _frame_rngs(seeds) -> list[np.random.Generator]:
    return [
        s if isinstance(s, np.random.Generator) else np.random.default_rng(s) for s in seeds
    ]


def _api_llrs(side_bits: np.ndarray, rho_est: np.ndarray) -> np.ndarray:
    """Per-frame reliability estimates to signed prior LLRs."""
    mags = np.array([reliability_to_llr(float(r)) for r in rho_est])
    return mags[:, None] * (1.0 - 2.0 * side_bits.astype(np.float64))


def _estimate_batch(x_hat: np.ndarray, y_hat: np.ndarray) -> np.ndarray:
    k = x_hat.shape[1]
    agree = np.count_nonzero(x_hat == y_hat, axis=1) / k
    return np.clip(agree, 0.5, 1.0 - 1.0 / (2 * k))


def simulate_jscd_frames(cfg: ScenarioConfig, frame_seeds) -> dict:
    """Decode a batch of frame pairs; one seed (or Generator) per frame.

    Per frame the draw order is fixed: source x, correlation flips for y,
    channel X (fade then noise), channel Y.  Iteration 1 runs both
    decoders without a prior; from iteration 2 each decoder takes the
    partner's previous hard decisions as side information at the current
    agreement estimate while its own turbo state carries over.  Returns
    per-frame bit error counts for both sources, the estimate trajectory
    (column 0 is the agnostic 0.5, frozen at the final value for frames
    that stop early), and the number of iterations used.
    """
    rngs = _frame_rngs(frame_seeds)
    B = len(rngs)
    k = cfg.k
    rho = _as_reliability(cfg.rho_source).value
    spec = cfg.turbo_spec(punctured=True)
    ch = cfg.channel_config(rate=0.5)

    x_src = np.zeros((B, k), dtype=np.int8)
    y_src = np.zeros((B, k), dtype=np.int8)
    llr_x = np.zeros((B, spec.n_coded))
    llr_y = np.zeros((B, spec.n_coded))
    for b, rng in enumerate(rngs):
        x_src[b] = rng.integers(0, 2, size=k, dtype=np.int8)
        flips = (rng.random(k) < (1.0 - rho)).astype(np.int8)
        y_src[b] = x_src[b] ^ flips
        llr_x[b] = channel_llrs(transmit(turbo_encode(spec, x_src[b]), ch, rng))
        llr_y[b] = channel_llrs(transmit(turbo_encode(spec, y_src[b]), ch, rng))

    M = cfg.iterations
    out_err_x = np.zeros(B, dtype=np.int64)
    out_err_y = np.zeros(B, dtype=np.int64)
    out_iters = np.zeros(B, dtype=np.int64)
    rho_traj = np.full((B, M + 1), 0.5)

    active = np.arange(B)
    x_hat = np.zeros((0, k), dtype=np.int8)
    y_hat = np.zeros((0, k), dtype=np.int8)
    ext_x = None
    ext_y = None

    for m in range(1, M + 1):
        n_act = active.size
        if m == 1:
            # no partner decisions exist yet, so neither decoder has a prior
            api_x = None
            api_y = None
        else:
            rho_m = (
                np.full(n_act, rho) if cfg.oracle_rho_est else _estimate_batch(x_hat, y_hat)
            )
            api_x = _api_llrs(y_hat, rho_m)
            api_y = _api_llrs(x_hat, rho_m)
        x_new, st_x = turbo_decode(spec, llr_x, api_x, max_iters=1, init_extrinsic=ext_x)
        y_new, st_y = turbo_decode(spec, llr_y, api_y, max_iters=1, init_extrinsic=ext_y)
        ext_x, ext_y = st_x.extrinsic_2, st_y.extrinsic_2

        rho_traj[active, m] = _estimate_batch(x_new, y_new)
        if m == 1:
            stable = np.zeros(n_act, dtype=bool)
        else:
            stable = np.all(x_new == x_hat, axis=1) & np.all(y_new == y_hat, axis=1)
        done = stable | (m == M)

        sel = active[done]
        out_err_x[sel] = np.count_nonzero(x_new[done] != x_src[done], axis=1)
        out_err_y[sel] = np.count_nonzero(y_new[done] != y_src[done], axis=1)
        out_iters[sel] = m
        rho_traj[sel, m + 1 :] = rho_traj[sel, m][:, None]

        keep = ~done
        if not np.any(keep):
            break
        active = active[keep]
        x_src, y_src = x_src[keep], y_src[keep]
        llr_x, llr_y = llr_x[keep], llr_y[keep]
        x_hat, y_hat = x_new[keep], y_new[keep]
        ext_x, ext_y = ext_x[keep], ext_y[keep]

    return {
        "bit_errors_x": out_err_x,
        "bit_errors_y": out_err_y,
        "rho_trajectory": rho_traj,
        "iterations_used": out_iters,
    }


def run_jscd_frame(cfg: ScenarioConfig, seed) -> JscdResult:
    """Single frame-pair convenience wrapper around simulate_jscd_frames."""
    res = simulate_jscd_frames(cfg, [seed])
    iters = int(res["iterations_used"][0])
    return JscdResult(
        ber_x=float(res["bit_errors_x"][0]) / cfg.k,
        ber_y=float(res["bit_errors_y"][0]) / cfg.k,
        rho_estimates=[float(v) for v in res["rho_trajectory"][0, : iters + 1]],
        iterations_used=iters,
    )


def simulate_dsc_frames(cfg: ScenarioConfig, frame_seeds) -> dict:
    """Separate-decoding baseline at the same channel SNR.

    Ideal compression of the correlated pair leaves independent uniform
    bits, so the baseline is modelled as two independent frames through
    the rate-1/3 unpunctured code with no prior.  The decoder gets the
    full iteration budget of the joint scheme.
    """
    rngs = _frame_rngs(frame_seeds)
    B = len(rngs)
    k = cfg.k
    spec = cfg.turbo_spec(punctured=False)
    ch = cfg.channel_config(rate=1.0 / 3.0)

    x_src = np.zeros((B, k), dtype=np.int8)
    y_src = np.zeros((B, k), dtype=np.int8)
    llr_x = np.zeros((B, spec.n_coded))
    llr_y = np.zeros((B, spec.n_coded))
    for b, rng in enumerate(rngs):
        x_src[b] = rng.integers(0, 2, size=k, dtype=np.int8)
        y_src[b] = rng.integers(0, 2, size=k, dtype=np.int8)
        llr_x[b] = channel_llrs(transmit(turbo_encode(spec, x_src[b]), ch, rng))
        llr_y[b] = channel_llrs(transmit(turbo_encode(spec, y_src[b]), ch, rng))

    budget = cfg.iterations
    x_hat, _ = turbo_decode(spec, llr_x, None, max_iters=budget)
    y_hat, _ = turbo_decode(spec, llr_y, None, max_iters=budget)

    M = cfg.iterations
    return {
        "bit_errors_x": np.count_nonzero(x_hat != x_src, axis=1).astype(np.int64),
        "bit_errors_y": np.count_nonzero(y_hat != y_src, axis=1).astype(np.int64),
        "rho_trajectory": np.full((B, M + 1), 0.5),
        "iterations_used": np.full(B, M, dtype=np.int64),
    }


def run_dsc_baseline(cfg: ScenarioConfig, seed) -> float:
    """BER of one baseline frame pair (2k information bits)."""
    res = simulate_dsc_frames(cfg, [seed])
    return float(res["bit_errors_x"][0] + res["bit_errors_y"][0]) / (2 * cfg.k)


def diversity_slope(mean_snr_db, ber, bit_errors=None, min_errors: int = 100):
    """Least-squares slope of log10(BER) against mean SNR in dB/10.

    On a block-fading channel the magnitude of this slope is the apparent
    diversity order.  Points need enough errors to be trusted; pass the
    per-point error counts to enforce that.
    """
    snr = np.asarray(mean_snr_db, dtype=np.float64)
    p = np.asarray(ber, dtype=np.float64)
    if snr.shape != p.shape or snr.ndim != 1:
        raise ValueError("mean_snr_db and ber must be 1-D arrays of equal length")
    if snr.size < 3:
        raise ValueError("need at least 3 points for a slope fit")
    if np.any(p <= 0.0):
        raise ValueError("BER values must be positive")
    if bit_errors is not None:
        errs = np.asarray(bit_errors)
        if errs.shape != p.shape:
            raise ValueError("bit_errors must match ber in shape")
        if np.any(errs < min_errors):
            raise ValueError(f"every point needs at least {min_errors} bit errors")
    slope, _ = np.polyfit(snr / 10.0, np.log10(p), 1)
    return float(-slope)

"""BPSK transmission over AWGN with optional block-Rayleigh fading.

Everything is kept in the unit-amplitude normalization: transmitted
symbols are +-1, the receiver divides out the (perfectly known) fade, and
the per-sample noise variance is 1/(2*r*gamma_b*fade^2).  The reported
channel SNR is 2*r*gamma_b; under fading fade^2 has unit mean, so that
value is also the mean SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import db_to_linear

__all__ = ["ChannelConfig", "ReceivedFrame", "transmit", "channel_llrs"]

_FADING_KINDS = ("none", "block_rayleigh")


@dataclass(frozen=True)
class ChannelConfig:
    gamma_b_db: float
    rate: float
    fading: str = "none"

    def __post_init__(self) -> None:
        if not 0.0 < self.rate <= 1.0:
            raise ValueError("rate must lie in (0, 1]")
        if self.fading not in _FADING_KINDS:
            raise ValueError(f"fading must be one of {_FADING_KINDS}")

    @property
    def gamma_b(self) -> float:
        return db_to_linear(self.gamma_b_db)

    @property
    def mean_snr_db(self) -> float:
        return 10.0 * math.log10(2.0 * self.rate * self.gamma_b)


@dataclass(frozen=True)
class ReceivedFrame:
    """Fade-normalized samples with their per-frame noise variance.

    samples: (B, n) float64; fade_amplitude, noise_variance: (B,) float64.
    The fade is constant within each frame (block fading).
    """

    samples: np.ndarray
    fade_amplitude: np.ndarray
    noise_variance: np.ndarray


def transmit(coded, cfg: ChannelConfig, seed) -> ReceivedFrame:
    """Send coded bits through the channel; one fade draw per frame.

    Draw order is fixed (fades first, then the noise block) so a given
    seed always produces the same frame regardless of caller batching.
    """
    bits = np.asarray(coded, dtype=np.int8)
    squeeze = bits.ndim == 1
    if squeeze:
        bits = bits[None, :]
    B = bits.shape[0]
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    base_var = 1.0 / (2.0 * cfg.rate * cfg.gamma_b)
    if cfg.fading == "block_rayleigh":
        fade = np.sqrt(rng.exponential(1.0, size=B))
    else:
        fade = np.ones(B)
    noise_var = base_var / fade**2
    symbols = 1.0 - 2.0 * bits.astype(np.float64)
    samples = symbols + rng.standard_normal(bits.shape) * np.sqrt(noise_var)[:, None]
    if squeeze:
        return ReceivedFrame(samples[0], fade[0], noise_var[0])
    return ReceivedFrame(samples, fade, noise_var)


def channel_llrs(frame: ReceivedFrame) -> np.ndarray:
    """LLR of code bit 0 per sample: 2*y/sigma^2 (fade already absorbed)."""
    var = np.asarray(frame.noise_variance)
    if var.ndim == 0:
        return 2.0 * frame.samples / float(var)
    return 2.0 * frame.samples / var[:, None]

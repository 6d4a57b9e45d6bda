"""Side-information model: reliabilities, a-priori LLRs, and the A-factor.

The decoder is assumed to hold a noisy copy ``x_tilde`` of the information
bits where each bit independently equals the true bit with probability
``rho`` (the true reliability).  The receiver works with an estimate
``rho_est`` of that reliability; every formula that consumes side
information does so through the scalar LLR ``ln(rho_est/(1-rho_est))``
attached to each side-information bit.  Natural logarithms throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Reliability",
    "SideInfo",
    "generate_side_info",
    "reliability_to_llr",
    "apriori_llrs",
    "a_factor",
    "estimate_correlation",
]

# Upper clamp for analytic contexts where no block length is in scope.
_RELIABILITY_CEIL = 1.0 - 1e-6


@dataclass(frozen=True)
class Reliability:
    """Probability that a side-information bit equals the true bit.

    The value is clamped into [0.5, 1) on construction: 1.0 maps to
    1 - 1e-6 so the associated LLR stays finite.  Values below 0.5 or
    above 1.0 are rejected rather than clamped; anti-correlated
    estimates are the caller's concern (see ``estimate_correlation``).
    """

    value: float

    def __post_init__(self) -> None:
        v = float(self.value)
        if not math.isfinite(v) or v < 0.5 or v > 1.0:
            raise ValueError(f"reliability must lie in [0.5, 1.0], got {self.value!r}")
        object.__setattr__(self, "value", min(v, _RELIABILITY_CEIL))

    @classmethod
    def clamped(cls, raw: float, k: int | None = None) -> "Reliability":
        """Clamp an arbitrary estimate into the valid range.

        With a block length ``k`` the ceiling is 1 - 1/(2k) (half a count
        below certainty); otherwise the fixed analytic ceiling applies.
        Estimates below 0.5 clamp up to 0.5 rather than flipping sign.
        """
        ceil = 1.0 - 1.0 / (2 * k) if k is not None else _RELIABILITY_CEIL
        return cls(min(max(float(raw), 0.5), ceil))


def _as_reliability(rho: "Reliability | float") -> Reliability:
    return rho if isinstance(rho, Reliability) else Reliability(float(rho))


@dataclass(frozen=True)
class SideInfo:
    """A side-information bit vector with its true and estimated reliability.

    ``bits`` has one entry per information bit; a leading batch axis is
    allowed (shape ``(k,)`` or ``(batch, k)``).
    """

    bits: np.ndarray
    true_reliability: Reliability
    estimated_reliability: Reliability

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits, dtype=np.int8)
        if bits.ndim not in (1, 2) or bits.shape[-1] < 1:
            raise ValueError("side-information bits must be a (k,) or (batch, k) array")
        object.__setattr__(self, "bits", bits)


def generate_side_info(
    source,
    rho: Reliability | float,
    rng_seed,
    rho_est: Reliability | float | None = None,
) -> SideInfo:
    """Draw side information correlated with ``source``.

    Each bit of ``source`` is copied and independently flipped with
    probability ``1 - rho``.  ``rng_seed`` may be an integer seed or a
    ``numpy.random.Generator``.  ``rho_est`` defaults to the true
    reliability (perfect estimation).
    """
    rho_r = _as_reliability(rho)
    est_r = rho_r if rho_est is None else _as_reliability(rho_est)
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    bits = np.asarray(source, dtype=np.int8)
    flips = rng.random(bits.shape) < (1.0 - rho_r.value)
    return SideInfo(bits ^ flips.astype(np.int8), rho_r, est_r)


def reliability_to_llr(rho_est: Reliability | float) -> float:
    """LLR magnitude ln(rho_est / (1 - rho_est)) of one side-information bit."""
    v = _as_reliability(rho_est).value
    return math.log(v / (1.0 - v))


def apriori_llrs(info: SideInfo) -> np.ndarray:
    """Per-bit a-priori LLRs: +L for x_tilde=0, -L for x_tilde=1."""
    llr = reliability_to_llr(info.estimated_reliability)
    return llr * (1.0 - 2.0 * info.bits.astype(np.float64))


def a_factor(rho: Reliability | float, rho_est: Reliability | float) -> float:
    """The A-factor scaling pairwise error probabilities as A**w.

    A = (1-rho)*sqrt(rho_est/(1-rho_est)) + rho*sqrt((1-rho_est)/rho_est).
    Equals 1 when rho_est = 0.5 (no usable side information) and
    2*sqrt(rho*(1-rho)) under perfect estimation.
    """
    p = _as_reliability(rho).value
    q = _as_reliability(rho_est).value
    ratio = math.sqrt(q / (1.0 - q))
    return (1.0 - p) * ratio + p / ratio


def estimate_correlation(x_hat, y_hat) -> Reliability:
    """Fraction of agreeing positions, clamped into [0.5, 1 - 1/(2k)]."""
    x = np.asarray(x_hat, dtype=np.int8)
    y = np.asarray(y_hat, dtype=np.int8)
    if x.shape != y.shape or x.ndim != 1 or x.size < 1:
        raise ValueError("estimate_correlation expects two equal-length bit vectors")
    k = x.size
    agreements = int(np.count_nonzero(x == y))
    return Reliability.clamped(agreements / k, k=k)

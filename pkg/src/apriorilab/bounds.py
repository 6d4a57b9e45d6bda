"""Closed-form error probabilities and bounds for decoding with a-priori
information.

All formulas share the conventions of the rest of the package: BPSK over
AWGN with rate-r coding, gamma_b = Eb/N0 in linear units, side information
of true reliability rho estimated as rho_est, and the A-factor

    A = (1-rho)*sqrt(rho_est/(1-rho_est)) + rho*sqrt((1-rho_est)/rho_est)

attenuating (A < 1) or amplifying (A > 1) pairwise error probabilities as
A**w, w being the information-weight of the competing error event.

Three kernels for the pairwise error probability of an event at code
distance d and information distance w are provided:

exact      binomial mixture over the number of disagreeing side bits,
           each term a Q-function with a signed API shift,
approx     0.5*erfc(sqrt(r*d*gamma_b)) * A**w,
chernoff   exp(-r*d*gamma_b) * A**w  (upper bound on the approx kernel).

On top of these sit the union bounds for convolutional codes, the turbo
error-floor fits, the random-coding ensemble bound with its cutoff-rate
threshold, and the Slepian-Wolf rate arithmetic for the two-source case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Iterable, Sequence

import numpy as np
from scipy.special import erfc, gammaln

from .apriori import Reliability, _as_reliability, a_factor, reliability_to_llr

if TYPE_CHECKING:  # pragma: no cover
    from .convolutional import WeightSpectrum

__all__ = [
    "PairwiseParams",
    "BoundCurve",
    "pairwise_exact",
    "pairwise_approx",
    "pairwise_chernoff",
    "design_metric",
    "uncoded_exact",
    "conv_union_bound",
    "invert_bound_for_gamma",
    "random_code_bound",
    "eta_factor",
    "r1_rate",
    "cutoff_threshold",
    "turbo_error_floor",
    "union_floor_from_spectrum",
    "slepian_wolf_rates",
    "ber_crossing_db",
    "db_to_linear",
    "linear_to_db",
]


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ValueError("dB conversion needs a positive value")
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class PairwiseParams:
    """Parameters of one pairwise error event.

    d: Hamming distance between the competing codewords.
    w: Hamming distance between the corresponding information words.
    r: code rate in (0, 1].
    gamma_b: Eb/N0, linear.
    """

    d: int
    w: int
    r: float
    gamma_b: float

    def __post_init__(self) -> None:
        if self.d < 0 or self.w < 0:
            raise ValueError("distances must be nonnegative")
        if not 0.0 < self.r <= 1.0:
            raise ValueError("rate must lie in (0, 1]")
        if self.gamma_b <= 0.0:
            raise ValueError("gamma_b must be positive")


@dataclass(frozen=True)
class BoundCurve:
    """A bound evaluated on a gamma_b grid: ordered (dB, probability) pairs.

    Values are clamped to 1.0 for reporting; the raw kernels may exceed it.
    """

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        gammas = [g for g, _ in self.points]
        if any(b <= a for a, b in zip(gammas, gammas[1:])):
            raise ValueError("gamma_b_db grid must be strictly increasing")
        clamped = tuple((g, min(float(p), 1.0)) for g, p in self.points)
        probs = [p for _, p in clamped]
        if any(b > a + 1e-15 for a, b in zip(probs, probs[1:])):
            raise ValueError("bound curve must be non-increasing in gamma_b")
        object.__setattr__(self, "points", clamped)

    @classmethod
    def evaluate(cls, fn: Callable[[float], float], gamma_db_grid: Sequence[float]) -> "BoundCurve":
        """Evaluate ``fn`` (linear gamma_b -> probability) on a dB grid."""
        return cls(tuple((float(g), fn(db_to_linear(g))) for g in gamma_db_grid))

    @property
    def gammas_db(self) -> np.ndarray:
        return np.array([g for g, _ in self.points])

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.points])


def pairwise_exact(
    p: PairwiseParams, rho: Reliability | float, rho_est: Reliability | float
) -> float:
    """Exact pairwise error probability under the bit-flip API model.

    The number w_t of side-information bits that disagree with the true
    word on the w differing info positions is Binomial(w, 1-rho); each
    outcome shifts the decision statistic by L*(w - 2*w_t)/2, giving

      sum_{w_t} C(w,w_t) rho^(w-w_t) (1-rho)^w_t
                * 0.5*erfc( sqrt(r d g) + L*(w-2*w_t)/(4*sqrt(r d g)) )

    with L = ln(rho_est/(1-rho_est)).  The erfc argument is signed:
    side information that contradicts the true word (w_t > w/2) pushes
    terms above the no-API value.  Binomial weights are accumulated in
    the log domain and the sum is compensated (math.fsum).
    """
    if p.d < 1:
        raise ValueError("pairwise_exact needs d >= 1")
    rho_v = _as_reliability(rho).value
    llr = reliability_to_llr(rho_est)
    s = math.sqrt(p.r * p.d * p.gamma_b)
    if p.w == 0 or llr == 0.0:
        return 0.5 * erfc(s)
    terms = []
    log_rho = math.log(rho_v)
    log_neg = math.log(1.0 - rho_v)
    for wt in range(p.w + 1):
        log_weight = (
            gammaln(p.w + 1) - gammaln(wt + 1) - gammaln(p.w - wt + 1)
            + (p.w - wt) * log_rho + wt * log_neg
        )
        arg = s + llr * (p.w - 2 * wt) / (4.0 * s)
        terms.append(math.exp(log_weight) * 0.5 * erfc(arg))
    return math.fsum(terms)


def pairwise_approx(p: PairwiseParams, A: float) -> float:
    """Approximate pairwise error probability 0.5*erfc(sqrt(r d g))*A**w.

    Not a strict bound; validated empirically to sit within a few percent
    above the exact kernel once r*d*gamma_b dominates the API shift.
    May exceed 1 for pathological inputs; returned raw.
    """
    if A <= 0:
        raise ValueError("A must be positive")
    return 0.5 * erfc(math.sqrt(p.r * p.d * p.gamma_b)) * A**p.w


def pairwise_chernoff(p: PairwiseParams, A: float) -> float:
    """Chernoff kernel exp(-r d gamma_b) * A**w; upper-bounds the approx kernel."""
    if A <= 0:
        raise ValueError("A must be positive")
    return math.exp(-p.r * p.d * p.gamma_b) * A**p.w


def design_metric(d: int, w: int, r: float, gamma_b: float, A: float) -> float:
    """Effective distance d + w*ln(1/A)/(r*gamma_b) of an error event.

    Code design under API maximizes the minimum of this quantity over all
    events; at A=1 it degenerates to the usual free-distance criterion.
    """
    if A <= 0:
        raise ValueError("A must be positive")
    return d + w * math.log(1.0 / A) / (r * gamma_b)


def uncoded_exact(
    gamma_b: float, rho: Reliability | float, rho_est: Reliability | float
) -> float:
    """Bit error probability of uncoded BPSK with per-bit API.

    Identical to ``pairwise_exact`` at d=w=r=1: the side bit agrees with
    the truth w.p. rho (API helps) and disagrees otherwise (API hurts).
    """
    return pairwise_exact(PairwiseParams(1, 1, 1.0, gamma_b), rho, rho_est)


def conv_union_bound(
    spectrum: "WeightSpectrum",
    r: float,
    gamma_b: float,
    rho: Reliability | float,
    rho_est: Reliability | float,
    mode: str = "exact",
) -> float:
    """Union bound on BER: sum over the spectrum of beta * w * P_e(d, w).

    ``mode`` selects the pairwise kernel: "exact" (P_e1), "chernoff"
    (P_e2, equal to A * dT/dW at W=A, D=exp(-r*gamma_b) for the truncated
    series), or "approx".  The spectrum must be non-empty.
    """
    records = list(spectrum.records)
    if not records:
        raise ValueError("empty weight spectrum")
    A = a_factor(rho, rho_est)
    terms = []
    for w, d, beta in records:
        p = PairwiseParams(d, w, r, gamma_b)
        if mode == "exact":
            kernel = pairwise_exact(p, rho, rho_est)
        elif mode == "chernoff":
            kernel = pairwise_chernoff(p, A)
        elif mode == "approx":
            kernel = pairwise_approx(p, A)
        else:
            raise ValueError(f"unknown union-bound mode {mode!r}")
        terms.append(beta * w * kernel)
    return math.fsum(terms)


_BISECT_BRACKET = (1e-4, 1e3)
_BISECT_ITERS = 200
_BISECT_TOL = 1e-9


def invert_bound_for_gamma(
    curve: Callable[[float], float],
    target: float,
    bracket: tuple[float, float] = _BISECT_BRACKET,
) -> float:
    """Invert a monotone-decreasing bound: find gamma_b with curve(g) = target.

    Plain bisection, 200 iterations max, stopping at relative probability
    error 1e-9 or gamma interval 1e-9.  Raises if the target is not
    enclosed by the bracket.
    """
    lo, hi = bracket
    p_lo, p_hi = curve(lo), curve(hi)
    if not (p_hi <= target <= p_lo):
        raise ValueError(
            f"target {target:g} not reachable in bracket: curve spans [{p_hi:g}, {p_lo:g}]"
        )
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        p_mid = curve(mid)
        if abs(p_mid - target) <= _BISECT_TOL * target or (hi - lo) <= _BISECT_TOL:
            return mid
        if p_mid > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def eta_factor(A: float) -> float:
    """Rate gain eta = log2(2/(1+A)) of the API in the ensemble exponent."""
    if A <= 0:
        raise ValueError("A must be positive")
    return math.log2(2.0 / (1.0 + A))


def r1_rate(r: float, gamma_b: float) -> float:
    """Ensemble exponent rate R1 = log2(2/(1+exp(-r*gamma_b)))."""
    return math.log2(2.0 / (1.0 + math.exp(-r * gamma_b)))


def random_code_bound(n: int, k: int, gamma_b: float, A: float) -> float:
    """Ensemble-average union bound for random (n, k) codes with API.

    2^k * ((1+exp(-r*gamma_b))/2)^n * ((1+A)/2)^k with r = k/n, computed
    in the log2 domain; equivalently 2^(-n*(R1 - r*(1-eta))).
    """
    if k > n:
        raise ValueError("k must not exceed n")
    r = k / n
    log2_bound = (
        k
        + n * math.log2((1.0 + math.exp(-r * gamma_b)) / 2.0)
        + k * math.log2((1.0 + A) / 2.0)
    )
    return 2.0**log2_bound


def cutoff_threshold(r: float, eta: float) -> float:
    """Minimum gamma_b at which rate r is below the API-shifted cutoff rate.

    gamma_bt(eta) = (1/r) * ln(1 / (2^(1 - r*(1-eta)) - 1)).  The argument
    of the log must be positive: rates with r*(1-eta) >= 1 are not
    supportable at any SNR and raise.
    """
    denom = 2.0 ** (1.0 - r * (1.0 - eta)) - 1.0
    if denom <= 0.0:
        raise ValueError(f"rate r={r} not supportable at eta={eta}")
    return math.log(1.0 / denom) / r


def turbo_error_floor(k: int, r: float, gamma_b: float, d2t: int, A: float) -> float:
    """Dominant-term error floor (2/k)*erfc(sqrt(r*gamma_b*d2t))*A**2.

    k is the interleaver size; d2t the minimum turbo codeword weight over
    weight-2 inputs; the 2/k prefactor is the random-interleaving
    multiplicity estimate.  A=1 recovers the no-API floor.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    return (2.0 / k) * erfc(math.sqrt(r * gamma_b * d2t)) * A**2


def union_floor_from_spectrum(
    spectrum: "WeightSpectrum", r: float, gamma_b: float, A: float
) -> float:
    """Partial union bound from an enumerated turbo spectrum.

    sum over records of (beta*w/k) * 0.5*erfc(sqrt(r*gamma_b*d)) * A**w.
    The spectrum must carry the block length k it was enumerated for.
    """
    records = list(spectrum.records)
    if not records:
        raise ValueError("empty weight spectrum")
    if spectrum.k is None:
        raise ValueError("spectrum lacks the block length k needed for the floor")
    terms = [
        (beta * w / spectrum.k) * 0.5 * erfc(math.sqrt(r * gamma_b * d)) * A**w
        for w, d, beta in records
    ]
    return math.fsum(terms)


def slepian_wolf_rates(rho: Reliability | float) -> tuple[float, float]:
    """Joint entropy (bits per symbol pair) and per-source compression rate.

    For two binary symmetric sources agreeing w.p. rho the joint entropy
    is 1 + Hb(rho); splitting it evenly gives the compression rate
    (1 + Hb(rho))/2 per source.
    """
    p = _as_reliability(rho).value
    hb = -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)
    joint = 1.0 + hb
    return joint, joint / 2.0


def ber_crossing_db(
    grid_db: Iterable[float], ber: Iterable[float], target: float
) -> float:
    """Abscissa where a measured BER curve crosses ``target``.

    Log-linear interpolation between the first bracketing pair of points
    (curve assumed decreasing).  Raises when no bracket exists; zero BER
    points are skipped (nothing to interpolate in the log domain).
    """
    pts = [(g, b) for g, b in zip(grid_db, ber) if b > 0.0]
    for (g0, b0), (g1, b1) in zip(pts, pts[1:]):
        if b0 >= target >= b1:
            if b0 == b1:
                return g0
            frac = (math.log10(b0) - math.log10(target)) / (math.log10(b0) - math.log10(b1))
            return g0 + frac * (g1 - g0)
    raise ValueError(f"BER curve never crosses {target:g} inside the grid")

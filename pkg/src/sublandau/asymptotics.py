"""High-dimensional closed forms: Stirling support entropy, the gap
constants for Gaussian and Fourier sensing, and required-SNR planners.

All quantities are per the regime where n, p, q grow with fixed ratios
p_R = p/n and q_R = q/n. The gap constants measure, in bits per
measurement, how far the MIMO lower bound sits below the upper bound
p log2(1+SNR) at high SNR; required-SNR formulas then follow from
log2(1+SNR) = H(q_R)/p_R + R_cp + C_gap.

Every formula takes the gap as an explicit argument so callers can compose
with the Gaussian constant, the Fourier constant, or zero (pure upper
bound).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bounds import support_entropy_bits
from .model import Snr

__all__ = [
    "AsymptoticRatios",
    "SubbandScenario",
    "SubbandPlan",
    "binary_entropy",
    "stirling_support_entropy",
    "gap_gaussian",
    "gap_fourier",
    "fourier_gap_psi",
    "required_snr",
    "required_snr_very_sparse",
    "subband_required_snr",
]

_LOG2_E = math.log2(math.e)


@dataclass(frozen=True)
class AsymptoticRatios:
    """Sampling ratio p_R = p/n and occupancy q_R = q/n."""

    p_ratio: float
    q_ratio: float

    def __post_init__(self) -> None:
        if not (0.0 < self.p_ratio <= 1.0):
            raise ValueError(f"p_ratio must be in (0,1], got {self.p_ratio}")
        if not (0.0 < self.q_ratio <= 1.0):
            raise ValueError(f"q_ratio must be in (0,1], got {self.q_ratio}")

    @property
    def beta(self) -> float:
        return self.q_ratio / self.p_ratio


@dataclass(frozen=True)
class SubbandScenario:
    """Bandwidth W split into K subbands observed for T seconds; q_R*K of
    the subbands are occupied, p_R sets the sampling ratio, and r_c_bits is
    the total content rate per interval."""

    k: int
    w_hz: float
    t_s: float
    q_ratio: float
    p_ratio: float
    r_c_bits: float = 0.0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        occupied = self.q_ratio * self.k
        if abs(occupied - round(occupied)) > 1e-9 or round(occupied) < 1:
            raise ValueError(f"q_ratio*k must be a positive integer, got {occupied}")
        if self.w_hz <= 0 or self.t_s <= 0:
            raise ValueError("w_hz and t_s must be positive")
        if self.w_hz * self.t_s < self.k:
            raise ValueError("need w_hz*t_s >= k (at least one sample per subband)")
        if not (0.0 < self.p_ratio <= 1.0):
            raise ValueError("p_ratio must be in (0,1]")
        if self.r_c_bits < 0:
            raise ValueError("r_c_bits must be >= 0")

    @property
    def occupied_subbands(self) -> int:
        return round(self.q_ratio * self.k)


@dataclass(frozen=True)
class SubbandPlan:
    snr: Snr
    log2_one_plus_snr: float
    entropy_stirling_bits: float
    entropy_exact_bits: float


def binary_entropy(x: float) -> float:
    """H(x) = -x log2 x - (1-x) log2(1-x), with 0 log 0 = 0."""
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"binary_entropy needs x in [0,1], got {x}")
    h = 0.0
    if x > 0.0:
        h -= x * math.log2(x)
    if x < 1.0:
        h -= (1.0 - x) * math.log2(1.0 - x)
    return h


def stirling_support_entropy(n: int, q_ratio: float) -> float:
    """Stirling approximation n*H(q_R) to log2 C(n, n*q_R).

    Requires n*q_R to be an integer so the exact quantity exists to
    compare against."""
    occupied = n * q_ratio
    if abs(occupied - round(occupied)) > 1e-9:
        raise ValueError(f"n*q_ratio must be an integer, got {occupied}")
    return n * binary_entropy(q_ratio)


def gap_gaussian(beta: float) -> float:
    """High-SNR gap (bits per measurement) to the upper bound for Gaussian
    sensing at occupancy-to-measurement ratio beta = q_R/p_R > 1.

    C_gap = log2 e + (beta-1) log2((beta-1)/beta); decreasing in beta,
    -> log2 e as beta -> 1+ and -> 0 as beta -> inf.
    """
    if beta <= 1.0:
        raise ValueError(f"gap_gaussian needs beta > 1 (sub-Landau), got {beta}")
    return _LOG2_E + (beta - 1.0) * math.log2((beta - 1.0) / beta)


def fourier_gap_psi(p_ratio: float, q_ratio: float) -> float:
    """Intermediate ratio psi = p_R / (q_R - p_R) used by gap_fourier."""
    if not (0.0 < p_ratio < q_ratio <= 1.0):
        raise ValueError(
            f"need 0 < p_ratio < q_ratio <= 1, got p_R={p_ratio}, q_R={q_ratio}"
        )
    return p_ratio / (q_ratio - p_ratio)


def gap_fourier(p_ratio: float, q_ratio: float) -> float:
    """High-SNR gap (bits per measurement) for Fourier-submatrix sensing.

    C_gap = H(p_R)/p_R + log2(p_R/(q_R-p_R))
            - (q_R/p_R) log2(q_R/(q_R-p_R)) + log2(q_R).
    Vanishes identically at q_R = 1.
    """
    fourier_gap_psi(p_ratio, q_ratio)  # validates the domain
    d = q_ratio - p_ratio
    return (
        binary_entropy(p_ratio) / p_ratio
        + math.log2(p_ratio / d)
        - (q_ratio / p_ratio) * math.log2(q_ratio / d)
        + math.log2(q_ratio)
    )


def required_snr(q_ratio: float, p_ratio: float, r_cp_bits: float, c_gap_bits: float) -> Snr:
    """SNR needed to carry the support entropy plus r_cp content bits per
    measurement, c_gap bits per measurement above the lower bound:

        SNR = 2^{H(q_R)/p_R + r_cp + c_gap} - 1
    """
    if p_ratio <= 0.0:
        raise ValueError(f"p_ratio must be > 0, got {p_ratio}")
    exponent = binary_entropy(q_ratio) / p_ratio + r_cp_bits + c_gap_bits
    return Snr(2.0 ** exponent - 1.0)


def required_snr_very_sparse(
    q_ratio: float, p_ratio: float, r_cp_bits: float, c_gap_bits: float
) -> Snr:
    """Very-sparse simplification H(q_R) ~= -q_R log2 q_R:

        SNR ~= (1/q_R)^{q_R/p_R} * 2^{r_cp + c_gap} - 1
    """
    if not (0.0 < q_ratio < 1.0):
        raise ValueError(f"q_ratio must be in (0,1), got {q_ratio}")
    if p_ratio <= 0.0:
        raise ValueError(f"p_ratio must be > 0, got {p_ratio}")
    exponent = (q_ratio / p_ratio) * math.log2(1.0 / q_ratio) + r_cp_bits + c_gap_bits
    return Snr(2.0 ** exponent - 1.0)


def subband_required_snr(s: SubbandScenario, c_gap_bits: float) -> SubbandPlan:
    """Required SNR for the subband scenario:

        log2(1+SNR) = (K/(p_R W T)) H(q_R) + r_c/(p_R W T) + c_gap

    The support entropy contribution scales with K/(W T) (resolvable
    frequencies), so widening W or lengthening T at fixed K drives the
    requirement down. Returns the Stirling entropy K*H(q_R) alongside the
    exact log2 C(K, q_R*K) for calibration.
    """
    denom = s.p_ratio * s.w_hz * s.t_s
    exponent = (s.k / denom) * binary_entropy(s.q_ratio) + s.r_c_bits / denom + c_gap_bits
    return SubbandPlan(
        snr=Snr(2.0 ** exponent - 1.0),
        log2_one_plus_snr=exponent,
        entropy_stirling_bits=s.k * binary_entropy(s.q_ratio),
        entropy_exact_bits=support_entropy_bits(s.k, s.occupied_subbands),
    )

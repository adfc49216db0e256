"""Mutual-information bounds and rate-region feasibility.

The sparse channel's mutual information I_M is sandwiched between a MIMO
lower bound and an entropy-power upper bound:

    I_MIMO = E log2 det(I_p + (SNR/q) A0 A0^H)  <=  I_M  <=  p log2(1 + SNR)

where A0 is the p x q submatrix of A at the support columns. The lower
bound is estimated by Monte Carlo over fresh (support, matrix) draws; the
upper bound is closed form. A support stream rate R_b = log2 C(n,q) plus a
content rate R_c is feasible when R_b + R_c <= I_M.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .model import MatrixKind, ProblemDims, Snr
from .streams import child_rng, chunk_ranges

__all__ = [
    "BoundKind",
    "BoundEstimate",
    "RateRegionPoint",
    "FeasibilityVerdict",
    "AchievableRate",
    "ThresholdResult",
    "support_entropy_bits",
    "upper_bound_imup",
    "mimo_mi_mc",
    "rate_region_feasible",
    "achievable_rc",
    "find_threshold_db",
]

# cap on complex elements buffered per chunk; keeps batched linalg in cache
# without letting large dims blow up memory
_CHUNK_ELEMS = 2_000_000


class BoundKind(Enum):
    MIMO_GAUSSIAN = "mimo-gaussian"
    MIMO_FOURIER = "mimo-fourier"
    UPPER_BOUND = "upper-bound"
    EXACT = "exact"


@dataclass(frozen=True)
class BoundEstimate:
    """Mutual-information estimate in bits per channel use."""

    mean_bits: float
    std_error_bits: float
    trials: int
    kind: BoundKind

    def __post_init__(self) -> None:
        if self.std_error_bits < 0:
            raise ValueError("std_error_bits must be >= 0")
        if self.kind in (BoundKind.MIMO_GAUSSIAN, BoundKind.MIMO_FOURIER) and self.trials < 1:
            raise ValueError("Monte Carlo estimate needs trials >= 1")


@dataclass(frozen=True)
class RateRegionPoint:
    """A candidate (support rate, content rate) pair in bits per use."""

    r_b_bits: float
    r_c_bits: float

    def __post_init__(self) -> None:
        if self.r_b_bits < 0 or self.r_c_bits < 0:
            raise ValueError("rates must be >= 0")

    @property
    def total_bits(self) -> float:
        return self.r_b_bits + self.r_c_bits

    def r_c_per_measurement(self, p: int) -> float:
        """R_cp: content bits per measurement."""
        return self.r_c_bits / p


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    margin_bits: float
    margin_std_error: float


@dataclass(frozen=True)
class AchievableRate:
    rc_bits: float
    support_recovery_feasible: bool


@dataclass(frozen=True)
class ThresholdResult:
    status: str  # converged | infeasible | below-range
    threshold_db: float
    ci_lo_db: float
    ci_hi_db: float
    target_bits: float
    evaluations: tuple = field(default_factory=tuple)  # (snr_db, mean_bits, se_bits)


def support_entropy_bits(n: int, q: int) -> float:
    """log2 C(n, q) via log-gamma, stable for large arguments."""
    if not (0 <= q <= n):
        raise ValueError(f"need 0 <= q <= n, got q={q}, n={n}")
    lg = math.lgamma(n + 1) - math.lgamma(q + 1) - math.lgamma(n - q + 1)
    return lg / math.log(2.0)


def upper_bound_imup(p: int, snr: Snr) -> BoundEstimate:
    """Entropy-power upper bound p log2(1 + SNR)."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return BoundEstimate(
        mean_bits=p * math.log2(1.0 + snr.value),
        std_error_bits=0.0,
        trials=0,
        kind=BoundKind.UPPER_BOUND,
    )


def _mimo_chunk(args: tuple) -> tuple[float, float, int]:
    """Evaluate trials [start, stop) and return (sum, sum_sq, count) of the
    per-trial log-det bits. Pure function of the task tuple."""
    seed, label, start, stop, n, p, q, kind_value, snr_value = args
    kind = MatrixKind(kind_value)
    count = stop - start
    a0 = np.empty((count, p, q), dtype=complex)
    for i in range(count):
        rng = child_rng(seed, label, start + i)
        # draw order per trial: support first, then the matrix randomness
        supp = np.sort(np.argsort(rng.random(n))[:q])
        if kind is MatrixKind.GAUSSIAN_IID:
            re = rng.standard_normal((p, n))
            im = rng.standard_normal((p, n))
            a0[i] = ((re + 1j * im) / np.sqrt(2.0))[:, supp]
        else:
            rows = np.argsort(rng.random(n))[:p]
            a0[i] = np.exp(2j * np.pi * rows[:, None] * supp[None, :] / n)
    gram = np.einsum("bik,bjk->bij", a0, a0.conj())
    g = np.eye(p)[None, :, :] + (snr_value / q) * gram
    chol = np.linalg.cholesky(g)
    diag = np.einsum("bii->bi", chol).real
    bits = 2.0 * np.log2(diag).sum(axis=1)
    if not np.isfinite(bits).all():
        bad = int((~np.isfinite(bits)).sum())
        raise FloatingPointError(f"log-det non-finite in {bad} of {count} trials")
    return float(bits.sum()), float((bits * bits).sum()), count


def mimo_mi_mc(
    dims: ProblemDims,
    kind: MatrixKind,
    snr: Snr,
    trials: int,
    seed: int,
    *,
    threads: int = 1,
    label: str = "mimo-mi",
) -> BoundEstimate:
    """Monte Carlo estimate of E log2 det(I_p + (SNR/q) A0 A0^H).

    Each trial draws a fresh support and a fresh matrix from its own child
    stream; chunk boundaries are fixed, so the estimate is bit-identical
    for any thread count.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if kind is MatrixKind.FOURIER_SUBMATRIX and dims.p > dims.n:
        raise ValueError("fourier kind needs p <= n")
    chunk = max(16, min(8192, _CHUNK_ELEMS // (dims.p * dims.q)))
    tasks = [
        (seed, label, start, stop, dims.n, dims.p, dims.q, kind.value, snr.value)
        for start, stop in chunk_ranges(trials, chunk)
    ]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_mimo_chunk, tasks))
    else:
        parts = [_mimo_chunk(t) for t in tasks]
    total = 0.0
    total_sq = 0.0
    for s, s2, _ in parts:  # reduce in fixed chunk order
        total += s
        total_sq += s2
    mean = total / trials
    if trials > 1:
        var = max(0.0, (total_sq - trials * mean * mean) / (trials - 1))
        se = math.sqrt(var / trials)
    else:
        se = math.inf
    bkind = BoundKind.MIMO_GAUSSIAN if kind is MatrixKind.GAUSSIAN_IID else BoundKind.MIMO_FOURIER
    return BoundEstimate(mean_bits=mean, std_error_bits=se, trials=trials, kind=bkind)


def rate_region_feasible(point: RateRegionPoint, i_m: BoundEstimate) -> FeasibilityVerdict:
    """Check R_b + R_c <= I_M and report the margin with the estimate's
    uncertainty attached."""
    margin = i_m.mean_bits - (point.r_b_bits + point.r_c_bits)
    return FeasibilityVerdict(
        feasible=margin >= 0.0,
        margin_bits=margin,
        margin_std_error=i_m.std_error_bits,
    )


def achievable_rc(i_mimo: BoundEstimate, h_b: float) -> AchievableRate:
    """Content rate left after spending h_b bits on the support stream,
    clamped at zero. The flag records whether support recovery itself fits
    under the bound."""
    rc = i_mimo.mean_bits - h_b
    if rc < 0.0:
        return AchievableRate(rc_bits=0.0, support_recovery_feasible=False)
    return AchievableRate(rc_bits=rc, support_recovery_feasible=True)


def find_threshold_db(
    dims: ProblemDims,
    kind: MatrixKind,
    r_c_bits: float,
    trials: int,
    seed: int,
    *,
    lo_db: float = 0.0,
    hi_db: float = 20.0,
    tol_db: float = 0.05,
    threads: int = 1,
) -> ThresholdResult:
    """Bisect over SNR (in dB) for mimo_mi_mc = log2 C(n,q) + r_c.

    The MIMO estimate is monotone in SNR, so plain bisection applies. Each
    bisection evaluation uses its own block of child streams (evaluation
    index e covers trial indices [e*trials, (e+1)*trials)), which keeps the
    whole search deterministic for any thread count. A non-bracketing range
    is reported via status, not raised.
    """
    target = support_entropy_bits(dims.n, dims.q) + r_c_bits
    evals: list[tuple[float, float, float]] = []

    def evaluate(db: float) -> tuple[float, float]:
        e = len(evals)
        est = mimo_mi_mc(
            dims, kind, Snr.from_db(db), trials, seed,
            threads=threads, label=f"threshold-eval-{e}",
        )
        evals.append((db, est.mean_bits, est.std_error_bits))
        return est.mean_bits, est.std_error_bits

    hi_mean, hi_se = evaluate(hi_db)
    if hi_mean < target:
        return ThresholdResult(
            status="infeasible", threshold_db=math.nan, ci_lo_db=math.nan,
            ci_hi_db=math.nan, target_bits=target, evaluations=tuple(evals),
        )
    lo_mean, lo_se = evaluate(lo_db)
    if lo_mean > target:
        return ThresholdResult(
            status="below-range", threshold_db=lo_db, ci_lo_db=math.nan,
            ci_hi_db=math.nan, target_bits=target, evaluations=tuple(evals),
        )
    lo, hi = lo_db, hi_db
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        mid_mean, mid_se = evaluate(mid)
        if mid_mean < target:
            lo, lo_mean, lo_se = mid, mid_mean, mid_se
        else:
            hi, hi_mean, hi_se = mid, mid_mean, mid_se
    threshold = 0.5 * (lo + hi)
    # CI: bisection tolerance plus Monte Carlo noise mapped through the
    # local slope (bits per dB) of the bracketing secant
    slope = (hi_mean - lo_mean) / max(hi - lo, 1e-12)
    se = max(lo_se, hi_se)
    half_width = max(tol_db, 3.0 * se / abs(slope)) if slope != 0 else math.inf
    return ThresholdResult(
        status="converged",
        threshold_db=threshold,
        ci_lo_db=threshold - half_width,
        ci_hi_db=threshold + half_width,
        target_bits=target,
        evaluations=tuple(evals),
    )

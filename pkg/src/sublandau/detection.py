"""Maximum-likelihood support detection and its Monte Carlo error harness.

The detector knows the content vector c (elementwise construction) and
searches for the support mask whose constellation point A(b * c) lies
closest to y in Euclidean distance. Genie-restricted variants shrink the
hypothesis set to the true mask plus its single-swap neighbors (all
q(n-q) of them, or one chosen uniformly), which isolates the
nearest-neighbor error mechanism that dominates at high SNR.

All detector modes share one random stream per trial and one distance
array per hypothesis, so the per-trial error indicators are exactly
nested: single-neighbor <= all-neighbors <= full ML, trial by trial.

A small codebook experiment demonstrates the achievability scheme: content
codewords drawn per (support value, message, channel use) are decoded
jointly over a block of N uses, recovering both the message and the
support sequence.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import combinations

import numpy as np

from .model import (
    MatrixKind,
    Measurement,
    ProblemDims,
    SensingMatrixSample,
    Snr,
    SupportMask,
)
from .streams import child_rng, chunk_ranges

__all__ = [
    "DetectorMode",
    "ErrorProbEstimate",
    "ErrorCurves",
    "CodebookDemoConfig",
    "CodebookDemoResult",
    "CombinatorialBudgetError",
    "HYPOTHESIS_CAP",
    "wilson_interval",
    "lex_mask_table",
    "swap_masks",
    "ml_support_detect",
    "genie_restricted_detect",
    "support_error_mc",
    "messages_for_rate",
    "codebook_demo",
]

# hard ceiling on enumerated hypotheses (masks, or masks x messages)
HYPOTHESIS_CAP = 1 << 16

_Z95 = 1.959963984540054


class CombinatorialBudgetError(ValueError):
    """The requested instance needs more enumerated hypotheses than the cap
    allows; reported instead of silently truncating the search."""


class DetectorMode(Enum):
    FULL_ML = "full"
    NN_GENIE = "nn-genie"
    SINGLE_NN_GENIE = "single-genie"


@dataclass(frozen=True)
class ErrorProbEstimate:
    p_err: float
    trials: int
    errors_observed: int
    wilson_ci_95: tuple[float, float]

    def __post_init__(self) -> None:
        if self.trials < 1 or not (0 <= self.errors_observed <= self.trials):
            raise ValueError("inconsistent error count")
        if abs(self.p_err - self.errors_observed / self.trials) > 1e-12:
            raise ValueError("p_err must equal errors_observed/trials")
        lo, hi = self.wilson_ci_95
        if lo > hi:
            raise ValueError("CI bounds out of order")

    @property
    def wilson_half_width(self) -> float:
        lo, hi = self.wilson_ci_95
        return 0.5 * (hi - lo)


@dataclass(frozen=True)
class ErrorCurves:
    """Per-SNR-point estimates for each requested detector mode, evaluated
    on identical trial streams. dominance_violations counts trials (per SNR
    point) where the error nesting failed; it is None unless all three
    modes were requested, and zero by construction otherwise."""

    estimates: dict[DetectorMode, list[ErrorProbEstimate]]
    dominance_violations: list[int] | None


def wilson_interval(errors: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    phat = errors / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    return (max(0.0, center - half), min(1.0, center + half))


@lru_cache(maxsize=32)
def lex_mask_table(n: int, q: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All C(n,q) support masks in lexicographic mask order.

    Returns (indices (C,q), mask_matrix (n,C) float, codes (C,)). The code
    of a mask is its value as a binary number with position 0 the most
    significant bit, so lex order on mask vectors equals ascending code
    order. Codes use int64 when n permits, Python ints (object dtype)
    otherwise.
    """
    combos = list(combinations(range(n), q))
    if n <= 62:
        codes = [sum(1 << (n - 1 - i) for i in combo) for combo in combos]
        order = np.argsort(np.asarray(codes, dtype=np.int64))
        codes_arr = np.asarray(codes, dtype=np.int64)[order]
    else:
        codes = [sum(1 << (n - 1 - i) for i in combo) for combo in combos]
        order = np.argsort(np.asarray(codes, dtype=object))
        codes_arr = np.asarray(codes, dtype=object)[order]
    idx = np.asarray(combos, dtype=np.int64)[order]
    mask_matrix = np.zeros((n, len(combos)))
    for c, combo in enumerate(idx):
        mask_matrix[combo, c] = 1.0
    return idx, mask_matrix, codes_arr


def _mask_code(mask: np.ndarray) -> int:
    n = mask.shape[0]
    return int(sum(1 << (n - 1 - i) for i in np.flatnonzero(mask)))


def _check_cap(n: int, q: int, cap: int) -> int:
    count = math.comb(n, q)
    if count > cap:
        raise CombinatorialBudgetError(
            f"C({n},{q}) = {count} hypotheses exceeds the cap {cap}"
        )
    return count


def swap_masks(true_mask: SupportMask) -> list[SupportMask]:
    """All q(n-q) single-swap neighbors of a mask (one support index out,
    one non-support index in)."""
    base = true_mask.mask
    out = []
    for k in np.flatnonzero(base):
        for m in np.flatnonzero(base == 0):
            nb = base.copy()
            nb[k] = 0
            nb[m] = 1
            out.append(SupportMask(mask=nb))
    return out


def _distances(y: np.ndarray, A: np.ndarray, c: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """Squared distances from y to A(b*c) for each mask column of masks."""
    pts = (A * c[None, :]) @ masks  # (p, C)
    return (np.abs(y[:, None] - pts) ** 2).sum(axis=0)


def ml_support_detect(
    y: Measurement,
    A: SensingMatrixSample,
    c: np.ndarray,
    dims: ProblemDims,
    *,
    max_hypotheses: int = HYPOTHESIS_CAP,
) -> SupportMask:
    """Exhaustive ML search over all C(n,q) masks; ties go to the
    lexicographically smallest mask."""
    _check_cap(dims.n, dims.q, max_hypotheses)
    idx, mask_matrix, _ = lex_mask_table(dims.n, dims.q)
    d2 = _distances(y.y, A.entries, np.asarray(c), mask_matrix)
    best = int(np.argmin(d2))  # first minimum = lex smallest
    mask = np.zeros(dims.n, dtype=np.int8)
    mask[idx[best]] = 1
    return SupportMask(mask=mask)


def genie_restricted_detect(
    y: Measurement,
    A: SensingMatrixSample,
    c: np.ndarray,
    true_mask: SupportMask,
    mode: DetectorMode,
    rng: np.random.Generator,
) -> SupportMask:
    """Detect over the genie-restricted hypothesis set: the true mask plus
    all its single-swap neighbors, or plus one uniformly chosen neighbor."""
    if mode is DetectorMode.FULL_ML:
        raise ValueError("genie detector needs a restricted mode")
    neighbors = swap_masks(true_mask)
    if mode is DetectorMode.SINGLE_NN_GENIE and neighbors:
        neighbors = [neighbors[int(rng.integers(len(neighbors)))]]
    hyps = [true_mask] + neighbors
    cols = np.stack([h.mask for h in hyps], axis=1).astype(float)
    d2 = _distances(y.y, A.entries, np.asarray(c), cols)
    # ties resolve toward the lexicographically smallest mask, same rule as
    # the full search
    codes = np.asarray([_mask_code(h.mask) for h in hyps], dtype=object)
    best = min(range(len(hyps)), key=lambda i: (d2[i], codes[i]))
    return hyps[best]


def _detect_chunk(args: tuple) -> tuple[dict[str, int], int]:
    """Run trials [start, stop) at one SNR point; return error counts per
    mode value and the number of dominance violations (always 0 given the
    shared distance table; counted anyway as a hard invariant check)."""
    (seed, label, start, stop, n, p, q, kind_value, snr_value, mode_values) = args
    kind = MatrixKind(kind_value)
    count = stop - start
    nswap = q * (n - q)
    idx, mask_matrix, codes = lex_mask_table(n, q)

    a_all = np.empty((count, p, n), dtype=complex)
    c_all = np.empty((count, n), dtype=complex)
    z_all = np.empty((count, p), dtype=complex)
    in_idx = np.empty((count, q), dtype=np.int64)
    out_idx = np.empty((count, n - q), dtype=np.int64) if nswap else None
    jpick = np.empty(count, dtype=np.int64) if nswap else None
    noise_scale = math.sqrt(q / snr_value / 2.0)
    for i in range(count):
        rng = child_rng(seed, label, start + i)
        # fixed per-trial draw order: support, matrix, content, noise, pick
        order = np.argsort(rng.random(n))
        in_idx[i] = np.sort(order[:q])
        if nswap:
            out_idx[i] = np.sort(order[q:])
        if kind is MatrixKind.GAUSSIAN_IID:
            a_all[i] = (rng.standard_normal((p, n)) + 1j * rng.standard_normal((p, n))) / np.sqrt(2.0)
        else:
            rows = np.argsort(rng.random(n))[:p]
            a_all[i] = np.exp(2j * np.pi * rows[:, None] * np.arange(n)[None, :] / n)
        c_all[i] = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
        z_all[i] = noise_scale * (rng.standard_normal(p) + 1j * rng.standard_normal(p))
        if nswap:
            jpick[i] = rng.integers(nswap)

    ac = a_all * c_all[:, None, :]  # (B, p, n)
    s_true = np.take_along_axis(ac, in_idx[:, None, :], axis=2).sum(axis=2)
    y = s_true + z_all
    # one distance table per trial; every mode reads from it, which makes
    # the error nesting exact rather than statistical
    pts = ac @ mask_matrix  # (B, p, C)
    d2 = (np.abs(y[:, :, None] - pts) ** 2).sum(axis=1)  # (B, C)

    arange = np.arange(count)
    if n <= 62:
        weights = 1 << (n - 1 - np.arange(n, dtype=np.int64))
        true_codes = weights[in_idx].sum(axis=1)
        true_pos = np.searchsorted(codes, true_codes)
    else:
        weights_obj = np.asarray([1 << (n - 1 - i) for i in range(n)], dtype=object)
        true_codes = weights_obj[in_idx].sum(axis=1)
        true_pos = np.searchsorted(codes, true_codes)
    d_true = d2[arange, true_pos]

    counts: dict[str, int] = {}
    err_flags: dict[str, np.ndarray] = {}

    if DetectorMode.FULL_ML.value in mode_values:
        best = np.argmin(d2, axis=1)
        err_flags[DetectorMode.FULL_ML.value] = best != true_pos

    if nswap and (
        DetectorMode.NN_GENIE.value in mode_values
        or DetectorMode.SINGLE_NN_GENIE.value in mode_values
    ):
        # swap hypothesis positions in the lex table, by code arithmetic
        if n <= 62:
            delta = (
                -weights[in_idx][:, :, None] + weights[out_idx][:, None, :]
            )  # (B, q, n-q)
            swap_codes = true_codes[:, None, None] + delta
            swap_pos = np.searchsorted(codes, swap_codes.reshape(count, nswap))
        else:
            delta = (
                -weights_obj[in_idx][:, :, None] + weights_obj[out_idx][:, None, :]
            )
            swap_codes = true_codes[:, None, None] + delta
            swap_pos = np.searchsorted(codes, swap_codes.reshape(count, nswap))
        d2_swaps = np.take_along_axis(d2, swap_pos, axis=1)  # (B, nswap)
        beats_true = (d2_swaps < d_true[:, None]) | (
            (d2_swaps == d_true[:, None]) & (swap_pos < true_pos[:, None])
        )
        if DetectorMode.NN_GENIE.value in mode_values:
            err_flags[DetectorMode.NN_GENIE.value] = beats_true.any(axis=1)
        if DetectorMode.SINGLE_NN_GENIE.value in mode_values:
            err_flags[DetectorMode.SINGLE_NN_GENIE.value] = beats_true[arange, jpick]
    else:
        zero = np.zeros(count, dtype=bool)
        for mv in (DetectorMode.NN_GENIE.value, DetectorMode.SINGLE_NN_GENIE.value):
            if mv in mode_values:
                err_flags[mv] = zero

    violations = 0
    if len(err_flags) == 3:
        e_s = err_flags[DetectorMode.SINGLE_NN_GENIE.value]
        e_n = err_flags[DetectorMode.NN_GENIE.value]
        e_f = err_flags[DetectorMode.FULL_ML.value]
        violations = int(((e_s & ~e_n) | (e_n & ~e_f)).sum())
    for mv, flags in err_flags.items():
        counts[mv] = int(flags.sum())
    return counts, violations


def support_error_mc(
    dims: ProblemDims,
    kind: MatrixKind,
    snr_grid: list[Snr],
    modes,
    trials: int,
    seed: int,
    *,
    threads: int = 1,
    max_hypotheses: int = HYPOTHESIS_CAP,
) -> ErrorCurves:
    """Support-detection error rate per SNR point for the requested
    detector modes (a single mode or a sequence), all modes coupled on
    identical trial streams. An error is any whole-mask mismatch.

    trials may be a single count or one count per grid point.
    """
    if isinstance(modes, DetectorMode):
        modes = [modes]
    modes = list(modes)
    if not modes:
        raise ValueError("need at least one detector mode")
    _check_cap(dims.n, dims.q, max_hypotheses)
    if isinstance(trials, int):
        trial_list = [trials] * len(snr_grid)
    else:
        trial_list = [int(t) for t in trials]
        if len(trial_list) != len(snr_grid):
            raise ValueError("one trial count per SNR point required")
    if any(t < 1 for t in trial_list):
        raise ValueError("trials must be >= 1")

    mode_values = tuple(m.value for m in modes)
    chunk = max(16, min(8192, 2_000_000 // (dims.p * dims.num_supports)))
    estimates: dict[DetectorMode, list[ErrorProbEstimate]] = {m: [] for m in modes}
    violations: list[int] = []
    for point, (snr, t_point) in enumerate(zip(snr_grid, trial_list)):
        if snr.value <= 0:
            raise ValueError("support_error_mc needs snr > 0")
        label = f"support-error-{point}"
        tasks = [
            (seed, label, start, stop, dims.n, dims.p, dims.q, kind.value,
             snr.value, mode_values)
            for start, stop in chunk_ranges(t_point, chunk)
        ]
        if threads > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(_detect_chunk, tasks))
        else:
            parts = [_detect_chunk(t) for t in tasks]
        point_violations = sum(v for _, v in parts)
        violations.append(point_violations)
        for mode in modes:
            errs = sum(c[mode.value] for c, _ in parts)
            estimates[mode].append(
                ErrorProbEstimate(
                    p_err=errs / t_point,
                    trials=t_point,
                    errors_observed=errs,
                    wilson_ci_95=wilson_interval(errs, t_point),
                )
            )
    return ErrorCurves(
        estimates=estimates,
        dominance_violations=violations if len(modes) == 3 else None,
    )


@dataclass(frozen=True)
class CodebookDemoConfig:
    dims: ProblemDims
    block_length: int
    num_messages: int
    snr: Snr
    support_known_at_tx: bool = True

    def __post_init__(self) -> None:
        if self.block_length < 1:
            raise ValueError("block_length must be >= 1")
        if self.num_messages < 1:
            raise ValueError("num_messages must be >= 1")
        table = self.dims.num_supports * self.num_messages
        if table > HYPOTHESIS_CAP:
            raise CombinatorialBudgetError(
                f"hypothesis table {self.dims.num_supports} x {self.num_messages} "
                f"= {table} exceeds the cap {HYPOTHESIS_CAP}"
            )
        if self.snr.value <= 0:
            raise ValueError("codebook demo needs snr > 0")


@dataclass(frozen=True)
class CodebookDemoResult:
    message_error: ErrorProbEstimate
    support_error: ErrorProbEstimate

    @property
    def rates(self) -> tuple[float, float]:
        return (self.message_error.p_err, self.support_error.p_err)


def messages_for_rate(r_c_bits_per_use: float, block_length: int) -> int:
    """Message count carrying r_c bits per use over a block: round(2^{N r_c})."""
    if r_c_bits_per_use < 0:
        raise ValueError("rate must be >= 0")
    return max(1, round(2.0 ** (block_length * r_c_bits_per_use)))


def _codebook_chunk(args: tuple) -> tuple[int, int, int]:
    (seed, start, stop, n, p, q, nuses, m_count, snr_value, support_known) = args
    idx, cmask_rows, _ = lex_mask_table(n, q)
    cmasks = cmask_rows.T  # (C, n)
    c_count = cmasks.shape[0]
    noise_scale = math.sqrt(q / snr_value / 2.0)
    msg_err = 0
    sup_err = 0
    for t in range(start, stop):
        rng = child_rng(seed, "codebook", t)
        # codebook first (shared between tx and rx), then channel randomness
        if support_known:
            book = (
                rng.standard_normal((c_count, m_count, nuses, n))
                + 1j * rng.standard_normal((c_count, m_count, nuses, n))
            ) / np.sqrt(2.0)
        else:
            flat = (
                rng.standard_normal((m_count, nuses, n))
                + 1j * rng.standard_normal((m_count, nuses, n))
            ) / np.sqrt(2.0)
            book = np.broadcast_to(flat[None, :, :, :], (c_count, m_count, nuses, n))
        a = (
            rng.standard_normal((nuses, p, n)) + 1j * rng.standard_normal((nuses, p, n))
        ) / np.sqrt(2.0)
        b_true = rng.integers(0, c_count, size=nuses)
        w_true = int(rng.integers(m_count))
        z = noise_scale * (rng.standard_normal((nuses, p)) + 1j * rng.standard_normal((nuses, p)))

        x = cmasks[b_true] * book[b_true, w_true, np.arange(nuses)]  # (N, n)
        y = np.einsum("tpn,tn->tp", a, x) + z

        # per-use hypothesis points for every (support, message) pair
        xs = cmasks[None, :, None, :] * book.transpose(2, 0, 1, 3)  # (N, C, M, n)
        s = np.einsum("tpn,tbmn->tbmp", a, xs)
        d2 = (np.abs(y[:, None, None, :] - s) ** 2).sum(axis=3)  # (N, C, M)
        w_hat = int(d2.min(axis=1).sum(axis=0).argmin())
        b_hat = d2[:, :, w_hat].argmin(axis=1)
        msg_err += w_hat != w_true
        sup_err += bool((b_hat != b_true).any())
    return msg_err, sup_err, stop - start


def codebook_demo(
    cfg: CodebookDemoConfig, trials: int, seed: int, *, threads: int = 1
) -> CodebookDemoResult:
    """Monte Carlo message and support-sequence error rates of the block
    coding scheme.

    support_known_at_tx=True: the codebook holds an independent content
    sequence for every (support value, message, use); the decoder minimizes
    the block distance jointly over message and per-use support.
    support_known_at_tx=False: one content sequence per message; the channel
    applies the support mask, and the decoder recovers the message first,
    then the supports from the decoded content.

    A support-sequence error is any use with a misdetected mask.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    d = cfg.dims
    tasks = [
        (seed, start, stop, d.n, d.p, d.q, cfg.block_length,
         cfg.num_messages, cfg.snr.value, cfg.support_known_at_tx)
        for start, stop in chunk_ranges(trials, 32)
    ]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_codebook_chunk, tasks))
    else:
        parts = [_codebook_chunk(t) for t in tasks]
    msg_errs = sum(p[0] for p in parts)
    sup_errs = sum(p[1] for p in parts)
    return CodebookDemoResult(
        message_error=ErrorProbEstimate(
            p_err=msg_errs / trials, trials=trials, errors_observed=msg_errs,
            wilson_ci_95=wilson_interval(msg_errs, trials),
        ),
        support_error=ErrorProbEstimate(
            p_err=sup_errs / trials, trials=trials, errors_observed=sup_errs,
            wilson_ci_95=wilson_interval(sup_errs, trials),
        ),
    )

"""Sparse sensing channel model.

A length-n vector x carries exactly q nonzero entries at positions given by
a support mask b. A p x n sensing matrix A (Gaussian i.i.d. or a random
submatrix of the scaled IDFT) produces y = A x + z, with z complex Gaussian
of variance q/SNR per element, so each element of y sees the configured SNR
under unit-power signaling.

Two signal constructions are provided: C1 assigns a length-q content vector
to the sorted support positions; C2 masks a full length-n content vector
elementwise. C2 is the canonical internal form (the mask is the state).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MatrixKind",
    "ProblemDims",
    "Snr",
    "SensingMatrixSample",
    "SupportMask",
    "SparseVector",
    "Measurement",
    "make_dims",
    "sample_gaussian_matrix",
    "sample_fourier_matrix",
    "fourier_entries",
    "sample_support",
    "assemble_c1",
    "assemble_c2",
    "channel",
]


class MatrixKind(enum.Enum):
    GAUSSIAN_IID = "gaussian"
    FOURIER_SUBMATRIX = "fourier"


@dataclass(frozen=True)
class ProblemDims:
    """Ambient dimension n, measurement count p, support size q."""

    n: int
    p: int
    q: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not (1 <= self.q <= self.n):
            raise ValueError(f"q must satisfy 1 <= q <= n, got q={self.q}, n={self.n}")
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")

    @property
    def p_ratio(self) -> float:
        return self.p / self.n

    @property
    def q_ratio(self) -> float:
        return self.q / self.n

    @property
    def beta(self) -> float:
        """Occupancy-to-measurement ratio q/p; sub-Landau means beta > 1."""
        return self.q / self.p

    @property
    def num_supports(self) -> int:
        return math.comb(self.n, self.q)


@dataclass(frozen=True)
class Snr:
    """Linear signal-to-noise power ratio. Zero is allowed as a boundary
    value (e.g. a required-SNR formula with zero exponent); dB conversion
    of zero yields -inf."""

    value: float

    def __post_init__(self) -> None:
        if not (self.value >= 0.0) or math.isnan(self.value):
            raise ValueError(f"snr must be >= 0, got {self.value}")

    @classmethod
    def from_db(cls, db: float) -> "Snr":
        return cls(10.0 ** (db / 10.0))

    def to_db(self) -> float:
        if self.value == 0.0:
            return -math.inf
        return 10.0 * math.log10(self.value)


@dataclass(frozen=True)
class SensingMatrixSample:
    """One realization of the p x n sensing matrix."""

    kind: MatrixKind
    entries: np.ndarray
    row_indices: np.ndarray | None = None  # Fourier kind only

    @property
    def p(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class SupportMask:
    """Length-n 0/1 mask with exactly q ones (the channel state b)."""

    mask: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.mask)
        if m.ndim != 1 or not np.all((m == 0) | (m == 1)):
            raise ValueError("mask must be a 1-d 0/1 vector")
        object.__setattr__(self, "mask", m.astype(np.int8))

    @property
    def n(self) -> int:
        return self.mask.shape[0]

    @property
    def q(self) -> int:
        return int(self.mask.sum())

    @property
    def indices(self) -> np.ndarray:
        """Support positions in increasing order."""
        return np.flatnonzero(self.mask)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SupportMask):
            return NotImplemented
        return bool(np.array_equal(self.mask, other.mask))

    def __hash__(self) -> int:
        return hash(self.mask.tobytes())


@dataclass(frozen=True)
class SparseVector:
    """x with exactly q nonzeros at the mask positions; content is the
    pre-mask payload (length n for C2, length q for C1)."""

    x: np.ndarray
    content: np.ndarray
    support: SupportMask


@dataclass(frozen=True)
class Measurement:
    """y = A x + z together with the per-element complex noise variance."""

    y: np.ndarray
    noise_variance: float


def make_dims(n: int, p: int, q: int) -> ProblemDims:
    return ProblemDims(n=int(n), p=int(p), q=int(q))


def sample_gaussian_matrix(dims: ProblemDims, rng: np.random.Generator) -> SensingMatrixSample:
    """Draw A with i.i.d. circularly symmetric complex Gaussian entries,
    E|a|^2 = 1 (real and imaginary parts each of variance 1/2)."""
    re = rng.standard_normal((dims.p, dims.n))
    im = rng.standard_normal((dims.p, dims.n))
    entries = (re + 1j * im) / np.sqrt(2.0)
    return SensingMatrixSample(kind=MatrixKind.GAUSSIAN_IID, entries=entries)


def fourier_entries(row_indices: np.ndarray, n: int) -> np.ndarray:
    """Unit-magnitude IDFT rows: entry (j, k) = exp(+2 pi i r_j k / n).

    Rows are mutually orthogonal with squared norm n, so A A^H = n I_p.
    Entries keep unit second moment, which is the normalization the
    upper-bound argument relies on (not 1/sqrt(n) orthonormal rows).
    """
    rows = np.asarray(row_indices, dtype=np.int64)
    cols = np.arange(n)
    return np.exp(2j * np.pi * rows[:, None] * cols[None, :] / n)


def sample_fourier_matrix(dims: ProblemDims, rng: np.random.Generator) -> SensingMatrixSample:
    """Pick p distinct IDFT rows uniformly at random."""
    if dims.p > dims.n:
        raise ValueError(f"fourier kind needs p <= n, got p={dims.p}, n={dims.n}")
    # argsort of uniforms = uniform permutation; take the first p
    rows = np.argsort(rng.random(dims.n))[: dims.p]
    return SensingMatrixSample(
        kind=MatrixKind.FOURIER_SUBMATRIX,
        entries=fourier_entries(rows, dims.n),
        row_indices=rows,
    )


def sample_support(dims: ProblemDims, rng: np.random.Generator) -> SupportMask:
    """Uniform draw over all C(n,q) masks."""
    order = np.argsort(rng.random(dims.n))
    mask = np.zeros(dims.n, dtype=np.int8)
    mask[order[: dims.q]] = 1
    return SupportMask(mask=mask)


def assemble_c1(support: SupportMask, content_q: np.ndarray) -> SparseVector:
    """Place a length-q content vector at the support positions taken in
    increasing index order."""
    content_q = np.asarray(content_q)
    if content_q.shape != (support.q,):
        raise ValueError(f"content length {content_q.shape} != support size {support.q}")
    x = np.zeros(support.n, dtype=complex)
    x[support.indices] = content_q
    return SparseVector(x=x, content=content_q, support=support)


def assemble_c2(support: SupportMask, content_n: np.ndarray) -> SparseVector:
    """Mask a full length-n content vector elementwise: x_i = b_i c_i."""
    content_n = np.asarray(content_n)
    if content_n.shape != (support.n,):
        raise ValueError(f"content length {content_n.shape} != n={support.n}")
    x = support.mask.astype(complex) * content_n
    return SparseVector(x=x, content=content_n, support=support)


def channel(
    x: SparseVector, A: SensingMatrixSample, snr: Snr, rng: np.random.Generator
) -> Measurement:
    """y = A x + z with z i.i.d. complex Gaussian of variance q/SNR per
    element. q is the support size of x, so the per-element measurement SNR
    equals the configured value under unit-power content."""
    if A.n != x.x.shape[0]:
        raise ValueError(f"matrix columns {A.n} != signal length {x.x.shape[0]}")
    q = x.support.q
    var = q / snr.value if snr.value > 0 else math.inf
    if not math.isfinite(var):
        raise ValueError("channel requires snr > 0")
    scale = math.sqrt(var / 2.0)
    z = scale * (rng.standard_normal(A.p) + 1j * rng.standard_normal(A.p))
    y = A.entries @ x.x + z
    return Measurement(y=y, noise_variance=var)

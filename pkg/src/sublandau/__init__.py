"""Bounds, asymptotics and ML support-detection error analysis for coded
sparse signals sampled below the Landau rate (fewer measurements than
nonzero signal components)."""

from .analytic_error import (
    QuadratureError,
    QuadratureSpec,
    chi_pdf_d,
    pairwise_error,
    pairwise_error_cond,
    sigma_cdf,
    sigma_pdf,
    union_bound,
)
from .asymptotics import (
    AsymptoticRatios,
    SubbandPlan,
    SubbandScenario,
    binary_entropy,
    fourier_gap_psi,
    gap_fourier,
    gap_gaussian,
    required_snr,
    required_snr_very_sparse,
    stirling_support_entropy,
    subband_required_snr,
)
from .bounds import (
    AchievableRate,
    BoundEstimate,
    BoundKind,
    FeasibilityVerdict,
    RateRegionPoint,
    ThresholdResult,
    achievable_rc,
    find_threshold_db,
    mimo_mi_mc,
    rate_region_feasible,
    support_entropy_bits,
    upper_bound_imup,
)
from .detection import (
    CodebookDemoConfig,
    CodebookDemoResult,
    CombinatorialBudgetError,
    DetectorMode,
    ErrorCurves,
    ErrorProbEstimate,
    codebook_demo,
    genie_restricted_detect,
    messages_for_rate,
    ml_support_detect,
    support_error_mc,
    wilson_interval,
)
from .model import (
    MatrixKind,
    Measurement,
    ProblemDims,
    SensingMatrixSample,
    Snr,
    SparseVector,
    SupportMask,
    assemble_c1,
    assemble_c2,
    channel,
    fourier_entries,
    make_dims,
    sample_fourier_matrix,
    sample_gaussian_matrix,
    sample_support,
)
from .streams import child_rng, child_seed

__version__ = "0.1.0"

"""Numerics for a fractional non-homogeneous counting process.

Evaluates the generalized exponential (Kilbas-Saigo family) series, the
full probability and moment apparatus of the counting process built on
it, the associated fractional combinatorial polynomials and numbers, and
seedable Monte Carlo cross-checks of the closed forms.
"""

from .config import DEFAULT_CONFIG, SeriesConfig
from .errors import (
    AsymptoticError,
    ConstraintError,
    ConvergenceError,
    DegenerateDistributionError,
    DomainError,
    FraccountError,
    InsufficientDataError,
    IntegrationError,
    NumericError,
    PrecisionLossError,
    SamplingRangeError,
    UnsupportedError,
)
from .combinatorics import (
    frac_comb_number,
    frac_number,
    frac_polynomial,
    ks_identity_sides,
    ks_via_stirling,
    poly_genfun,
    stirling1_signed,
    stirling2,
)
from .counting import (
    LaplaceSeriesResult,
    MomentSet,
    PMFTable,
    central_moment,
    compound_mean,
    compound_mgf,
    cumulative_rate,
    interarrival_laplace_quadrature,
    interarrival_laplace_series,
    interarrival_laplace_series_info,
    interarrival_pdf,
    kurtosis_excess,
    mean,
    mgf,
    moment_set,
    pgf,
    pmf,
    pmf_table,
    rate_function,
    raw_moment,
    skewness,
    survival_zero,
    variance,
)
from .montecarlo import (
    JumpDistribution,
    KSCheck,
    RngSpec,
    SampleSummary,
    SurvivalTable,
    build_survival_table,
    degenerate_jump,
    exponential_jump,
    first_arrival_ks_check,
    make_rng,
    normal_jump,
    sample_compound,
    sample_compounds,
    sample_count,
    sample_counts,
    sample_first_arrival,
    sample_first_arrivals,
    simulate_counts_classical,
    simulate_path_classical,
    summarize,
)
from .params import FractalityParams, ProcessSpec, make_spec
from .specialfn import (
    kilbas_saigo,
    kilbas_saigo_deriv,
    ks_coeff_ratio_check,
    ks_coefficients,
    ks_series_coeff,
    ks_series_coeff_underflowed,
    log_gamma,
    max_feasible_z,
    mittag_leffler,
    mittag_leffler2,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CONFIG",
    "SeriesConfig",
    "FractalityParams",
    "ProcessSpec",
    "make_spec",
    "log_gamma",
    "ks_series_coeff",
    "ks_series_coeff_underflowed",
    "ks_coeff_ratio_check",
    "ks_coefficients",
    "kilbas_saigo",
    "kilbas_saigo_deriv",
    "mittag_leffler",
    "mittag_leffler2",
    "max_feasible_z",
    "PMFTable",
    "MomentSet",
    "LaplaceSeriesResult",
    "pmf",
    "pmf_table",
    "survival_zero",
    "pgf",
    "mgf",
    "mean",
    "raw_moment",
    "central_moment",
    "variance",
    "skewness",
    "kurtosis_excess",
    "moment_set",
    "interarrival_pdf",
    "interarrival_laplace_series",
    "interarrival_laplace_series_info",
    "interarrival_laplace_quadrature",
    "rate_function",
    "cumulative_rate",
    "compound_mgf",
    "compound_mean",
    "stirling2",
    "stirling1_signed",
    "frac_comb_number",
    "frac_polynomial",
    "frac_number",
    "poly_genfun",
    "ks_via_stirling",
    "ks_identity_sides",
    "RngSpec",
    "SampleSummary",
    "SurvivalTable",
    "KSCheck",
    "JumpDistribution",
    "make_rng",
    "summarize",
    "sample_count",
    "sample_counts",
    "sample_first_arrival",
    "sample_first_arrivals",
    "build_survival_table",
    "first_arrival_ks_check",
    "simulate_path_classical",
    "simulate_counts_classical",
    "sample_compound",
    "sample_compounds",
    "degenerate_jump",
    "exponential_jump",
    "normal_jump",
    "FraccountError",
    "ConstraintError",
    "UnsupportedError",
    "InsufficientDataError",
    "NumericError",
    "DomainError",
    "ConvergenceError",
    "PrecisionLossError",
    "AsymptoticError",
    "IntegrationError",
    "SamplingRangeError",
    "DegenerateDistributionError",
]

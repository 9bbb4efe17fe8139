"""Sojourn times of stationary Gaussian fields: chaos-series variance theory,
explicit convergence-rate bounds, exact circulant-embedding simulation, and
Monte Carlo verification of the central limit behaviour."""

from .bounds import (
    RateBound,
    corollary_condition,
    fixed_level_bound,
    moving_level_bound,
    truncation_fixed,
    truncation_moving,
)
from .covariance import (
    CovarianceModel,
    cauchy,
    l1_norm,
    local_exponent,
    model_from_dict,
    powered_exponential,
    rho,
    rho_power_integral,
    tail_l1,
)
from .errors import (
    CrossValidationError,
    DivergentIntegralError,
    FitMismatchError,
    GridMismatchError,
    NotPositiveSemidefiniteError,
    SojournError,
    ToleranceNotReachedError,
)
from .hermite import (
    ChaosCoefficient,
    HermiteBoundScan,
    InequalityCertificate,
    chaos_coefficient,
    chaos_series,
    chaos_variance_inequality,
    hermite,
    hermite_bound_scan,
    hermite_scaled,
    indicator_variance_series,
    malliavin_derivative_variance_bound,
    mehler_covariance,
)
from .sampler import (
    CirculantSpectrum,
    FieldSample,
    GridSpec,
    circulant_spectrum,
    default_spacing,
    empirical_covariance,
    sample_field,
)
from .study import (
    ConvergenceReport,
    ExperimentConfig,
    LevelSchedule,
    ReportRow,
    SojournStatistic,
    TheoryContext,
    config_from_dict,
    emit_report,
    normalize,
    read_field_dump,
    read_report_csv,
    run_fixed_level_study,
    run_moving_level_study,
    sojourn_time,
    wasserstein1_to_gaussian,
    write_field_dump,
)
from .variance import (
    TwoSidedBounds,
    VarianceBreakdown,
    berman_b_asymptotic,
    berman_localization_ratio,
    berman_lower_bound_audit,
    berman_two_sided_bounds,
    bivariate_density,
    covariance_of_indicators,
    sigma_squared,
    tail_prob,
    var_sojourn_exact,
    variance_breakdown,
)

__version__ = "0.1.0"

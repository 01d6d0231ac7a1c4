"""Scalar-on-function regression with spatially autoregressive errors.

The response of each region is an integral of its curve against an
unknown slope function, and the regression errors follow a simultaneous
autoregression on a proximity matrix.  The package fits the model by
iterative least squares or profile maximum likelihood, builds pointwise
confidence bands for the slope, tests null slopes through a normalized
cross-covariance statistic, and reproduces the accompanying Monte Carlo
study.
"""

__version__ = "0.1.0"

from .basis import (
    Basis,
    CoefficientMatrix,
    FunctionalSample,
    Grid,
    SUPPORTED_BASIS_KINDS,
    evaluate_function,
    inner_product,
    make_basis,
    project,
    truncation_tail_bound,
)
from .errors import (
    DegenerateBasisError,
    DegenerateCovarianceError,
    DegenerateGeometryWarning,
    DegenerateResidualError,
    DeterminantSignError,
    FsarError,
    FsarNumericalError,
    IllConditionedError,
    InsufficientDofError,
    InvalidFitError,
    IsolatedRegionError,
    KernelDegenerateError,
    RankDeficientError,
    RhoOutOfBoundsError,
    SingularDesignError,
    SingularInformationError,
    UnboundedIntervalError,
)
from .estimate import (
    LS_METHOD,
    ML_METHOD,
    SarFit,
    coef_covariance,
    effective_dof,
    estimate_sigma2,
    fit_ls,
    fit_ml,
    gls_coefficients,
)
from .inference import (
    ConfidenceBand,
    OperatorDecomposition,
    TestResult,
    confidence_band,
    default_k_n,
    delta_n_expanded,
    empirical_operators,
    test_beta,
    transform_curves,
    transform_response,
)
from .model import (
    LlGradients,
    ParamPoint,
    TruncatedModel,
    ll_gradients,
    log_likelihood,
    ls_grad_b,
    ls_grad_rho,
    ls_objective,
)
from .sim import (
    MonteCarloSummary,
    ScenarioConfig,
    SlopeTruth,
    mise,
    run_scenario,
    scenario_weights,
    simulate_beta,
    simulate_coordinates,
    simulate_curves,
    simulate_response,
)
from .spatial import (
    RhoInterval,
    SpatialWeights,
    rho_interval,
    row_standardize,
    sar_transform,
    symmetrize,
    weights_from_coordinates,
)

__all__ = [
    "__version__",
    "Basis", "CoefficientMatrix", "FunctionalSample", "Grid",
    "SUPPORTED_BASIS_KINDS", "evaluate_function", "inner_product",
    "make_basis", "project", "truncation_tail_bound",
    "FsarError", "FsarNumericalError", "DegenerateBasisError",
    "DegenerateCovarianceError", "DegenerateGeometryWarning",
    "DegenerateResidualError", "DeterminantSignError", "IllConditionedError",
    "InsufficientDofError", "InvalidFitError", "IsolatedRegionError",
    "KernelDegenerateError", "RankDeficientError", "RhoOutOfBoundsError",
    "SingularDesignError", "SingularInformationError", "UnboundedIntervalError",
    "LS_METHOD", "ML_METHOD", "SarFit", "coef_covariance", "effective_dof",
    "estimate_sigma2", "fit_ls", "fit_ml", "gls_coefficients",
    "ConfidenceBand", "OperatorDecomposition", "TestResult",
    "confidence_band", "default_k_n", "delta_n_expanded",
    "empirical_operators", "test_beta", "transform_curves",
    "transform_response",
    "LlGradients", "ParamPoint", "TruncatedModel", "ll_gradients",
    "log_likelihood", "ls_grad_b", "ls_grad_rho", "ls_objective",
    "MonteCarloSummary", "ScenarioConfig", "SlopeTruth", "mise",
    "run_scenario", "scenario_weights", "simulate_beta",
    "simulate_coordinates", "simulate_curves", "simulate_response",
    "RhoInterval", "SpatialWeights", "rho_interval", "row_standardize",
    "sar_transform", "symmetrize", "weights_from_coordinates",
]

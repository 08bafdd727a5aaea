"""Kernel regression and risk estimation under long-range dependence."""

from .coefficients import (
    CoefficientSequence,
    autocovariances,
    farima_coeffs,
    farima_exact_correlations,
    farima_exact_sum_variance,
    linear_lrd_coeffs,
    partial_sum_variance,
    sum_variance_constant,
)
from .conditions import (
    BandwidthRule,
    ConditionVerdict,
    check_bandwidth_conditions,
    check_negligibility,
    check_shape_mixed_condition,
    check_var_linear_growth,
)
from .estimators import (
    EstimateGrid,
    NadarayaWatson,
    ShapeFunction,
    bias_approx,
    density_estimate,
)
from .functions import DensityModel, RegressionFunction, get_density, get_true_function
from .innovations import InnovationSpec, draw_innovations
from .kernels import KernelSpec, get_kernel, kernel_moments
from .processes import (
    FunctionalParams,
    GarchParams,
    LarchParams,
    PredictorSpec,
    ProcessRun,
    ProcessSpec,
    VolatilityParams,
    conditional_mean_decomposition,
    process_sum_variance,
    simulate_predictors,
    simulate_process,
)
from .risk import (
    BandwidthOptimum,
    RiskReport,
    TheoryConstants,
    ase,
    build_theory_constants,
    cross_term,
    cv_criterion,
    cv_decomposition_diagnostic,
    default_h_grid,
    h_opt_theory,
    integrated_squared_error,
    minimize_over_grid,
    mise_star_theory,
    mise_theory,
    risk_curve,
)
from .samples import RegressionSample, SampleMeta, make_sample
from .slopes import ScalingFit, fit_loglog_slope

__version__ = "0.1.0"

__all__ = [
    "BandwidthOptimum",
    "BandwidthRule",
    "CoefficientSequence",
    "ConditionVerdict",
    "DensityModel",
    "EstimateGrid",
    "FunctionalParams",
    "GarchParams",
    "InnovationSpec",
    "KernelSpec",
    "LarchParams",
    "NadarayaWatson",
    "PredictorSpec",
    "ProcessRun",
    "ProcessSpec",
    "RegressionFunction",
    "RegressionSample",
    "RiskReport",
    "SampleMeta",
    "ScalingFit",
    "ShapeFunction",
    "TheoryConstants",
    "VolatilityParams",
    "ase",
    "autocovariances",
    "bias_approx",
    "build_theory_constants",
    "check_bandwidth_conditions",
    "check_negligibility",
    "check_shape_mixed_condition",
    "check_var_linear_growth",
    "conditional_mean_decomposition",
    "cross_term",
    "cv_criterion",
    "cv_decomposition_diagnostic",
    "default_h_grid",
    "density_estimate",
    "draw_innovations",
    "farima_coeffs",
    "farima_exact_correlations",
    "farima_exact_sum_variance",
    "fit_loglog_slope",
    "get_density",
    "get_kernel",
    "get_true_function",
    "h_opt_theory",
    "integrated_squared_error",
    "kernel_moments",
    "linear_lrd_coeffs",
    "make_sample",
    "minimize_over_grid",
    "mise_star_theory",
    "mise_theory",
    "partial_sum_variance",
    "process_sum_variance",
    "risk_curve",
    "simulate_predictors",
    "simulate_process",
    "sum_variance_constant",
]

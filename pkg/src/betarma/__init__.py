"""Beta autoregressive moving average models for rates and proportions.

Conditional maximum likelihood fitting, parametric bootstrap bias
correction and confidence intervals, mean forecasting, order selection and
a Monte Carlo study harness.
"""

__version__ = "0.1.0"

from .beta import BetaMP, log_pdf, mean_var, sample
from .bootstrap import (
    BootstrapError,
    BootstrapResult,
    bias_corrected,
    ci_boot_se,
    ci_boot_t,
    ci_percentile,
    ci_unbiased_centered,
    run_bootstrap,
)
from .diagnostics import (
    OrderSearchResult,
    sample_acf,
    sample_pacf,
    select_order,
    standardized_residuals,
)
from .estimation import (
    ConfidenceInterval,
    EstimationError,
    FitOptions,
    FitReport,
    asymptotic_ci,
    fit,
    information_matrix,
    starting_values,
)
from .forecast import ForecastPath, accuracy, forecast
from .links import EPS, LinkKind, link, link_deriv, link_inv
from .model import (
    DEGENERATE_LOGLIK,
    BoundedSeries,
    MeanPath,
    ModelOrder,
    ParamVector,
    cond_loglik,
    cond_loglik_grad,
    mean_recursion,
    simulate,
)
from .montecarlo import Scenario, StudyConfig, emit_tables, preset_scenarios, run_study
from .special import DomainError, RngStream, digamma, log_gamma, sample_gamma

__all__ = [
    "__version__",
    "accuracy",
    "asymptotic_ci",
    "BetaMP",
    "bias_corrected",
    "BootstrapError",
    "BootstrapResult",
    "BoundedSeries",
    "ci_boot_se",
    "ci_boot_t",
    "ci_percentile",
    "ci_unbiased_centered",
    "cond_loglik",
    "cond_loglik_grad",
    "ConfidenceInterval",
    "DEGENERATE_LOGLIK",
    "digamma",
    "DomainError",
    "emit_tables",
    "EPS",
    "EstimationError",
    "fit",
    "FitOptions",
    "FitReport",
    "forecast",
    "ForecastPath",
    "information_matrix",
    "link",
    "link_deriv",
    "link_inv",
    "LinkKind",
    "log_gamma",
    "log_pdf",
    "mean_recursion",
    "mean_var",
    "MeanPath",
    "ModelOrder",
    "OrderSearchResult",
    "ParamVector",
    "preset_scenarios",
    "RngStream",
    "run_bootstrap",
    "run_study",
    "sample",
    "sample_acf",
    "sample_gamma",
    "sample_pacf",
    "Scenario",
    "select_order",
    "simulate",
    "standardized_residuals",
    "starting_values",
    "StudyConfig",
]

"""Time-varying weak-form market efficiency toolkit.

Rolling autocorrelation / Ljung-Box diagnostics of monthly return series, and
maximum-likelihood calibration of time-varying AR state-space models (one
homoscedastic and four conditional-variance variants) via a Kalman filter,
with AIC comparison and smoothed efficiency paths.
"""

__version__ = "0.1.0"

from .calibrate import FitResult, aic, compare_models, fit, standard_errors
from .diagnostics import (
    acf_confidence_bound,
    chi_square_sf,
    ljung_box,
    rolling_acf,
    rolling_ljung_box,
    sample_acf,
)
from .ingest import (
    PriceSeries,
    ReturnSeries,
    SummaryStats,
    load_prices,
    log_returns,
    mean_adjust,
    summary_stats,
)
from .models import (
    AgarchTheta,
    GarchMTheta,
    GarchTheta,
    ModelSpec,
    TgarchTheta,
    TvarTheta,
    build_model,
    theta_to_unconstrained,
    unconstrained_to_theta,
)
from .simulate import SimOutput, simulate
from .statespace import (
    FilterOutput,
    SmoothedOutput,
    SystemMatrices,
    TimeInvariantModel,
    log_likelihood,
    rts_smooth,
    run_filter,
)

__all__ = [
    "__version__",
    "FitResult", "aic", "compare_models", "fit", "standard_errors",
    "acf_confidence_bound", "chi_square_sf", "ljung_box",
    "rolling_acf", "rolling_ljung_box", "sample_acf",
    "PriceSeries", "ReturnSeries", "SummaryStats",
    "load_prices", "log_returns", "mean_adjust", "summary_stats",
    "AgarchTheta", "GarchMTheta", "GarchTheta", "ModelSpec",
    "TgarchTheta", "TvarTheta", "build_model",
    "theta_to_unconstrained", "unconstrained_to_theta",
    "SimOutput", "simulate",
    "FilterOutput", "SmoothedOutput", "SystemMatrices", "TimeInvariantModel",
    "log_likelihood", "rts_smooth", "run_filter",
]

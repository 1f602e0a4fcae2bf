"""Time-varying covariance matrix estimation.

A covariance path is parameterized through per-time regressions of each
variable on its predecessors: a Kalman filter tracks the regression
coefficients and univariate GARCH(1,1) models drive the innovation
variances, so every assembled matrix is positive definite by
construction.  The package also ships the evaluation protocol
(moving-block proxy, entrywise MAE/MSE, block-size selection), data
generators, and a CLI for reproducible experiments.
"""

from .evaluation import (
    EvalConfig,
    EvalReport,
    loss_paths,
    moving_block_proxy,
    select_block_size,
)
from .exceptions import ScgarchError
from .garch import GarchFit, GarchParams, garch_filter, garch_fit, garch_loglik, simulate_garch
from .kalman import KalmanConfig, KalmanRun, filter_regression, kalman_predict, kalman_update, tune_state_noise
from .mcd import cov_to_corr, mcd_decompose, mcd_reconstruct
from .model import (
    CholeskyPath,
    CovariancePath,
    ScgarchConfig,
    ScgarchFitResult,
    TimeSeriesPanel,
    bic,
    extract_innovations,
    fit_cgarch,
    fit_model,
    fit_scgarch,
    order_by_bic,
)
from .simulate import (
    Sim1Config,
    Sim2Config,
    generate_sim1,
    generate_sim2,
    sample_mvn,
)

__version__ = "0.1.0"

__all__ = [
    "CholeskyPath",
    "CovariancePath",
    "EvalConfig",
    "EvalReport",
    "GarchFit",
    "GarchParams",
    "KalmanConfig",
    "KalmanRun",
    "ScgarchConfig",
    "ScgarchError",
    "ScgarchFitResult",
    "Sim1Config",
    "Sim2Config",
    "TimeSeriesPanel",
    "bic",
    "cov_to_corr",
    "extract_innovations",
    "filter_regression",
    "fit_cgarch",
    "fit_model",
    "fit_scgarch",
    "garch_filter",
    "garch_fit",
    "garch_loglik",
    "generate_sim1",
    "generate_sim2",
    "kalman_predict",
    "kalman_update",
    "loss_paths",
    "mcd_decompose",
    "mcd_reconstruct",
    "moving_block_proxy",
    "order_by_bic",
    "sample_mvn",
    "select_block_size",
    "simulate_garch",
    "tune_state_noise",
]

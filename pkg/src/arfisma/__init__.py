"""Seasonal fractional ARIMA with symmetric alpha-stable innovations.

Simulation by truncated moving-average filtering and parameter estimation by
the joint empirical characteristic function method or a two-step
MCMC-Whittle + stable-MLE procedure, plus a reproducible Monte Carlo
experiment harness.
"""

__version__ = "0.1.0"

from .ecf import EcfConfig, ecf_objective, empirical_cf, estimate_ecf, joint_cf, select_block_size
from .model import (
    ArfismaParams,
    SeasonalSpec,
    ar_coeffs,
    gegenbauer,
    ma_coeffs,
    power_transfer,
    seasonal_memory_coeffs,
    validate_params,
)
from .presets import PRESETS, get_preset
from .results import EstimationReport, SummaryTable, summarize
from .simulate import SimulationConfig, simulate
from .stable import (
    StableParams,
    alpha_log_likelihood,
    fit_alpha_mle,
    sample_sas,
    sas_density,
    stable_cf,
)
from .twostep import (
    WhittleConfig,
    estimate_memory,
    estimate_two_step,
    filter_residuals,
    mh_frequencies,
    periodogram,
    whittle_objective,
)

__all__ = [
    "ArfismaParams",
    "EcfConfig",
    "EstimationReport",
    "PRESETS",
    "SeasonalSpec",
    "SimulationConfig",
    "StableParams",
    "SummaryTable",
    "WhittleConfig",
    "alpha_log_likelihood",
    "ar_coeffs",
    "ecf_objective",
    "empirical_cf",
    "estimate_ecf",
    "estimate_memory",
    "estimate_two_step",
    "filter_residuals",
    "fit_alpha_mle",
    "gegenbauer",
    "get_preset",
    "joint_cf",
    "ma_coeffs",
    "mh_frequencies",
    "periodogram",
    "power_transfer",
    "sample_sas",
    "sas_density",
    "seasonal_memory_coeffs",
    "select_block_size",
    "simulate",
    "stable_cf",
    "summarize",
    "validate_params",
    "whittle_objective",
]

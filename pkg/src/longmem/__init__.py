"""Classical and modified rescaled range analysis with a Monte Carlo harness."""

__version__ = "0.1.0"

from .baselines import expected_hurst, expected_rs
from .distributions import DistributionSpec, sample, theoretical_moments
from .estimators import (
    EstimationError,
    HurstEstimate,
    build_grid,
    estimate_hurst,
    fit_hurst,
    modified_std,
    optimal_lag,
    rescaled_range_at_scale,
    rs_curve,
)
from .harness import ExperimentConfig, derive_stream, run_experiment, summarize
from .processes import ProcessSpec, arfima_weights, generate_increments, increments_from_levels, integrate

__all__ = [
    "DistributionSpec",
    "EstimationError",
    "ExperimentConfig",
    "HurstEstimate",
    "ProcessSpec",
    "arfima_weights",
    "build_grid",
    "derive_stream",
    "estimate_hurst",
    "expected_hurst",
    "expected_rs",
    "fit_hurst",
    "generate_increments",
    "increments_from_levels",
    "integrate",
    "modified_std",
    "optimal_lag",
    "rescaled_range_at_scale",
    "rs_curve",
    "run_experiment",
    "sample",
    "summarize",
    "theoretical_moments",
]

"""Pointwise-estimator contextual bandits (HOPE) with baselines and a regret harness."""

from ._hope import (
    ConfigError,
    DegenerateQuery,
    StructuralError,
    choose_n,
    default_config,
    fit_lasso,
    fit_rdl,
    project_split,
    pwe_estimate,
    run_experiment,
    run_grid,
    sis_screen,
    validate_config,
)

__all__ = [
    "ConfigError",
    "DegenerateQuery",
    "StructuralError",
    "choose_n",
    "default_config",
    "fit_lasso",
    "fit_rdl",
    "project_split",
    "pwe_estimate",
    "run_experiment",
    "run_grid",
    "sis_screen",
    "validate_config",
]

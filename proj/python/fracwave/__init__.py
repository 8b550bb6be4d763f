"""Fractionally damped Westervelt simulation, pole analysis and coefficient reconstruction."""

from ._core import (
    Error,
    ExperimentConfig,
    NumericalError,
    ValidationError,
    abel_integral,
    caputo_derivative,
    cwch_poles,
    fz_poles,
    invert_linear,
    load_config,
    parse_config,
    reconstruct,
    run_cli,
    simulate,
    singular_values,
    verify_alikhanov,
)

__all__ = [
    "Error",
    "ExperimentConfig",
    "NumericalError",
    "ValidationError",
    "abel_integral",
    "caputo_derivative",
    "cwch_poles",
    "fz_poles",
    "invert_linear",
    "load_config",
    "parse_config",
    "reconstruct",
    "run_cli",
    "simulate",
    "singular_values",
    "verify_alikhanov",
]

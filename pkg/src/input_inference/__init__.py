"""Input inference for control: trajectory optimization by Gaussian message passing."""

from input_inference.errors import (
    ConfigError,
    ContractViolationError,
    DivergenceError,
    EMAbortedError,
    I2CError,
    NumericalError,
)

__all__ = [
    "ConfigError",
    "ContractViolationError",
    "DivergenceError",
    "EMAbortedError",
    "I2CError",
    "NumericalError",
]

"""Exception hierarchy for inference, control and experiment failures."""

from __future__ import annotations

from typing import Any


class I2CError(Exception):
    """Base exception. ``exit_code`` is the process status the CLI reports."""

    exit_code: int = 1

    def __init__(self, message: str, exit_code: int | None = None):
        if exit_code is not None:
            self.exit_code = exit_code
        super().__init__(message)


class ContractViolationError(I2CError):
    """Raised on dimension mismatches and invalid arguments."""

    exit_code = 2


class ConfigError(I2CError):
    """Raised when an experiment configuration cannot be resolved."""

    exit_code = 2


class NumericalError(I2CError):
    """Raised when a matrix that must be inverted is singular or non-finite."""

    exit_code = 3

    def __init__(self, message: str, timestep: int | None = None, edge: str | None = None):
        self.timestep = timestep
        self.edge = edge
        where = []
        if timestep is not None:
            where.append(f"t={timestep}")
        if edge is not None:
            where.append(f"edge={edge}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class EMAbortedError(I2CError):
    """Raised when an E-step or M-step fails; carries the iteration and the partial trace."""

    exit_code = 3

    def __init__(self, message: str, iteration: int, trace: list[Any] | None = None):
        self.iteration = iteration
        self.trace = list(trace or [])
        super().__init__(f"EM aborted at iteration {iteration}: {message}")


class DivergenceError(I2CError):
    """Raised when a simulated state becomes non-finite."""

    exit_code = 4

    def __init__(
        self,
        message: str,
        state: Any = None,
        timestep: int | None = None,
        trial: int | None = None,
    ):
        self.state = state
        self.timestep = timestep
        self.trial = trial
        super().__init__(message)

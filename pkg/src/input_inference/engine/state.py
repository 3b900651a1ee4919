"""Per-timestep message containers, priors and EM configuration.

Edge naming on the per-timestep graph (``X_t -> X'_t -> X''_t -> X'''_t -> X_{t+1}`` and
``U_t -> U'_t -> U''_t``):

=============  ======  =============================================
attribute      edge    meaning
=============  ======  =============================================
``prior_x``    X_t     forward message into the state
``x_obs``      X'_t    state after its observation innovation
``x_dyn``      X''_t   ``A X'_t + a``
``x_noise``    X'''_t  ``X''_t`` plus process noise
``prior_u``    U_t     input prior
``u_obs``      U'_t    input after its observation innovation
``u_in``       U''_t   ``B U'_t``, the input's contribution to X_{t+1}
=============  ======  =============================================
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, Field, model_validator

from input_inference.errors import ContractViolationError
from input_inference.gaussian import GaussianAuxiliary, GaussianCanonical, GaussianMoment
from input_inference.gaussian.linalg import as_vector, inv_psd
from input_inference.models.dynamics import LinearDynamics
from input_inference.models.observation import LinearizedObservation


class TerminalMode(str, Enum):
    QF_EQUALS_Q = "qf_equals_q"
    KAPPA = "kappa"


class EmConfig(BaseModel):
    """Hyperparameters of the EM loop."""

    model_config = {"frozen": True, "extra": "forbid"}

    alpha_init: float = Field(gt=0)
    delta_alpha_inv: float = Field(default=1.0, gt=0, le=1)
    terminal_mode: TerminalMode = TerminalMode.QF_EQUALS_Q
    kappa: float = 10.0
    max_iters: int = Field(default=100, ge=0)
    convergence_tol: float = Field(default=1e-6, ge=0)
    convergence_window: int = Field(default=3, ge=1)
    update_alpha: bool = True
    diagnostics: bool = False

    @model_validator(mode="after")
    def _kappa_above_one(self) -> EmConfig:
        if self.terminal_mode is TerminalMode.KAPPA and not self.kappa > 1:
            raise ValueError(f"kappa must be greater than 1, got {self.kappa}")
        return self


@dataclass(frozen=True, eq=False)
class TerminalCondition:
    """How the backward pass is initialized at ``X_T``.

    In ``QF_EQUALS_Q`` mode the backward message is the observation at ``T`` plus, when
    ``weight`` is given, ``(alpha Q_f x_g, alpha Q_f)``. ``KAPPA`` shrinks the forward
    covariance of ``X_T`` by ``kappa`` and keeps its mean.
    """

    mode: TerminalMode = TerminalMode.QF_EQUALS_Q
    kappa: float = 10.0
    weight: np.ndarray | None = None
    goal: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class Priors:
    """Initial state prior and one input prior per timestep ``t = 0..T``."""

    x0: GaussianMoment
    inputs: tuple[GaussianMoment, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if not self.inputs:
            raise ContractViolationError("at least one input prior is required")
        for t, prior in enumerate(self.inputs):
            if prior.dim != self.inputs[0].dim:
                raise ContractViolationError(f"input prior at t={t} has a different dimension")
            try:
                inv_psd(prior.Sigma, timestep=t, edge="U")
            except Exception as exc:
                raise ContractViolationError(
                    f"input prior covariance at t={t} is not positive definite"
                ) from exc

    @property
    def horizon(self) -> int:
        return len(self.inputs) - 1

    @classmethod
    def isotropic(
        cls,
        x0: ArrayLike,
        *,
        horizon: int,
        d_u: int,
        input_cov: float,
        input_mean: float = 0.0,
        x0_cov: float = 1e-8,
    ) -> Priors:
        x0 = as_vector(x0, "x0")
        state = GaussianMoment(x0, x0_cov * np.eye(x0.shape[0]))
        prior = GaussianMoment(np.full(d_u, float(input_mean)), input_cov * np.eye(d_u))
        return cls(state, (prior,) * (horizon + 1))


@dataclass(frozen=True, eq=False)
class TimestepModel:
    """Linearization used at one timestep; ``dynamics`` is ``None`` at ``T``.

    ``observation`` is ``None`` where no cost observation is attached (the last step when an
    explicit terminal weight replaces it).
    """

    dynamics: LinearDynamics | None
    observation: LinearizedObservation | None


@dataclass(frozen=True, eq=False)
class TimestepMessages:
    t: int
    model: TimestepModel
    prior_x: GaussianMoment
    prior_u: GaussianMoment
    x_obs: GaussianMoment
    u_obs: GaussianMoment
    u_obs_canonical: GaussianCanonical
    x_dyn: GaussianMoment | None = None
    x_noise: GaussianMoment | None = None
    u_in: GaussianMoment | None = None
    # backward pass
    x_bwd: GaussianCanonical | None = None
    x_obs_bwd: GaussianCanonical | None = None
    x_noise_bwd: GaussianCanonical | None = None
    u_bwd: GaussianCanonical | None = None
    u_obs_bwd: GaussianCanonical | None = None
    u_in_bwd: GaussianCanonical | None = None
    x_aux: GaussianAuxiliary | None = None
    x_marginal: GaussianMoment | None = None
    u_marginal: GaussianMoment | None = None


@dataclass(frozen=True, eq=False)
class MessageState:
    steps: tuple[TimestepMessages, ...]
    alpha: float
    terminal: TerminalCondition = field(default_factory=TerminalCondition)

    def __len__(self) -> int:
        return len(self.steps)

    def __getitem__(self, t: int) -> TimestepMessages:
        return self.steps[t]

    def __iter__(self):
        return iter(self.steps)

    @property
    def horizon(self) -> int:
        return len(self.steps) - 1

    @property
    def d_x(self) -> int:
        return self.steps[0].prior_x.dim

    @property
    def d_u(self) -> int:
        return self.steps[0].prior_u.dim

    @property
    def smoothed(self) -> bool:
        return all(step.x_marginal is not None for step in self.steps)

    def marginal_means(self) -> tuple[np.ndarray, np.ndarray]:
        """Posterior means as arrays of shape ``(T+1, d_x)`` and ``(T+1, d_u)``."""
        if not self.smoothed:
            raise ContractViolationError("backward pass has not been run")
        xs = np.array([step.x_marginal.mu for step in self.steps])
        us = np.array([step.u_marginal.mu for step in self.steps])
        return xs, us

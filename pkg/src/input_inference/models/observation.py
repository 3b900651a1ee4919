"""Cost-as-observation models and their linearization."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike

from input_inference.errors import ContractViolationError, NumericalError
from input_inference.gaussian.linalg import (
    as_matrix,
    as_vector,
    check_shape,
    inv_psd,
    is_psd,
    symmetrize,
)
from input_inference.models.dynamics import finite_difference_jacobian

logger = logging.getLogger("input_inference")

FeatureMap = Callable[[np.ndarray, np.ndarray], np.ndarray]
FeatureJacobian = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True, eq=False)
class ObservationModel:
    """Quadratic cost ``(g(x, u) - z_goal)^T Theta (g(x, u) - z_goal)`` read as an observation.

    ``terminal_weight`` is an explicit ``Q_f`` on ``x_T - x_goal``; when it is ``None`` the
    feature observation at ``t = T`` plays the terminal cost (``Q_f = Q``).
    """

    feature_map: FeatureMap
    z_goal: np.ndarray
    Theta: np.ndarray
    d_x: int
    d_u: int
    feature_jacobian: FeatureJacobian | None = None
    terminal_weight: np.ndarray | None = None
    x_goal: np.ndarray | None = None

    def __post_init__(self) -> None:
        z_goal = as_vector(self.z_goal, "z_goal")
        theta = symmetrize(as_matrix(self.Theta, "Theta"))
        check_shape(theta, (z_goal.shape[0], z_goal.shape[0]), "Theta")
        if not np.all(np.isfinite(z_goal)):
            raise ContractViolationError("z_goal must be finite")
        if not is_psd(theta):
            raise ContractViolationError("Theta must be positive semidefinite")
        rank = int(np.linalg.matrix_rank(theta))
        if rank < theta.shape[0]:
            logger.warning(
                "Theta has rank %d of %d, its inverse will be regularized with a diagonal load",
                rank,
                theta.shape[0],
            )
        object.__setattr__(self, "z_goal", z_goal)
        object.__setattr__(self, "Theta", theta)
        if self.terminal_weight is not None:
            weight = symmetrize(as_matrix(self.terminal_weight, "terminal_weight"))
            check_shape(weight, (self.d_x, self.d_x), "terminal_weight")
            if self.x_goal is None:
                raise ContractViolationError("terminal_weight requires x_goal")
            object.__setattr__(self, "terminal_weight", weight)
        if self.x_goal is not None:
            x_goal = as_vector(self.x_goal, "x_goal")
            check_shape(x_goal, (self.d_x,), "x_goal")
            object.__setattr__(self, "x_goal", x_goal)

    @property
    def d_z(self) -> int:
        return self.z_goal.shape[0]

    def features(self, x: ArrayLike, u: ArrayLike) -> np.ndarray:
        return np.asarray(self.feature_map(np.asarray(x, float), np.asarray(u, float)), float)

    def jacobians(self, x: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.feature_jacobian is not None:
            E, F = self.feature_jacobian(x, u)
            return as_matrix(E, "E"), as_matrix(F, "F")
        E = finite_difference_jacobian(lambda xx: self.features(xx, u), x)
        F = finite_difference_jacobian(lambda uu: self.features(x, uu), u)
        return E, F

    @classmethod
    def quadratic(
        cls,
        Q: ArrayLike,
        R: ArrayLike,
        x_goal: ArrayLike,
        u_goal: ArrayLike,
        terminal_weight: ArrayLike | None = None,
    ) -> ObservationModel:
        """LQ case: ``g(x, u) = [x; u]``, ``z_goal = [x_goal; u_goal]``, ``Theta = diag(Q, R)``."""
        Q = as_matrix(Q, "Q")
        R = as_matrix(R, "R")
        d_x, d_u = Q.shape[0], R.shape[0]
        theta = np.zeros((d_x + d_u, d_x + d_u))
        theta[:d_x, :d_x] = Q
        theta[d_x:, d_x:] = R
        jac = (np.vstack([np.eye(d_x), np.zeros((d_u, d_x))]),
               np.vstack([np.zeros((d_x, d_u)), np.eye(d_u)]))
        return cls(
            feature_map=lambda x, u: np.concatenate([x, u]),
            z_goal=np.concatenate([as_vector(x_goal), as_vector(u_goal)]),
            Theta=theta,
            d_x=d_x,
            d_u=d_u,
            feature_jacobian=lambda x, u: jac,
            terminal_weight=None if terminal_weight is None else as_matrix(terminal_weight),
            x_goal=as_vector(x_goal),
        )


@dataclass(frozen=True, eq=False)
class LinearizedObservation:
    """``z = E x + F u + e + xi``, ``xi ~ N(0, Sigma_xi)``, ``Sigma_xi = (alpha Theta)^-1``.

    ``z`` is the observed value, i.e. the cost target ``z_goal``.
    """

    E: np.ndarray
    F: np.ndarray
    e: np.ndarray
    Sigma_xi: np.ndarray
    alpha: float
    z: np.ndarray

    def __post_init__(self) -> None:
        E = as_matrix(self.E, "E")
        F = as_matrix(self.F, "F")
        d_z = E.shape[0]
        if F.shape[0] != d_z:
            raise ContractViolationError(f"F has shape {F.shape}, expected {d_z} rows")
        e = as_vector(self.e, "e")
        z = as_vector(self.z, "z")
        check_shape(e, (d_z,), "e")
        check_shape(z, (d_z,), "z")
        sigma = symmetrize(as_matrix(self.Sigma_xi, "Sigma_xi"))
        check_shape(sigma, (d_z, d_z), "Sigma_xi")
        if not self.alpha > 0:
            raise ContractViolationError(f"alpha must be positive, got {self.alpha}")
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "Sigma_xi", sigma)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def d_z(self) -> int:
        return self.E.shape[0]


def linearize_observation(
    model: ObservationModel, alpha: float, x0: ArrayLike, u0: ArrayLike
) -> LinearizedObservation:
    if not alpha > 0:
        raise ContractViolationError(f"alpha must be positive, got {alpha}")
    x = as_vector(x0, "x0")
    u = as_vector(u0, "u0")
    check_shape(x, (model.d_x,), "x0")
    check_shape(u, (model.d_u,), "u0")

    E, F = model.jacobians(x, u)
    check_shape(E, (model.d_z, model.d_x), "E")
    check_shape(F, (model.d_z, model.d_u), "F")
    if not (np.all(np.isfinite(E)) and np.all(np.isfinite(F))):
        raise NumericalError("non-finite feature Jacobian")
    e = model.features(x, u) - E @ x - F @ u
    try:
        sigma_xi = inv_psd(alpha * model.Theta, edge="Theta")
    except NumericalError as exc:
        raise NumericalError("cost weight Theta is singular", edge="Theta") from exc
    return LinearizedObservation(E=E, F=F, e=e, Sigma_xi=sigma_xi, alpha=alpha, z=model.z_goal)

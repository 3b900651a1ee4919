"""Finite-horizon discrete-time LQR by dynamic programming.

Cost ``sum_{t<T} (x_t - x_g)^T Q (x_t - x_g) + (u_t - u_g)^T R (u_t - u_g)`` plus
``(x_T - x_g)^T Q_f (x_T - x_g)``, dynamics ``x_{t+1} = A_t x_t + B_t u_t + a_t``. The value
function is ``V_t(x) = x^T P_t x + 2 x^T p_t + c_t``.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg

from input_inference.controller.policy import LinearGaussianController
from input_inference.errors import ContractViolationError, NumericalError
from input_inference.gaussian.linalg import as_matrix, as_vector, check_shape, symmetrize
from input_inference.models.dynamics import LinearDynamics
from input_inference.utils.timing import timed

logger = logging.getLogger("input_inference")


@dataclass(frozen=True, eq=False)
class QuadraticValue:
    """``P`` of shape ``(T+1, d_x, d_x)``, ``p`` of shape ``(T+1, d_x)`` and scalars ``c``."""

    P: np.ndarray
    p: np.ndarray
    c: np.ndarray

    def value(self, t: int, x: ArrayLike) -> float:
        x = as_vector(x, "x")
        return float(x @ self.P[t] @ x + 2.0 * x @ self.p[t] + self.c[t])


def _per_step(
    dyn: LinearDynamics | Sequence[LinearDynamics], horizon: int
) -> list[LinearDynamics]:
    if isinstance(dyn, LinearDynamics):
        return [dyn] * horizon
    steps = list(dyn)
    if len(steps) != horizon:
        raise ContractViolationError(f"{len(steps)} dynamics for horizon {horizon}")
    return steps


@timed
def solve_lqr(
    dyn: LinearDynamics | Sequence[LinearDynamics],
    Q: ArrayLike,
    R: ArrayLike,
    Q_f: ArrayLike,
    x_goal: ArrayLike,
    u_goal: ArrayLike,
    horizon: int,
) -> tuple[LinearGaussianController, QuadraticValue]:
    """Backward Riccati recursion; returns gains for ``t = 0..T-1`` (zero covariance) and ``V``."""
    if horizon < 1:
        raise ContractViolationError(f"horizon must be at least 1, got {horizon}")
    steps = _per_step(dyn, horizon)
    d_x, d_u = steps[0].d_x, steps[0].d_u
    Q = as_matrix(Q, "Q")
    R = as_matrix(R, "R")
    Q_f = as_matrix(Q_f, "Q_f")
    x_goal = as_vector(x_goal, "x_goal")
    u_goal = as_vector(u_goal, "u_goal")
    check_shape(Q, (d_x, d_x), "Q")
    check_shape(Q_f, (d_x, d_x), "Q_f")
    check_shape(R, (d_u, d_u), "R")
    check_shape(x_goal, (d_x,), "x_goal")
    check_shape(u_goal, (d_u,), "u_goal")

    P = np.zeros((horizon + 1, d_x, d_x))
    p = np.zeros((horizon + 1, d_x))
    c = np.zeros(horizon + 1)
    K = np.zeros((horizon, d_u, d_x))
    k = np.zeros((horizon, d_u))

    P[horizon] = symmetrize(Q_f)
    p[horizon] = -Q_f @ x_goal
    c[horizon] = x_goal @ Q_f @ x_goal
    state_cost = x_goal @ Q @ x_goal

    for t in range(horizon - 1, -1, -1):
        A, B, a = steps[t].A, steps[t].B, steps[t].a
        P1, p1 = P[t + 1], p[t + 1]
        H = symmetrize(R + B.T @ P1 @ B)
        rhs = np.column_stack([B.T @ P1 @ A, B.T @ (P1 @ a + p1) - R @ u_goal])
        try:
            sol = linalg.cho_solve(linalg.cho_factor(H, lower=True), rhs)
        except linalg.LinAlgError as exc:
            raise NumericalError("R + B^T P B is not positive definite", timestep=t) from exc
        K[t] = -sol[:, :d_x]
        k[t] = -sol[:, d_x]

        closed = A + B @ K[t]
        drift = a + B @ k[t]
        P[t] = symmetrize(Q + closed.T @ P1 @ closed + K[t].T @ R @ K[t])
        p[t] = closed.T @ (P1 @ drift + p1) + K[t].T @ R @ (k[t] - u_goal) - Q @ x_goal
        du = k[t] - u_goal
        c[t] = state_cost + du @ R @ du + drift @ P1 @ drift + 2.0 * drift @ p1 + c[t + 1]

    logger.debug("LQR solved for horizon %d", horizon)
    controller = LinearGaussianController(K, k, np.zeros((horizon, d_u, d_u)))
    return controller, QuadraticValue(P, p, c)


def lqr_rollout(
    dyn: LinearDynamics | Sequence[LinearDynamics],
    controller: LinearGaussianController,
    x0: ArrayLike,
    horizon: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Noise-free closed loop; ``T+1`` states and ``T`` inputs."""
    steps = _per_step(dyn, horizon)
    if len(controller) < horizon:
        raise ContractViolationError(
            f"controller covers {len(controller)} steps, horizon is {horizon}"
        )
    xs = [as_vector(x0, "x0")]
    check_shape(xs[0], (steps[0].d_x,), "x0")
    us = []
    for t in range(horizon):
        u = controller.mean_action(t, xs[-1])
        us.append(u)
        xs.append(steps[t].mean_step(xs[-1], u))
    return np.array(xs), np.array(us).reshape(horizon, steps[0].d_u)

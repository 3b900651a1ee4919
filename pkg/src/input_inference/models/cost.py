"""Trajectory cost in feature space."""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike

from input_inference.errors import ContractViolationError
from input_inference.models.observation import ObservationModel


def cost_increments(model: ObservationModel, xs: ArrayLike, us: ArrayLike) -> np.ndarray:
    """Per-timestep cost for ``t = 0..T``.

    With an explicit terminal weight the last entry is ``(x_T - x_g)^T Q_f (x_T - x_g)``,
    otherwise it is the feature cost at ``T``.
    """
    xs = np.asarray(xs, dtype=float)
    us = np.asarray(us, dtype=float)
    if xs.ndim != 2 or us.ndim != 2 or xs.shape[0] != us.shape[0]:
        raise ContractViolationError(
            f"states and inputs must both have T+1 rows, got {xs.shape} and {us.shape}"
        )
    if xs.shape[1] != model.d_x or us.shape[1] != model.d_u:
        raise ContractViolationError("trajectory dimensions do not match the cost model")

    increments = np.empty(xs.shape[0])
    for t in range(xs.shape[0]):
        r = model.features(xs[t], us[t]) - model.z_goal
        increments[t] = r @ model.Theta @ r
    if model.terminal_weight is not None:
        dx = xs[-1] - model.x_goal
        increments[-1] = dx @ model.terminal_weight @ dx
    return increments


def trajectory_cost(model: ObservationModel, xs: ArrayLike, us: ArrayLike) -> float:
    return float(np.sum(cost_increments(model, xs, us)))

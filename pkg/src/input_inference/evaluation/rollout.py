"""Closed-loop simulation of a controller on an environment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from input_inference.controller.policy import LinearGaussianController
from input_inference.errors import ContractViolationError, DivergenceError
from input_inference.gaussian.linalg import as_vector
from input_inference.models.cost import trajectory_cost
from input_inference.models.environments import Environment, sample_process_noise
from input_inference.models.observation import ObservationModel


@dataclass(frozen=True, eq=False)
class Rollout:
    states: np.ndarray
    inputs: np.ndarray
    cost: float


def rollout(
    env: Environment,
    controller: LinearGaussianController,
    model: ObservationModel,
    x0: ArrayLike | None = None,
    *,
    stochastic: bool = False,
    rng: np.random.Generator | None = None,
    sample_policy: bool = False,
) -> Rollout:
    """Apply ``u_t = clip(K_t x_t + k_t)`` for ``t = 0..T``.

    ``stochastic`` adds process noise drawn from ``rng``; ``sample_policy`` draws inputs from
    ``N(K x + k, Sigma_k)`` before clipping. A controller covering only ``t < T`` applies a zero
    input at ``T``, where it only enters the cost.
    """
    T = env.horizon
    if len(controller) not in (T, T + 1):
        raise ContractViolationError(
            f"controller covers {len(controller)} steps, environment horizon is {T}"
        )
    if controller.d_x != env.d_x or controller.d_u != env.d_u:
        raise ContractViolationError("controller dimensions do not match the environment")
    if (stochastic or sample_policy) and rng is None:
        raise ContractViolationError("a random generator is required for stochastic rollouts")

    policy_rng = rng if sample_policy else None
    x = env.initial_state() if x0 is None else as_vector(x0, "x0")
    states = [x]
    inputs = []
    for t in range(T):
        u = controller.act(t, x, env.u_limit, policy_rng)
        noise = sample_process_noise(env, rng) if stochastic else None
        try:
            x = env.step(x, u, noise)
        except DivergenceError as exc:
            raise DivergenceError(str(exc), state=exc.state, timestep=t) from exc
        states.append(x)
        inputs.append(u)
    if len(controller) > T:
        inputs.append(controller.act(T, x, env.u_limit, policy_rng))
    else:
        inputs.append(np.zeros(env.d_u))

    xs, us = np.array(states), np.array(inputs)
    return Rollout(states=xs, inputs=us, cost=trajectory_cost(model, xs, us))

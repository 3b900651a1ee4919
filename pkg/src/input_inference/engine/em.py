"""Expectation maximization over linearized trajectories."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from input_inference.controller.extraction import extract_controller
from input_inference.controller.policy import LinearGaussianController
from input_inference.engine.backward import backward_pass
from input_inference.engine.forward import forward_pass, forward_pass_relinearized
from input_inference.engine.mstep import m_step_alpha, negative_log_likelihood
from input_inference.engine.state import (
    EmConfig,
    MessageState,
    Priors,
    TerminalCondition,
    TimestepModel,
)
from input_inference.errors import ContractViolationError, EMAbortedError, I2CError, NumericalError
from input_inference.gaussian import GaussianMoment
from input_inference.models.cost import trajectory_cost
from input_inference.models.dynamics import linearize_dynamics
from input_inference.models.environments import Environment, rollout_open_loop
from input_inference.models.observation import ObservationModel, linearize_observation
from input_inference.utils.timing import timed

logger = logging.getLogger("input_inference")

PRIOR_ROLLOUT_RTOL = 1e-9


@dataclass(frozen=True)
class ConvergenceRecord:
    iteration: int
    predicted_cost: float
    alpha: float
    nll: float


@dataclass(frozen=True, eq=False)
class EmResult:
    """Outcome of :func:`em_iterate`.

    ``history`` holds the message state of every iteration when diagnostics are enabled and
    only the final one otherwise. ``msgs`` is ``None`` when no iteration ran.
    """

    controller: LinearGaussianController
    trace: list[ConvergenceRecord]
    priors: Priors
    msgs: MessageState | None = None
    history: tuple[MessageState, ...] = ()
    converged: bool = False
    diagnostic_controllers: tuple[LinearGaussianController, ...] = field(default=())


def terminal_condition(config: EmConfig, model: ObservationModel) -> TerminalCondition:
    return TerminalCondition(
        mode=config.terminal_mode,
        kappa=config.kappa,
        weight=model.terminal_weight,
        goal=model.x_goal,
    )


def linearize_trajectory(
    env: Environment,
    model: ObservationModel,
    xs: np.ndarray,
    us: np.ndarray,
    alpha: float,
) -> tuple[TimestepModel, ...]:
    """Per-timestep linearization along ``(x_t, u_t)``, ``t = 0..T``.

    No dynamics are attached at ``T``; with an explicit terminal weight neither is the feature
    observation, whose role the terminal weight takes over.
    """
    T = len(xs) - 1
    if len(us) != T + 1:
        raise ContractViolationError(f"{len(xs)} states but {len(us)} inputs")
    models = []
    for t in range(T + 1):
        dynamics = linearize_dynamics(env, xs[t], us[t]) if t < T else None
        if t == T and model.terminal_weight is not None:
            observation = None
        else:
            observation = linearize_observation(model, alpha, xs[t], us[t])
        models.append(TimestepModel(dynamics=dynamics, observation=observation))
    return tuple(models)


def refresh_priors(priors: Priors, msgs: MessageState) -> Priors:
    """Input posteriors become the next iteration's input priors."""
    inputs = tuple(GaussianMoment(step.u_marginal.mu, step.u_marginal.Sigma) for step in msgs)
    return Priors(priors.x0, inputs)


def _relative_change(new: float, old: float) -> float:
    return abs(new - old) / max(abs(old), np.finfo(float).tiny)


def _left_prior_rollout(cost: float, initial: float) -> bool:
    """False while the predicted cost is still that of the prior rollout, up to rounding."""
    return not math.isclose(cost, initial, rel_tol=PRIOR_ROLLOUT_RTOL)


@timed
def em_iterate(
    env: Environment, model: ObservationModel, priors: Priors, config: EmConfig
) -> EmResult:
    """Run EM from the open-loop rollout of the prior input means.

    Trace row 0 is the cost of that rollout; row ``i`` is the cost at the marginal means of
    E-step ``i`` with the ``alpha`` that E-step used. Every E-step relinearizes along its
    forward pass, starting from the current input priors. Stops when the relative cost change
    stays below ``convergence_tol`` for ``convergence_window`` consecutive iterations; no
    iteration counts towards that while the cost still equals the prior rollout's, so a start
    on an equilibrium gets the whole budget to move away from it.
    """
    if model.d_x != env.d_x or model.d_u != env.d_u:
        raise ContractViolationError("cost model dimensions do not match the environment")
    if priors.x0.dim != env.d_x or priors.inputs[0].dim != env.d_u:
        raise ContractViolationError("prior dimensions do not match the environment")

    if config.max_iters == 0:
        return EmResult(
            controller=LinearGaussianController.from_priors(priors), trace=[], priors=priors
        )

    terminal = terminal_condition(config, model)
    alpha = config.alpha_init
    us = np.array([prior.mu for prior in priors.inputs])
    trace: list[ConvergenceRecord] = []
    history: list[MessageState] = []
    diagnostics: list[LinearGaussianController] = []
    msgs: MessageState | None = None
    converged = False
    quiet = 0

    iteration = 0
    try:
        xs = rollout_open_loop(env, priors.x0.mu, us[:-1])
        models = linearize_trajectory(env, model, xs, us, alpha)
        initial = replace(forward_pass(models, priors, alpha), terminal=terminal)
        trace.append(
            ConvergenceRecord(
                0, trajectory_cost(model, xs, us), alpha, negative_log_likelihood(initial, xs, us)
            )
        )

        for iteration in range(1, config.max_iters + 1):
            msgs = backward_pass(forward_pass_relinearized(env, model, priors, alpha), terminal)
            xs, us = msgs.marginal_means()
            cost = trajectory_cost(model, xs, us)
            if not np.isfinite(cost):
                raise NumericalError(f"predicted cost is not finite ({cost})")
            record = ConvergenceRecord(iteration, cost, alpha, negative_log_likelihood(msgs))
            trace.append(record)
            logger.info(
                "EM iteration %d: predicted cost %.6g, alpha %.6g", iteration, cost, alpha
            )

            if config.diagnostics:
                history.append(msgs)
                diagnostics.append(extract_controller(msgs))
            if config.update_alpha:
                alpha = m_step_alpha(msgs, model.Theta, alpha, config.delta_alpha_inv)
            priors = refresh_priors(priors, msgs)

            if _left_prior_rollout(cost, trace[0].predicted_cost) and iteration > 1:
                change = _relative_change(cost, trace[-2].predicted_cost)
                quiet = quiet + 1 if change < config.convergence_tol else 0
            else:
                quiet = 0
            if quiet >= config.convergence_window:
                converged = True
                logger.info("EM converged after %d iterations", iteration)
                break

        controller = extract_controller(msgs)
    except I2CError as exc:
        logger.error("EM aborted at iteration %d: %s", iteration, exc)
        raise EMAbortedError(str(exc), iteration, trace) from exc

    return EmResult(
        controller=controller,
        trace=trace,
        priors=priors,
        msgs=msgs,
        history=tuple(history) if config.diagnostics else (msgs,),
        converged=converged,
        diagnostic_controllers=tuple(diagnostics),
    )

"""Backward (smoothing) pass: backward messages, auxiliaries and marginals."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from input_inference.errors import ContractViolationError
from input_inference.gaussian import (
    GaussianCanonical,
    GaussianMoment,
    add_bwd,
    auxiliary_from_backward,
    auxiliary_through,
    backward_through_noise,
    equality_fuse,
    linear_transform_bwd,
    marginal_from_auxiliary,
    to_canonical,
)
from input_inference.engine.forward import input_evidence, state_evidence
from input_inference.engine.state import (
    MessageState,
    TerminalCondition,
    TerminalMode,
    TimestepMessages,
)


def terminal_backward(
    step: TimestepMessages, alpha: float, terminal: TerminalCondition
) -> tuple[GaussianCanonical, GaussianCanonical | None]:
    """Backward message on ``X_T`` and the part of it that does not come from ``z_T``.

    Returns ``(x_bwd, x_obs_bwd)``; ``x_obs_bwd`` is ``None`` in ``KAPPA`` mode, where the
    message is ``(kappa - 1)`` times the forward canonical form of ``X_T`` so that the marginal
    keeps the forward mean and divides the covariance by ``kappa``.
    """
    d_x = step.prior_x.dim
    if terminal.mode is TerminalMode.KAPPA:
        fwd = to_canonical(step.prior_x, timestep=step.t, edge="X_T")
        scale = terminal.kappa - 1.0
        return GaussianCanonical(scale * fwd.nu, scale * fwd.Lambda), None

    if terminal.weight is None:
        x_obs_bwd = GaussianCanonical.vacuous(d_x)
    else:
        if terminal.goal is None:
            raise ContractViolationError("terminal weight requires a goal state")
        weight = alpha * np.asarray(terminal.weight, dtype=float)
        x_obs_bwd = GaussianCanonical(weight @ np.asarray(terminal.goal, dtype=float), weight)
    evidence = state_evidence(step.model.observation, step.prior_u, d_x, step.t)
    return equality_fuse(x_obs_bwd, evidence), x_obs_bwd


def backward_pass(msgs: MessageState, terminal: TerminalCondition | None = None) -> MessageState:
    """Smooth a forward-passed :class:`MessageState`.

    Backward messages are propagated in canonical form from ``X_T`` down to ``X_0``; the
    auxiliary of ``X_{t+1}`` is carried back through the sum and noise nodes unchanged and
    through ``A`` (state branch) and ``B`` (input branch) to give the marginals of ``X'_t``
    and ``U'_t``.
    """
    terminal = terminal or msgs.terminal
    steps = list(msgs.steps)
    T = len(steps) - 1
    d_x, d_u = msgs.d_x, msgs.d_u

    last = steps[T]
    x_bwd, x_obs_bwd = terminal_backward(last, msgs.alpha, terminal)
    x_aux = auxiliary_from_backward(last.prior_x, x_bwd, timestep=T, edge="X")
    steps[T] = replace(
        last,
        x_bwd=x_bwd,
        x_obs_bwd=x_obs_bwd,
        u_bwd=input_evidence(last.model.observation, last.prior_x, d_u, T),
        x_aux=x_aux,
        x_marginal=marginal_from_auxiliary(last.prior_x, x_aux),
        u_marginal=last.u_obs,
    )

    for t in range(T - 1, -1, -1):
        step, nxt = steps[t], steps[t + 1]
        dyn = step.model.dynamics
        obs = step.model.observation

        x_noise_bwd = add_bwd(nxt.x_bwd, step.u_in, timestep=t, edge="X'''")
        x_dyn_bwd = backward_through_noise(x_noise_bwd, dyn.Sigma_eta, timestep=t, edge="X''")
        x_obs_bwd = linear_transform_bwd(
            dyn.A, add_bwd(x_dyn_bwd, GaussianMoment.point(dyn.a), timestep=t, edge="AX'")
        )
        x_bwd = equality_fuse(x_obs_bwd, state_evidence(obs, step.prior_u, d_x, t))

        u_in_bwd = add_bwd(nxt.x_bwd, step.x_noise, timestep=t, edge="U''")
        u_obs_bwd = linear_transform_bwd(dyn.B, u_in_bwd)
        u_bwd = equality_fuse(u_obs_bwd, input_evidence(obs, step.prior_x, d_u, t))

        steps[t] = replace(
            step,
            x_bwd=x_bwd,
            x_obs_bwd=x_obs_bwd,
            x_noise_bwd=x_noise_bwd,
            u_bwd=u_bwd,
            u_obs_bwd=u_obs_bwd,
            u_in_bwd=u_in_bwd,
            x_aux=auxiliary_from_backward(step.prior_x, x_bwd, timestep=t, edge="X"),
            x_marginal=marginal_from_auxiliary(
                step.x_obs, auxiliary_through(dyn.A, nxt.x_aux)
            ),
            u_marginal=marginal_from_auxiliary(
                step.u_obs, auxiliary_through(dyn.B, nxt.x_aux)
            ),
        )

    return MessageState(tuple(steps), msgs.alpha, terminal)

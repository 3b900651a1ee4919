"""Forward (filtering) pass over the per-timestep graph."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from input_inference.errors import ContractViolationError
from input_inference.gaussian import (
    GaussianCanonical,
    GaussianMoment,
    add_fwd,
    equality_fuse,
    fuse_marginal,
    linear_transform_fwd,
    to_canonical,
    to_moment,
)
from input_inference.gaussian.linalg import solve_psd
from input_inference.engine.state import MessageState, Priors, TimestepMessages, TimestepModel
from input_inference.models.dynamics import linearize_dynamics
from input_inference.models.environments import Environment
from input_inference.models.observation import (
    LinearizedObservation,
    ObservationModel,
    linearize_observation,
)


def input_evidence(
    obs: LinearizedObservation | None, prior_x: GaussianMoment, d_u: int, t: int
) -> GaussianCanonical:
    """Observation message on the input with the state at its forward belief.

    ``Lambda = F^T S^-1 F``, ``nu = F^T S^-1 (z - E mu_x - e)``, ``S = Sigma_xi + E Sigma_x E^T``.
    """
    if obs is None:
        return GaussianCanonical.vacuous(d_u)
    S = obs.Sigma_xi + obs.E @ prior_x.Sigma @ obs.E.T
    rhs = np.column_stack([obs.z - obs.E @ prior_x.mu - obs.e, obs.F])
    sol = solve_psd(S, rhs, timestep=t, edge="Z(u)")
    return GaussianCanonical(obs.F.T @ sol[:, 0], obs.F.T @ sol[:, 1:])


def state_evidence(
    obs: LinearizedObservation | None, prior_u: GaussianMoment, d_x: int, t: int
) -> GaussianCanonical:
    """Observation message on the state with the input at its prior.

    ``Lambda = E^T S^-1 E``, ``nu = E^T S^-1 (z - F mu_u - e)``, ``S = Sigma_xi + F Sigma_u F^T``.
    """
    if obs is None:
        return GaussianCanonical.vacuous(d_x)
    S = obs.Sigma_xi + obs.F @ prior_u.Sigma @ obs.F.T
    rhs = np.column_stack([obs.z - obs.F @ prior_u.mu - obs.e, obs.E])
    sol = solve_psd(S, rhs, timestep=t, edge="Z(x)")
    return GaussianCanonical(obs.E.T @ sol[:, 0], obs.E.T @ sol[:, 1:])


def _check_models(models: Sequence[TimestepModel], priors: Priors) -> None:
    if len(models) != len(priors.inputs):
        raise ContractViolationError(
            f"{len(models)} timestep models but {len(priors.inputs)} input priors"
        )
    for t, model in enumerate(models[:-1]):
        if model.dynamics is None:
            raise ContractViolationError(f"missing dynamics at t={t}")
        if model.dynamics.d_x != priors.x0.dim or model.dynamics.d_u != priors.inputs[t].dim:
            raise ContractViolationError(f"dynamics dimensions do not match priors at t={t}")


def _innovate(
    t: int,
    obs: LinearizedObservation | None,
    prior_x: GaussianMoment,
    prior_u: GaussianMoment,
) -> tuple[GaussianMoment, GaussianMoment, GaussianCanonical]:
    """Observation updates of ``U_t`` and ``X_t``, in the field order of the step messages."""
    d_x, d_u = prior_x.dim, prior_u.dim
    u_obs_canonical = equality_fuse(
        to_canonical(prior_u, timestep=t, edge="U"), input_evidence(obs, prior_x, d_u, t)
    )
    u_obs = to_moment(u_obs_canonical, timestep=t, edge="U'")
    x_obs = fuse_marginal(prior_x, state_evidence(obs, prior_u, d_x, t), timestep=t, edge="X'")
    return x_obs, u_obs, u_obs_canonical


def _propagate(
    t: int,
    model: TimestepModel,
    prior_x: GaussianMoment,
    prior_u: GaussianMoment,
    innovation: tuple[GaussianMoment, GaussianMoment, GaussianCanonical],
) -> tuple[TimestepMessages, GaussianMoment]:
    x_obs, u_obs, u_obs_canonical = innovation
    dyn = model.dynamics
    u_in = linear_transform_fwd(dyn.B, u_obs)
    x_dyn = add_fwd(linear_transform_fwd(dyn.A, x_obs), GaussianMoment.point(dyn.a))
    x_noise = add_fwd(x_dyn, GaussianMoment(np.zeros(prior_x.dim), dyn.Sigma_eta))
    step = TimestepMessages(
        t,
        model,
        prior_x,
        prior_u,
        x_obs,
        u_obs,
        u_obs_canonical,
        x_dyn=x_dyn,
        x_noise=x_noise,
        u_in=u_in,
    )
    return step, add_fwd(x_noise, u_in)


def forward_pass(
    models: Sequence[TimestepModel], priors: Priors, alpha: float | None = None
) -> MessageState:
    """Run the forward recursion for ``t = 0..T`` over fixed linearizations.

    Per timestep: input innovation, propagation of the input through ``B``, state innovation,
    propagation through ``A`` with offset ``a``, process noise, and the sum giving the
    forward message of ``X_{t+1}``. ``alpha`` is read from the observations when omitted.
    """
    models = tuple(models)
    _check_models(models, priors)
    if alpha is None:
        alphas = [m.observation.alpha for m in models if m.observation is not None]
        alpha = alphas[0] if alphas else 1.0

    prior_x = priors.x0
    steps = []
    for t, model in enumerate(models):
        prior_u = priors.inputs[t]
        innovation = _innovate(t, model.observation, prior_x, prior_u)
        if model.dynamics is None:
            steps.append(TimestepMessages(t, model, prior_x, prior_u, *innovation))
            continue
        step, prior_x = _propagate(t, model, prior_x, prior_u, innovation)
        steps.append(step)

    return MessageState(tuple(steps), float(alpha))


def forward_pass_relinearized(
    env: Environment, cost: ObservationModel, priors: Priors, alpha: float
) -> MessageState:
    """Forward recursion that linearizes the system as it filters.

    The observation at ``t`` is expanded around the forward means of ``X_t`` and ``U_t``, the
    dynamics around the means after the observation update. The forward mean of ``X_{t+1}``
    is therefore the nonlinear step of the filtered means, and deviations picked up early in
    the horizon are seen by the linearizations further along it.
    """
    if priors.x0.dim != env.d_x or priors.inputs[0].dim != env.d_u:
        raise ContractViolationError("prior dimensions do not match the environment")
    T = priors.horizon
    prior_x = priors.x0
    steps = []
    for t in range(T + 1):
        prior_u = priors.inputs[t]
        if t == T and cost.terminal_weight is not None:
            obs = None
        else:
            obs = linearize_observation(cost, alpha, prior_x.mu, prior_u.mu)
        innovation = _innovate(t, obs, prior_x, prior_u)
        if t == T:
            model = TimestepModel(dynamics=None, observation=obs)
            steps.append(TimestepMessages(t, model, prior_x, prior_u, *innovation))
            break
        x_obs, u_obs, _ = innovation
        dynamics = linearize_dynamics(env, x_obs.mu, u_obs.mu)
        model = TimestepModel(dynamics=dynamics, observation=obs)
        step, prior_x = _propagate(t, model, prior_x, prior_u, innovation)
        steps.append(step)

    return MessageState(tuple(steps), float(alpha))

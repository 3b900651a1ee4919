"""M-step for the observation precision scale ``alpha`` and the likelihood surrogate."""

from __future__ import annotations

import logging

import numpy as np
from numpy.typing import ArrayLike

from input_inference.errors import ContractViolationError, NumericalError
from input_inference.gaussian.linalg import as_matrix, inv_psd
from input_inference.engine.state import MessageState, TerminalMode

logger = logging.getLogger("input_inference")


def expected_residual_covariance(msgs: MessageState) -> np.ndarray:
    """``sum_t E[(z - E x - F u - e)(...)^T]`` under the marginals, over observed timesteps."""
    if not msgs.smoothed:
        raise ContractViolationError("m-step needs marginals; run the backward pass first")
    total = None
    for step in msgs:
        obs = step.model.observation
        if obs is None:
            continue
        x, u = step.x_marginal, step.u_marginal
        r = obs.z - obs.E @ x.mu - obs.F @ u.mu - obs.e
        term = np.outer(r, r) + obs.E @ x.Sigma @ obs.E.T + obs.F @ u.Sigma @ obs.F.T
        total = term if total is None else total + term
    if total is None:
        raise ContractViolationError("no observations to estimate alpha from")
    return total


def optimal_alpha(msgs: MessageState, theta: ArrayLike) -> float:
    """Unconstrained maximizer ``T d_z / tr(Theta Sigma_xi_hat)``."""
    theta = as_matrix(theta, "Theta")
    sigma_hat = expected_residual_covariance(msgs)
    if theta.shape != sigma_hat.shape:
        raise ContractViolationError(
            f"Theta has shape {theta.shape}, residual covariance {sigma_hat.shape}"
        )
    trace = float(np.trace(theta @ sigma_hat))
    if not np.isfinite(trace) or trace <= 0.0:
        raise NumericalError(f"tr(Theta Sigma_xi) must be positive, got {trace}", edge="Z")
    return msgs.horizon * theta.shape[0] / trace


def m_step_alpha(
    msgs: MessageState, theta: ArrayLike, alpha: float, delta_alpha_inv: float
) -> float:
    """New ``alpha``, capped so that ``alpha_new <= alpha / delta_alpha_inv``."""
    if not 0.0 < delta_alpha_inv <= 1.0:
        raise ContractViolationError(f"delta_alpha_inv must be in (0, 1], got {delta_alpha_inv}")
    alpha_star = optimal_alpha(msgs, theta)
    cap = alpha / delta_alpha_inv
    if alpha_star > cap:
        logger.debug("alpha update %.6g capped at %.6g", alpha_star, cap)
    return min(alpha_star, cap)


def negative_log_likelihood(
    msgs: MessageState, xs: np.ndarray | None = None, us: np.ndarray | None = None
) -> float:
    """Negative log-likelihood of a trajectory under the linearized model, up to a constant.

    Observation residuals are weighted by ``alpha Theta``, dynamics residuals by the
    pseudo-inverse of ``Sigma_eta`` (a zero covariance contributes nothing), the deviation of
    ``x_0`` by its prior precision and an explicit terminal weight by ``alpha Q_f``; the
    normalizer adds ``-(T/2) log|alpha Theta|``. Input priors are left out since EM replaces
    them every iteration. With them out and ``alpha`` fixed, the value at the marginal means
    does not increase from one E-step to the next on a linear problem. Evaluated at the
    marginal means by default.
    """
    if xs is None or us is None:
        xs, us = msgs.marginal_means()
    x0 = msgs[0].prior_x
    d0 = xs[0] - x0.mu
    total = 0.5 * float(d0 @ inv_psd(x0.Sigma, timestep=0, edge="X") @ d0)
    log_det = None
    for t, step in enumerate(msgs):
        obs = step.model.observation
        if obs is not None:
            precision = np.linalg.inv(obs.Sigma_xi)
            r = obs.z - obs.E @ xs[t] - obs.F @ us[t] - obs.e
            total += 0.5 * r @ precision @ r
            if log_det is None:
                sign, log_det = np.linalg.slogdet(precision)
                if sign <= 0:
                    raise NumericalError("observation precision is not positive definite", t)
        dyn = step.model.dynamics
        if dyn is not None:
            d = xs[t + 1] - dyn.A @ xs[t] - dyn.B @ us[t] - dyn.a
            total += 0.5 * d @ np.linalg.pinv(dyn.Sigma_eta, hermitian=True) @ d
    terminal = msgs.terminal
    if terminal.mode is TerminalMode.QF_EQUALS_Q and terminal.weight is not None:
        dT = xs[-1] - terminal.goal
        total += 0.5 * msgs.alpha * float(dT @ terminal.weight @ dT)
    if log_det is not None:
        total -= 0.5 * msgs.horizon * log_det
    return float(total)

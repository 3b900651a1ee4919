"""Linear Gaussian controller extraction and the scale matrices Gamma and Psi.

The controller is the conditional ``p(u_t | x_t)`` of the smoothed joint: the input's forward
canonical message (prior plus cost evidence) fused with the backward message of ``X_{t+1}``
carried back across the process noise and the offset, viewed as a function of ``u_t`` for
fixed ``x_t``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from input_inference.controller.policy import LinearGaussianController
from input_inference.errors import ContractViolationError
from input_inference.gaussian import backward_through_noise
from input_inference.gaussian.linalg import inv_psd, solve, solve_psd, symmetrize
from input_inference.engine.state import MessageState

logger = logging.getLogger("input_inference")


@dataclass(frozen=True, eq=False)
class ScaleMatrices:
    """``gamma = (I + Lambda_bwd Sigma_x''')^-1``, ``psi = I + Sigma_x''' Lambda_x'''_bwd``.

    ``noise_backward_precision`` is the backward precision of ``X'''``, i.e. the backward
    precision of ``X_{t+1}`` passed back across the input's contribution.
    """

    gamma: np.ndarray
    psi: np.ndarray
    noise_backward_precision: np.ndarray


def scale_matrices(
    backward_precision: np.ndarray, x_noise_cov: np.ndarray, u_in_cov: np.ndarray
) -> ScaleMatrices:
    d = backward_precision.shape[0]
    eye = np.eye(d)
    gamma = solve(eye + backward_precision @ x_noise_cov, eye, edge="Gamma")
    lam_noise = solve(eye + backward_precision @ u_in_cov, backward_precision, edge="X'''")
    psi = eye + x_noise_cov @ lam_noise
    return ScaleMatrices(gamma=gamma, psi=psi, noise_backward_precision=lam_noise)


def _require_smoothed(msgs: MessageState) -> None:
    if any(step.x_bwd is None for step in msgs):
        raise ContractViolationError("controller extraction needs a completed backward pass")


def compute_gamma_psi(msgs: MessageState, t: int) -> ScaleMatrices:
    """Gamma and Psi weighting the controller at ``t`` (``0 <= t < T``)."""
    _require_smoothed(msgs)
    if not 0 <= t < msgs.horizon:
        raise ContractViolationError(f"scale matrices are defined for 0 <= t < {msgs.horizon}")
    step, nxt = msgs[t], msgs[t + 1]
    return scale_matrices(nxt.x_bwd.Lambda, step.x_noise.Sigma, step.u_in.Sigma)


def extract_controller(msgs: MessageState) -> LinearGaussianController:
    """``(K_t, k_t, Sigma_k_t)`` for ``t = 0..T``.

    ``Sigma_k = (Lambda_u' + B^T L B)^-1``, ``K = -Sigma_k B^T L A`` and
    ``k = Sigma_k (nu_u' + B^T (nu_L - L a))`` with ``(nu_L, L)`` the backward message of
    ``X_{t+1}`` across the process noise. At ``T`` there is no future: ``K = 0`` and the input
    keeps its forward belief.
    """
    _require_smoothed(msgs)
    d_x, d_u = msgs.d_x, msgs.d_u
    T = msgs.horizon
    gains = np.zeros((T + 1, d_u, d_x))
    offsets = np.zeros((T + 1, d_u))
    covariances = np.zeros((T + 1, d_u, d_u))

    for t in range(T):
        step, nxt = msgs[t], msgs[t + 1]
        dyn = step.model.dynamics
        future = backward_through_noise(nxt.x_bwd, dyn.Sigma_eta, timestep=t, edge="X''")
        lam_u = step.u_obs_canonical.Lambda
        precision = symmetrize(lam_u + dyn.B.T @ future.Lambda @ dyn.B)
        rhs = np.column_stack(
            [
                -dyn.B.T @ future.Lambda @ dyn.A,
                step.u_obs_canonical.nu + dyn.B.T @ (future.nu - future.Lambda @ dyn.a),
            ]
        )
        sol = solve_psd(precision, rhs, timestep=t, edge="U")
        gains[t] = sol[:, :d_x]
        offsets[t] = sol[:, d_x]
        covariances[t] = inv_psd(precision, timestep=t, edge="U")

    last = msgs[T]
    covariances[T] = last.u_obs.Sigma
    offsets[T] = last.u_obs.mu
    logger.debug("extracted controller for %d timesteps", T + 1)
    return LinearGaussianController(gains, offsets, covariances)


def scale_matrix_gains(msgs: MessageState, t: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Controller at ``t`` written with the scale matrices: ``(K, k, Sigma_u)``.

    ``K = -Sigma_u B^T Gamma Lambda Psi A`` and
    ``k = Sigma_u (nu_u' + B^T (Gamma nu + (I - Gamma) nu_x''' - Gamma Lambda Psi a))`` with
    ``(nu, Lambda)`` the backward message of ``X_{t+1}`` and ``nu_x'''`` the backward scaled mean
    of ``X'''``. ``Sigma_u = (Lambda_u' + B^T Gamma Lambda B)^-1`` is the marginal input
    covariance. With noise-free dynamics ``K`` and ``k`` coincide with
    :func:`extract_controller`.
    """
    scales = compute_gamma_psi(msgs, t)
    step, nxt = msgs[t], msgs[t + 1]
    dyn = step.model.dynamics
    lam = nxt.x_bwd.Lambda
    gamma_lam = scales.gamma @ lam
    sigma_u = inv_psd(
        symmetrize(step.u_obs_canonical.Lambda + dyn.B.T @ gamma_lam @ dyn.B),
        timestep=t,
        edge="U",
    )
    weighted = gamma_lam @ scales.psi
    K = -sigma_u @ dyn.B.T @ weighted @ dyn.A
    eye = np.eye(msgs.d_x)
    drive = (
        scales.gamma @ nxt.x_bwd.nu
        + (eye - scales.gamma) @ step.x_noise_bwd.nu
        - weighted @ dyn.a
    )
    k = sigma_u @ (step.u_obs_canonical.nu + dyn.B.T @ drive)
    return K, k, sigma_u

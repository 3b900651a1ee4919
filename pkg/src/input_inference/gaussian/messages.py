"""Elementary Gaussian message-passing rules on a Forney-style factor graph.

Forward messages travel in moment form, backward messages in canonical form. Backward
rules never invert a precision, so rank-deficient backward messages are legal everywhere;
inversion happens only when a forward and a backward message are fused.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike
from scipy import stats

from input_inference.errors import ContractViolationError
from input_inference.gaussian.linalg import as_matrix, inv_psd, solve, symmetrize
from input_inference.gaussian.models import GaussianAuxiliary, GaussianCanonical, GaussianMoment


def _same_dim(a: int, b: int, what: str) -> None:
    if a != b:
        raise ContractViolationError(f"{what}: dimension mismatch ({a} vs {b})")


def _transform_matrix(A: ArrayLike, d_in: int, what: str) -> np.ndarray:
    mat = as_matrix(A, "A")
    if mat.shape[1] != d_in:
        raise ContractViolationError(
            f"{what}: A has shape {mat.shape}, expected {d_in} columns"
        )
    return mat


def linear_transform_fwd(A: ArrayLike, x: GaussianMoment) -> GaussianMoment:
    """Y = A X: ``mu_y = A mu_x``, ``Sigma_y = A Sigma_x A^T``."""
    mat = _transform_matrix(A, x.dim, "linear_transform_fwd")
    return GaussianMoment(mat @ x.mu, mat @ x.Sigma @ mat.T)


def linear_transform_bwd(A: ArrayLike, y: GaussianCanonical) -> GaussianCanonical:
    """Backward through Y = A X: ``nu_x = A^T nu_y``, ``Lambda_x = A^T Lambda_y A``."""
    mat = as_matrix(A, "A")
    if mat.shape[0] != y.dim:
        raise ContractViolationError(
            f"linear_transform_bwd: A has shape {mat.shape}, expected {y.dim} rows"
        )
    return GaussianCanonical(mat.T @ y.nu, mat.T @ y.Lambda @ mat)


def add_fwd(x: GaussianMoment, z: GaussianMoment) -> GaussianMoment:
    """Y = X + Z for independent X, Z."""
    _same_dim(x.dim, z.dim, "add_fwd")
    return GaussianMoment(x.mu + z.mu, x.Sigma + z.Sigma)


def add_bwd(
    y: GaussianCanonical,
    z: GaussianMoment,
    *,
    timestep: int | None = None,
    edge: str | None = None,
) -> GaussianCanonical:
    """Backward message on X through Y = X + Z, given the forward message of Z.

    ``Lambda_x = (I + Lambda_y Sigma_z)^-1 Lambda_y`` and
    ``nu_x = (I + Lambda_y Sigma_z)^-1 (nu_y - Lambda_y mu_z)``. With ``Sigma_z = 0`` this is a
    pure offset; with ``mu_z = 0`` it passes a message back across additive noise.
    """
    _same_dim(y.dim, z.dim, "add_bwd")
    gain = np.eye(y.dim) + y.Lambda @ z.Sigma
    rhs = np.column_stack([y.nu - y.Lambda @ z.mu, y.Lambda])
    out = solve(gain, rhs, timestep=timestep, edge=edge)
    return GaussianCanonical(out[:, 0], out[:, 1:])


def equality_fuse(a: GaussianCanonical, b: GaussianCanonical) -> GaussianCanonical:
    """Equality node: scaled means and precisions add."""
    _same_dim(a.dim, b.dim, "equality_fuse")
    return GaussianCanonical(a.nu + b.nu, a.Lambda + b.Lambda)


def fuse_marginal(
    fwd: GaussianMoment,
    bwd: GaussianCanonical,
    *,
    timestep: int | None = None,
    edge: str | None = None,
) -> GaussianMoment:
    """Posterior of an edge from its forward and backward messages.

    Evaluates ``Sigma = (Lambda_fwd + Lambda_bwd)^-1`` and ``mu = Sigma (nu_fwd + nu_bwd)`` as
    ``(I + Sigma_fwd Lambda_bwd)^-1 [Sigma_fwd, mu_fwd + Sigma_fwd nu_bwd]`` so a degenerate
    forward covariance never has to be inverted.
    """
    _same_dim(fwd.dim, bwd.dim, "fuse_marginal")
    gain = np.eye(fwd.dim) + fwd.Sigma @ bwd.Lambda
    rhs = np.column_stack([fwd.mu + fwd.Sigma @ bwd.nu, fwd.Sigma])
    out = solve(gain, rhs, timestep=timestep, edge=edge)
    return GaussianMoment(out[:, 0], out[:, 1:])


def to_canonical(
    x: GaussianMoment, *, timestep: int | None = None, edge: str | None = None
) -> GaussianCanonical:
    precision = inv_psd(x.Sigma, timestep=timestep, edge=edge)
    return GaussianCanonical(precision @ x.mu, precision)


def to_moment(
    x: GaussianCanonical, *, timestep: int | None = None, edge: str | None = None
) -> GaussianMoment:
    covariance = inv_psd(x.Lambda, timestep=timestep, edge=edge)
    return GaussianMoment(covariance @ x.nu, covariance)


def auxiliary_of(
    fwd: GaussianMoment,
    marginal: GaussianMoment,
    *,
    timestep: int | None = None,
    edge: str | None = None,
) -> GaussianAuxiliary:
    """Auxiliary form from the forward message and the marginal of the same edge.

    ``Lambda_aux = Lambda_fwd - Lambda_fwd Sigma_marg Lambda_fwd``,
    ``nu_aux = nu_fwd - Lambda_fwd mu_marg``.
    """
    _same_dim(fwd.dim, marginal.dim, "auxiliary_of")
    precision = inv_psd(fwd.Sigma, timestep=timestep, edge=edge)
    lam_aux = precision - precision @ marginal.Sigma @ precision
    nu_aux = precision @ (fwd.mu - marginal.mu)
    return GaussianAuxiliary(nu_aux, lam_aux)


def auxiliary_from_backward(
    fwd: GaussianMoment,
    bwd: GaussianCanonical,
    *,
    timestep: int | None = None,
    edge: str | None = None,
) -> GaussianAuxiliary:
    """Auxiliary form from the forward and backward messages.

    ``Lambda_aux = (I + Lambda_bwd Sigma_fwd)^-1 Lambda_bwd`` and
    ``nu_aux = -(I + Lambda_bwd Sigma_fwd)^-1 (nu_bwd - Lambda_bwd mu_fwd)``; neither side needs
    to be invertible.
    """
    _same_dim(fwd.dim, bwd.dim, "auxiliary_from_backward")
    gain = np.eye(fwd.dim) + bwd.Lambda @ fwd.Sigma
    rhs = np.column_stack([bwd.Lambda @ fwd.mu - bwd.nu, bwd.Lambda])
    out = solve(gain, rhs, timestep=timestep, edge=edge)
    return GaussianAuxiliary(out[:, 0], out[:, 1:])


def auxiliary_through(A: ArrayLike, aux: GaussianAuxiliary) -> GaussianAuxiliary:
    """Auxiliary of X from the auxiliary of Y = A X (offsets and additions leave it unchanged)."""
    mat = as_matrix(A, "A")
    if mat.shape[0] != aux.dim:
        raise ContractViolationError(
            f"auxiliary_through: A has shape {mat.shape}, expected {aux.dim} rows"
        )
    return GaussianAuxiliary(mat.T @ aux.nu_aux, mat.T @ aux.Lambda_aux @ mat)


def marginal_from_auxiliary(fwd: GaussianMoment, aux: GaussianAuxiliary) -> GaussianMoment:
    """Marginal from the forward belief and the auxiliary message.

    ``Sigma = Sigma_fwd - Sigma_fwd Lambda_aux Sigma_fwd``, ``mu = mu_fwd - Sigma_fwd nu_aux``.
    """
    _same_dim(fwd.dim, aux.dim, "marginal_from_auxiliary")
    sigma = fwd.Sigma - fwd.Sigma @ aux.Lambda_aux @ fwd.Sigma
    return GaussianMoment(fwd.mu - fwd.Sigma @ aux.nu_aux, symmetrize(sigma))


def backward_through_noise(
    y: GaussianCanonical,
    noise_cov: ArrayLike,
    *,
    timestep: int | None = None,
    edge: str | None = None,
) -> GaussianCanonical:
    """Backward message across ``Y = X + W`` with ``W ~ N(0, noise_cov)``."""
    cov = as_matrix(noise_cov, "noise_cov")
    return add_bwd(y, GaussianMoment(np.zeros(y.dim), cov), timestep=timestep, edge=edge)


def log_density(x: GaussianMoment, value: ArrayLike) -> float:
    """Log density of ``x`` at ``value``; ``x`` must have a full-rank covariance."""
    return float(stats.multivariate_normal.logpdf(np.asarray(value, dtype=float), x.mu, x.Sigma))

"""Dense linear algebra helpers shared by every recursion.

Positive definite inverses go through a Cholesky factorization. When the factorization
fails the diagonal is loaded once with ``1e-9 * trace / d`` and the factorization retried;
a second failure is a :class:`NumericalError`.
"""

from __future__ import annotations

import logging

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg

from input_inference.errors import ContractViolationError, NumericalError

logger = logging.getLogger("input_inference")

REGULARIZATION_SCALE = 1e-9


def as_vector(value: ArrayLike, name: str = "vector") -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.ndim != 1:
        raise ContractViolationError(f"{name} must be a vector, got shape {arr.shape}")
    return arr


def as_matrix(value: ArrayLike, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ContractViolationError(f"{name} must be a matrix, got shape {arr.shape}")
    return arr


def check_shape(arr: np.ndarray, shape: tuple[int, ...], name: str) -> None:
    if arr.shape != shape:
        raise ContractViolationError(f"{name} has shape {arr.shape}, expected {shape}")


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def _cho_factor(
    matrix: np.ndarray, timestep: int | None, edge: str | None
) -> tuple[np.ndarray, bool]:
    if not np.all(np.isfinite(matrix)):
        raise NumericalError("matrix has non-finite entries", timestep=timestep, edge=edge)
    try:
        return linalg.cho_factor(matrix, lower=True, check_finite=False)
    except linalg.LinAlgError:
        pass

    d = matrix.shape[0]
    jitter = REGULARIZATION_SCALE * float(np.trace(matrix)) / d
    if jitter > 0.0:
        logger.warning(
            "Cholesky failed, retrying with diagonal load %.3e (t=%s, edge=%s)",
            jitter,
            timestep,
            edge,
        )
        try:
            return linalg.cho_factor(
                matrix + jitter * np.eye(d), lower=True, check_finite=False
            )
        except linalg.LinAlgError:
            pass
    raise NumericalError("matrix is not positive definite", timestep=timestep, edge=edge)


def inv_psd(
    matrix: np.ndarray, *, timestep: int | None = None, edge: str | None = None
) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix."""
    factor = _cho_factor(matrix, timestep, edge)
    return symmetrize(linalg.cho_solve(factor, np.eye(matrix.shape[0]), check_finite=False))


def solve_psd(
    matrix: np.ndarray,
    rhs: np.ndarray,
    *,
    timestep: int | None = None,
    edge: str | None = None,
) -> np.ndarray:
    """Solve ``matrix @ x = rhs`` for a symmetric positive definite ``matrix``."""
    factor = _cho_factor(matrix, timestep, edge)
    return linalg.cho_solve(factor, rhs, check_finite=False)


def solve(
    matrix: np.ndarray,
    rhs: np.ndarray,
    *,
    timestep: int | None = None,
    edge: str | None = None,
) -> np.ndarray:
    """Solve a general square system, e.g. ``(I + Lambda Sigma) x = rhs``."""
    if not (np.all(np.isfinite(matrix)) and np.all(np.isfinite(rhs))):
        raise NumericalError("system has non-finite entries", timestep=timestep, edge=edge)
    try:
        return linalg.solve(matrix, rhs, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"singular system: {exc}", timestep=timestep, edge=edge) from exc


def is_psd(matrix: np.ndarray, tol: float = 1e-9) -> bool:
    return bool(np.all(np.linalg.eigvalsh(symmetrize(matrix)) >= -tol))

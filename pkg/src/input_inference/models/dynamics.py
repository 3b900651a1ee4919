"""Linear(ized) dynamics and their construction from nonlinear step functions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np
from numpy.typing import ArrayLike

from input_inference.errors import ContractViolationError, NumericalError
from input_inference.gaussian.linalg import as_matrix, as_vector, check_shape, is_psd, symmetrize

if TYPE_CHECKING:
    from input_inference.models.environments import Environment

FD_RELATIVE_STEP = 1e-6


@dataclass(frozen=True, eq=False)
class LinearDynamics:
    """``x_{t+1} = A x_t + B u_t + a + eta``, ``eta ~ N(0, Sigma_eta)``."""

    A: np.ndarray
    B: np.ndarray
    a: np.ndarray
    Sigma_eta: np.ndarray

    def __post_init__(self) -> None:
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B")
        a = as_vector(self.a, "a")
        sigma = as_matrix(self.Sigma_eta, "Sigma_eta")
        d_x = A.shape[0]
        check_shape(A, (d_x, d_x), "A")
        if B.shape[0] != d_x:
            raise ContractViolationError(f"B has shape {B.shape}, expected {d_x} rows")
        check_shape(a, (d_x,), "a")
        check_shape(sigma, (d_x, d_x), "Sigma_eta")
        sigma = symmetrize(sigma)
        if not is_psd(sigma):
            raise ContractViolationError("Sigma_eta must be positive semidefinite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "Sigma_eta", sigma)

    @property
    def d_x(self) -> int:
        return self.A.shape[0]

    @property
    def d_u(self) -> int:
        return self.B.shape[1]

    def mean_step(self, x: ArrayLike, u: ArrayLike) -> np.ndarray:
        return self.A @ np.asarray(x, dtype=float) + self.B @ np.asarray(u, dtype=float) + self.a


def finite_difference_jacobian(
    fn: Callable[[np.ndarray], np.ndarray], point: np.ndarray
) -> np.ndarray:
    """Central differences with step ``1e-6 * max(1, |x_i|)`` per coordinate."""
    point = np.asarray(point, dtype=float)
    columns = []
    for i in range(point.shape[0]):
        h = FD_RELATIVE_STEP * max(1.0, abs(point[i]))
        hi = point.copy()
        lo = point.copy()
        hi[i] += h
        lo[i] -= h
        columns.append((np.asarray(fn(hi)) - np.asarray(fn(lo))) / (2.0 * h))
    return np.column_stack(columns) if columns else np.zeros((0, 0))


def linearize_dynamics(env: Environment, x0: ArrayLike, u0: ArrayLike) -> LinearDynamics:
    """First-order expansion of ``env.step`` around ``(x0, u0)``.

    ``a = f(x0, u0) - A x0 - B u0``; inputs strictly outside the limits get a zero ``B`` column.
    """
    x = as_vector(x0, "x0")
    u = as_vector(u0, "u0")
    check_shape(x, (env.d_x,), "x0")
    check_shape(u, (env.d_u,), "u0")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
        raise ContractViolationError("linearization point must be finite")

    A, B = env.dynamics_jacobian(x, u)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise NumericalError(f"non-finite Jacobian of {env.name} dynamics")
    a = env.step(x, u) - A @ x - B @ u
    return LinearDynamics(A, B, a, env.Sigma_eta)

"""Gaussian beliefs in moment, canonical and auxiliary form.

All three are immutable. Matrices are symmetrized on construction so that every rule in
:mod:`input_inference.gaussian.messages` returns exactly symmetric results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from input_inference.errors import ContractViolationError
from input_inference.gaussian.linalg import as_matrix, as_vector, symmetrize


def _pair(vector: ArrayLike, matrix: ArrayLike, names: tuple[str, str]) -> tuple:
    vec = as_vector(vector, names[0])
    mat = as_matrix(matrix, names[1])
    d = vec.shape[0]
    if mat.shape != (d, d):
        raise ContractViolationError(
            f"{names[1]} has shape {mat.shape}, expected {(d, d)} to match {names[0]}"
        )
    return vec, symmetrize(mat)


@dataclass(frozen=True, eq=False)
class GaussianMoment:
    """Mean ``mu`` and covariance ``Sigma``. ``Sigma`` may be singular."""

    mu: np.ndarray
    Sigma: np.ndarray

    def __post_init__(self) -> None:
        mu, sigma = _pair(self.mu, self.Sigma, ("mu", "Sigma"))
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "Sigma", sigma)

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    @classmethod
    def point(cls, mu: ArrayLike) -> GaussianMoment:
        """Deterministic value: zero covariance."""
        vec = as_vector(mu)
        return cls(vec, np.zeros((vec.shape[0], vec.shape[0])))


@dataclass(frozen=True, eq=False)
class GaussianCanonical:
    """Scaled mean ``nu = Lambda mu`` and precision ``Lambda``. ``Lambda`` may be rank-deficient."""

    nu: np.ndarray
    Lambda: np.ndarray

    def __post_init__(self) -> None:
        nu, lam = _pair(self.nu, self.Lambda, ("nu", "Lambda"))
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "Lambda", lam)

    @property
    def dim(self) -> int:
        return self.nu.shape[0]

    @classmethod
    def vacuous(cls, dim: int) -> GaussianCanonical:
        """The message that carries no information."""
        return cls(np.zeros(dim), np.zeros((dim, dim)))


@dataclass(frozen=True, eq=False)
class GaussianAuxiliary:
    """Auxiliary form ``(nu_aux, Lambda_aux)`` with ``Lambda_aux = (Sigma_fwd + Sigma_bwd)^-1``."""

    nu_aux: np.ndarray
    Lambda_aux: np.ndarray

    def __post_init__(self) -> None:
        nu, lam = _pair(self.nu_aux, self.Lambda_aux, ("nu_aux", "Lambda_aux"))
        object.__setattr__(self, "nu_aux", nu)
        object.__setattr__(self, "Lambda_aux", lam)

    @property
    def dim(self) -> int:
        return self.nu_aux.shape[0]

"""Time-varying linear Gaussian feedback controller ``u_t ~ N(K_t x_t + k_t, Sigma_k_t)``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from input_inference.errors import ContractViolationError
from input_inference.gaussian.linalg import as_vector, is_psd, symmetrize

_RECORD_KEYS = ("t", "K", "k", "Sigma_k")


@dataclass(frozen=True, eq=False)
class LinearGaussianController:
    """Stacked gains ``(N, d_u, d_x)``, offsets ``(N, d_u)`` and covariances ``(N, d_u, d_u)``."""

    gains: np.ndarray
    offsets: np.ndarray
    covariances: np.ndarray

    def __post_init__(self) -> None:
        gains = np.asarray(self.gains, dtype=float)
        offsets = np.asarray(self.offsets, dtype=float)
        covariances = np.asarray(self.covariances, dtype=float)
        if gains.ndim != 3 or offsets.ndim != 2 or covariances.ndim != 3:
            raise ContractViolationError("controller arrays must be stacked per timestep")
        n, d_u, _ = gains.shape
        if offsets.shape != (n, d_u) or covariances.shape != (n, d_u, d_u):
            raise ContractViolationError(
                f"inconsistent controller shapes {gains.shape}, {offsets.shape}, "
                f"{covariances.shape}"
            )
        covariances = np.array([symmetrize(c) for c in covariances]).reshape(n, d_u, d_u)
        for t, cov in enumerate(covariances):
            if not is_psd(cov):
                raise ContractViolationError(f"Sigma_k at t={t} is not positive semidefinite")
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "covariances", covariances)

    def __len__(self) -> int:
        return self.gains.shape[0]

    @property
    def d_u(self) -> int:
        return self.gains.shape[1]

    @property
    def d_x(self) -> int:
        return self.gains.shape[2]

    @classmethod
    def from_priors(cls, priors: Any) -> LinearGaussianController:
        """Open-loop controller that samples the input priors (no evidence: ``K = 0``)."""
        d_x = priors.x0.dim
        return cls(
            gains=np.array([np.zeros((p.dim, d_x)) for p in priors.inputs]),
            offsets=np.array([p.mu for p in priors.inputs]),
            covariances=np.array([p.Sigma for p in priors.inputs]),
        )

    def mean_action(self, t: int, x: ArrayLike) -> np.ndarray:
        if not 0 <= t < len(self):
            raise ContractViolationError(f"no controller step for t={t}")
        x = as_vector(x, "x")
        if x.shape[0] != self.d_x:
            raise ContractViolationError(f"state has dimension {x.shape[0]}, expected {self.d_x}")
        return self.gains[t] @ x + self.offsets[t]

    def act(
        self,
        t: int,
        x: ArrayLike,
        limits: np.ndarray | None = None,
        rng: np.random.Generator | None = None,
    ) -> np.ndarray:
        """``clip(K x + k)``, or a clipped sample of ``N(K x + k, Sigma_k)`` when ``rng`` is given.

        ``limits`` has shape ``(2, d_u)`` holding lower and upper bounds.
        """
        u = self.mean_action(t, x)
        if rng is not None:
            u = rng.multivariate_normal(u, self.covariances[t], method="eigh")
        if limits is not None:
            u = np.clip(u, limits[0], limits[1])
        return u

    def to_records(self) -> list[dict[str, Any]]:
        return [
            {
                "t": t,
                "K": self.gains[t].tolist(),
                "k": self.offsets[t].tolist(),
                "Sigma_k": self.covariances[t].tolist(),
            }
            for t in range(len(self))
        ]

    @classmethod
    def from_records(cls, records: list[dict[str, Any]]) -> LinearGaussianController:
        if not records:
            raise ContractViolationError("controller has no timesteps")
        rows = sorted(records, key=lambda r: r["t"])
        for expected, row in enumerate(rows):
            missing = [key for key in _RECORD_KEYS if key not in row]
            if missing:
                raise ContractViolationError(f"controller record missing {missing}")
            if row["t"] != expected:
                raise ContractViolationError(f"controller records skip timestep {expected}")
        return cls(
            gains=np.array([row["K"] for row in rows], dtype=float),
            offsets=np.array([row["k"] for row in rows], dtype=float),
            covariances=np.array([row["Sigma_k"] for row in rows], dtype=float),
        )

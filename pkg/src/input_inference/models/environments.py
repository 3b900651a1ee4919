"""Benchmark environments.

Angles are measured from the upright position, so the swing-up goal is ``cos(theta) = 1``.
Mechanical systems integrate with semi-implicit Euler: velocities first, then positions with
the new velocities. Inputs are hard-clipped to ``u_limit`` inside the step.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import ClassVar

import numpy as np
from numpy.typing import ArrayLike

from input_inference.errors import ContractViolationError, DivergenceError
from input_inference.gaussian.linalg import as_vector, check_shape
from input_inference.models.dynamics import finite_difference_jacobian
from input_inference.models.observation import ObservationModel
from input_inference.models.registry import register_environment


class Environment(ABC):
    """Immutable description of a discrete-time controlled system with a feature cost."""

    name: ClassVar[str]
    d_x: ClassVar[int]
    d_u: ClassVar[int]
    default_dt: ClassVar[float]
    default_horizon: ClassVar[int]
    input_bounds: ClassVar[tuple[float, float]] = (-np.inf, np.inf)
    noise_diagonal: ClassVar[tuple[float, ...]]
    goal_features: ClassVar[tuple[float, ...]]
    feature_weights: ClassVar[tuple[float, ...]]

    def __init__(
        self,
        *,
        dt: float | None = None,
        horizon: int | None = None,
        process_noise_scale: float = 1.0,
    ):
        self.dt = float(self.default_dt if dt is None else dt)
        self.horizon = int(self.default_horizon if horizon is None else horizon)
        if self.dt <= 0:
            raise ContractViolationError(f"dt must be positive, got {self.dt}")
        if self.horizon < 1:
            raise ContractViolationError(f"horizon must be at least 1, got {self.horizon}")
        if process_noise_scale < 0:
            raise ContractViolationError("process_noise_scale must be nonnegative")
        lo, hi = self.input_bounds
        self.u_limit = np.array([np.full(self.d_u, lo), np.full(self.d_u, hi)], dtype=float)
        self.Sigma_eta = float(process_noise_scale) * np.diag(np.asarray(self.noise_diagonal))

    @property
    def d_z(self) -> int:
        return len(self.goal_features)

    @abstractmethod
    def initial_state(self) -> np.ndarray: ...

    @abstractmethod
    def _integrate(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """One step of the dynamics for an already clipped input."""

    @abstractmethod
    def features(self, x: np.ndarray, u: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def features_jacobian(
        self, x: np.ndarray, u: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]: ...

    def clip(self, u: ArrayLike) -> np.ndarray:
        return np.clip(np.asarray(u, dtype=float), self.u_limit[0], self.u_limit[1])

    def step(self, x: ArrayLike, u: ArrayLike, noise: ArrayLike | None = None) -> np.ndarray:
        """Next state; ``noise`` is a sample of the process noise to add, if any."""
        x = as_vector(x, "x")
        u = as_vector(u, "u")
        check_shape(x, (self.d_x,), "x")
        check_shape(u, (self.d_u,), "u")
        nxt = self._integrate(x, self.clip(u))
        if noise is not None:
            nxt = nxt + as_vector(noise, "noise")
        if not np.all(np.isfinite(nxt)):
            raise DivergenceError(f"{self.name} state diverged", state=nxt)
        return nxt

    def dynamics_jacobian(
        self, x: np.ndarray, u: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """``(A, B)`` by central differences of the unclipped step at ``clip(u)``."""
        uc = self.clip(u)
        A = finite_difference_jacobian(lambda xx: self._integrate(xx, uc), x)
        B = finite_difference_jacobian(lambda uu: self._integrate(x, uu), uc)
        return A, self._mask_saturated(B, u)

    def _mask_saturated(self, B: np.ndarray, u: np.ndarray) -> np.ndarray:
        saturated = (u < self.u_limit[0]) | (u > self.u_limit[1])
        if np.any(saturated):
            B = B.copy()
            B[:, saturated] = 0.0
        return B

    def observation_model(
        self,
        theta: ArrayLike | None = None,
        z_goal: ArrayLike | None = None,
        terminal_weight: ArrayLike | None = None,
        x_goal: ArrayLike | None = None,
    ) -> ObservationModel:
        """The feature cost; diagonal ``theta`` and ``terminal_weight`` may be given as vectors."""
        theta = np.asarray(self.feature_weights if theta is None else theta, dtype=float)
        if theta.ndim == 1:
            theta = np.diag(theta)
        if terminal_weight is not None:
            terminal_weight = np.asarray(terminal_weight, dtype=float)
            if terminal_weight.ndim == 1:
                terminal_weight = np.diag(terminal_weight)
        return ObservationModel(
            feature_map=self.features,
            z_goal=np.asarray(self.goal_features if z_goal is None else z_goal, dtype=float),
            Theta=theta,
            d_x=self.d_x,
            d_u=self.d_u,
            feature_jacobian=self.features_jacobian,
            terminal_weight=terminal_weight,
            x_goal=x_goal,
        )


class LinearSystem(Environment):
    """``x_{t+1} = A x + B u + a`` with features ``[x; u]``."""

    name = "linear"
    default_dt = 1.0

    def __init__(
        self,
        A: ArrayLike,
        B: ArrayLike,
        a: ArrayLike,
        *,
        x_init: ArrayLike | None = None,
        goal_features: ArrayLike | None = None,
        feature_weights: ArrayLike | None = None,
        dt: float | None = None,
        horizon: int | None = None,
        process_noise_scale: float = 1.0,
    ):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.B = np.atleast_2d(np.asarray(B, dtype=float))
        self.a = np.atleast_1d(np.asarray(a, dtype=float))
        # instance-level dimensions shadow the class annotations
        self.d_x = self.A.shape[0]
        self.d_u = self.B.shape[1]
        d_z = self.d_x + self.d_u
        if goal_features is not None:
            self.goal_features = tuple(np.asarray(goal_features, dtype=float))
        elif not hasattr(self, "goal_features"):
            self.goal_features = (0.0,) * d_z
        if feature_weights is not None:
            self.feature_weights = tuple(np.asarray(feature_weights, dtype=float))
        elif not hasattr(self, "feature_weights"):
            self.feature_weights = (1.0,) * d_z
        if not hasattr(self, "noise_diagonal"):
            self.noise_diagonal = (0.0,) * self.d_x
        if not hasattr(self, "default_horizon"):
            self.default_horizon = 1
        self._x_init = np.zeros(self.d_x) if x_init is None else as_vector(x_init, "x_init")
        super().__init__(dt=dt, horizon=horizon, process_noise_scale=process_noise_scale)

    def initial_state(self) -> np.ndarray:
        return self._x_init.copy()

    def _integrate(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.A @ x + self.B @ u + self.a

    def dynamics_jacobian(
        self, x: np.ndarray, u: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        return self.A.copy(), self._mask_saturated(self.B.copy(), u)

    def features(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return np.concatenate([x, u])

    def features_jacobian(
        self, x: np.ndarray, u: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        E = np.vstack([np.eye(self.d_x), np.zeros((self.d_u, self.d_x))])
        F = np.vstack([np.zeros((self.d_x, self.d_u)), np.eye(self.d_u)])
        return E, F


@register_environment(
    "linear_c1",
    **{
        "env.horizon": 60,
        "env.dt": 1.0,
        "priors.input_cov": 100.0,
        "em.alpha_init": 1e5,
        "em.delta_alpha_inv": 1.0,
        "em.update_alpha": False,
        "em.max_iters": 1,
        "cost.theta": [10.0, 10.0, 1.0],
        "cost.z_goal": [10.0, 10.0, 0.0],
        "cost.terminal_weight": [10.0, 10.0],
        "cost.x_goal": [10.0, 10.0],
    },
)
class LinearC1(LinearSystem):
    """Unstable two-state test system with an offset; ``x_g = [10, 10]`` is an equilibrium."""

    name = "linear_c1"
    default_horizon = 60
    noise_diagonal = (0.0, 0.0)
    goal_features = (10.0, 10.0, 0.0)
    feature_weights = (10.0, 10.0, 1.0)

    def __init__(
        self,
        *,
        dt: float | None = None,
        horizon: int | None = None,
        process_noise_scale: float = 1.0,
    ):
        super().__init__(
            A=[[1.1, 0.0], [0.1, 1.1]],
            B=[[0.1], [0.0]],
            a=[-1.0, -2.0],
            dt=dt,
            horizon=horizon,
            process_noise_scale=process_noise_scale,
        )


class MechanicalEnvironment(Environment):
    """State ``[q, q_dot]``; subclasses provide the accelerations."""

    @abstractmethod
    def accelerations(self, q: np.ndarray, v: np.ndarray, u: np.ndarray) -> np.ndarray: ...

    def _integrate(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        n = self.d_x // 2
        q, v = x[:n], x[n:]
        v_next = v + self.dt * self.accelerations(q, v, u)
        return np.concatenate([q + self.dt * v_next, v_next])


@register_environment(
    "pendulum",
    **{
        "env.horizon": 100,
        "env.dt": 0.05,
        "priors.input_cov": 0.2,
        "priors.input_mean": 5e-3,
        "em.alpha_init": 1.0 / 100.0,
        "em.delta_alpha_inv": 0.99,
        "em.max_iters": 150,
        "cost.theta": [1.0, 100.0, 1.0, 1.0],
        "cost.z_goal": [0.0, 1.0, 0.0, 0.0],
    },
)
class Pendulum(MechanicalEnvironment):
    """Damped pendulum, state ``[theta, theta_dot]``, features ``[sin, cos, theta_dot, u]``."""

    name = "pendulum"
    d_x = 2
    d_u = 1
    default_dt = 0.05
    default_horizon = 100
    input_bounds = (-2.0, 2.0)
    noise_diagonal = (1e-12, 1e-3)
    goal_features = (0.0, 1.0, 0.0, 0.0)
    feature_weights = (1.0, 100.0, 1.0, 1.0)

    mass = 1.0
    length = 1.0
    gravity = 9.81
    damping = 0.05

    def initial_state(self) -> np.ndarray:
        return np.array([np.pi, 0.0])

    def accelerations(self, q: np.ndarray, v: np.ndarray, u: np.ndarray) -> np.ndarray:
        inertia = self.mass * self.length**2
        acc = (self.gravity / self.length) * np.sin(q[0]) + (u[0] - self.damping * v[0]) / inertia
        return np.array([acc])

    def dynamics_jacobian(
        self, x: np.ndarray, u: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        dt = self.dt
        inertia = self.mass * self.length**2
        dw_dtheta = dt * (self.gravity / self.length) * np.cos(x[0])
        dw_domega = 1.0 - dt * self.damping / inertia
        dw_du = dt / inertia
        A = np.array(
            [
                [1.0 + dt * dw_dtheta, dt * dw_domega],
                [dw_dtheta, dw_domega],
            ]
        )
        B = np.array([[dt * dw_du], [dw_du]])
        return A, self._mask_saturated(B, u)

    def features(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return np.array([np.sin(x[0]), np.cos(x[0]), x[1], u[0]])

    def features_jacobian(
        self, x: np.ndarray, u: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        E = np.array(
            [
                [np.cos(x[0]), 0.0],
                [-np.sin(x[0]), 0.0],
                [0.0, 1.0],
                [0.0, 0.0],
            ]
        )
        F = np.array([[0.0], [0.0], [0.0], [1.0]])
        return E, F


@register_environment(
    "cartpole",
    **{
        "env.horizon": 100,
        "env.dt": 0.05,
        "priors.input_mean": 5e-3,
        "priors.input_cov": 0.25,
        "em.alpha_init": 1.0 / 67.0,
        "em.delta_alpha_inv": 0.993,
        "em.max_iters": 300,
        "cost.theta": [1.0, 1.0, 100.0, 1.0, 1.0, 1.0],
        "cost.z_goal": [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
    },
)
class Cartpole(MechanicalEnvironment):
    """Cart with a point-mass pole, state ``[x, theta, x_dot, theta_dot]``."""

    name = "cartpole"
    d_x = 4
    d_u = 1
    default_dt = 0.05
    default_horizon = 100
    input_bounds = (-5.0, 5.0)
    noise_diagonal = (1e-12, 1e-12, 1e-6, 1e-6)
    goal_features = (0.0, 0.0, 1.0, 0.0, 0.0, 0.0)
    feature_weights = (1.0, 1.0, 100.0, 1.0, 1.0, 1.0)

    cart_mass = 1.0
    pole_mass = 0.5
    pole_length = 0.5
    gravity = 9.81

    def initial_state(self) -> np.ndarray:
        return np.array([0.0, np.pi, 0.0, 0.0])

    def accelerations(self, q: np.ndarray, v: np.ndarray, u: np.ndarray) -> np.ndarray:
        m, l, g = self.pole_mass, self.pole_length, self.gravity
        s, c = np.sin(q[1]), np.cos(q[1])
        x_acc = (u[0] + m * s * (l * v[1] ** 2 - g * c)) / (self.cart_mass + m * s**2)
        theta_acc = (g * s - c * x_acc) / l
        return np.array([x_acc, theta_acc])

    def features(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return np.array([x[0], np.sin(x[1]), np.cos(x[1]), x[2], x[3], u[0]])

    def features_jacobian(
        self, x: np.ndarray, u: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        E = np.zeros((6, 4))
        E[0, 0] = 1.0
        E[1, 1] = np.cos(x[1])
        E[2, 1] = -np.sin(x[1])
        E[3, 2] = 1.0
        E[4, 3] = 1.0
        F = np.zeros((6, 1))
        F[5, 0] = 1.0
        return E, F


@register_environment(
    "double_cartpole",
    **{
        "env.horizon": 150,
        "env.dt": 0.02,
        "priors.input_mean": 5e-3,
        "priors.input_cov": 0.04,
        "em.alpha_init": 1.0 / 90.0,
        "em.delta_alpha_inv": 0.9995,
        "em.max_iters": 500,
        "cost.theta": [1.0, 1.0, 100.0, 1.0, 100.0, 1.0, 1.0, 1.0, 1.0],
        "cost.z_goal": [0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    },
)
class DoubleCartpole(MechanicalEnvironment):
    """Cart with two chained point-mass poles, state ``[x, th1, th2, x_dot, th1_dot, th2_dot]``."""

    name = "double_cartpole"
    d_x = 6
    d_u = 1
    default_dt = 0.02
    default_horizon = 150
    input_bounds = (-10.0, 10.0)
    noise_diagonal = (1e-12, 1e-12, 1e-12, 1e-6, 1e-6, 1e-6)
    goal_features = (0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0)
    feature_weights = (1.0, 1.0, 100.0, 1.0, 100.0, 1.0, 1.0, 1.0, 1.0)

    cart_mass = 1.0
    masses = (0.5, 0.5)
    lengths = (0.5, 0.5)
    gravity = 9.81

    def initial_state(self) -> np.ndarray:
        return np.array([0.0, np.pi, np.pi, 0.0, 0.0, 0.0])

    def mass_matrix(self, q: np.ndarray) -> np.ndarray:
        m1, m2 = self.masses
        l1, l2 = self.lengths
        c1, c2 = np.cos(q[1]), np.cos(q[2])
        c12 = np.cos(q[1] - q[2])
        return np.array(
            [
                [self.cart_mass + m1 + m2, (m1 + m2) * l1 * c1, m2 * l2 * c2],
                [(m1 + m2) * l1 * c1, (m1 + m2) * l1**2, m2 * l1 * l2 * c12],
                [m2 * l2 * c2, m2 * l1 * l2 * c12, m2 * l2**2],
            ]
        )

    def accelerations(self, q: np.ndarray, v: np.ndarray, u: np.ndarray) -> np.ndarray:
        m1, m2 = self.masses
        l1, l2 = self.lengths
        g = self.gravity
        s1, s2 = np.sin(q[1]), np.sin(q[2])
        s12 = np.sin(q[1] - q[2])
        rhs = np.array(
            [
                u[0] + (m1 + m2) * l1 * s1 * v[1] ** 2 + m2 * l2 * s2 * v[2] ** 2,
                (m1 + m2) * g * l1 * s1 - m2 * l1 * l2 * s12 * v[2] ** 2,
                m2 * g * l2 * s2 + m2 * l1 * l2 * s12 * v[1] ** 2,
            ]
        )
        return np.linalg.solve(self.mass_matrix(q), rhs)

    def features(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return np.array(
            [
                x[0],
                np.sin(x[1]),
                np.cos(x[1]),
                np.sin(x[2]),
                np.cos(x[2]),
                x[3],
                x[4],
                x[5],
                u[0],
            ]
        )

    def features_jacobian(
        self, x: np.ndarray, u: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        E = np.zeros((9, 6))
        E[0, 0] = 1.0
        E[1, 1] = np.cos(x[1])
        E[2, 1] = -np.sin(x[1])
        E[3, 2] = np.cos(x[2])
        E[4, 2] = -np.sin(x[2])
        E[5, 3] = 1.0
        E[6, 4] = 1.0
        E[7, 5] = 1.0
        F = np.zeros((9, 1))
        F[8, 0] = 1.0
        return E, F


def sample_process_noise(env: Environment, rng: np.random.Generator) -> np.ndarray:
    """One draw from ``N(0, Sigma_eta)``; eigen-decomposition handles singular covariances."""
    return rng.multivariate_normal(np.zeros(env.d_x), env.Sigma_eta, method="eigh")


def rollout_open_loop(env: Environment, x0: ArrayLike, us: ArrayLike) -> np.ndarray:
    """Noise-free states ``x_0..x_N`` for inputs ``u_0..u_{N-1}``."""
    us = np.asarray(us, dtype=float)
    xs = [as_vector(x0, "x0")]
    for u in us:
        xs.append(env.step(xs[-1], u))
    return np.array(xs)

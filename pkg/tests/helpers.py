"""Random linear-Gaussian problems and a brute-force reference posterior for them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from input_inference.engine.state import Priors, TerminalCondition, TimestepModel
from input_inference.gaussian import GaussianMoment
from input_inference.gaussian.linalg import inv_psd
from input_inference.models.dynamics import LinearDynamics
from input_inference.models.observation import LinearizedObservation


def random_spd(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    m = rng.normal(size=(d, d))
    return scale * (m @ m.T / d + 0.5 * np.eye(d))


@dataclass
class LinearProblem:
    models: tuple[TimestepModel, ...]
    priors: Priors
    terminal: TerminalCondition
    alpha: float


def random_problem(
    seed: int,
    *,
    d_x: int = 2,
    d_u: int = 1,
    horizon: int = 4,
    alpha: float = 1.0,
    process_noise: bool = True,
    terminal_weight: bool = False,
) -> LinearProblem:
    """Linear dynamics with decoupled observations ``z = [x; u]`` (block-diagonal ``Theta``).

    With ``terminal_weight`` the observation at ``T`` is replaced by a weight on ``x_T``.
    """
    rng = np.random.default_rng(seed)
    theta = np.zeros((d_x + d_u, d_x + d_u))
    theta[:d_x, :d_x] = random_spd(rng, d_x)
    theta[d_x:, d_x:] = random_spd(rng, d_u)
    sigma_xi = inv_psd(alpha * theta)
    E = np.vstack([np.eye(d_x), np.zeros((d_u, d_x))])
    F = np.vstack([np.zeros((d_x, d_u)), np.eye(d_u)])

    models = []
    for t in range(horizon + 1):
        dynamics = None
        if t < horizon:
            A = 0.9 * np.eye(d_x) + 0.2 * rng.normal(size=(d_x, d_x))
            noise = random_spd(rng, d_x, 0.05) if process_noise else np.zeros((d_x, d_x))
            dynamics = LinearDynamics(A, rng.normal(size=(d_x, d_u)), rng.normal(size=d_x), noise)
        observation = None
        if t < horizon or not terminal_weight:
            observation = LinearizedObservation(
                E=E,
                F=F,
                e=0.1 * rng.normal(size=d_x + d_u),
                Sigma_xi=sigma_xi,
                alpha=alpha,
                z=rng.normal(size=d_x + d_u),
            )
        models.append(TimestepModel(dynamics=dynamics, observation=observation))

    priors = Priors(
        GaussianMoment(rng.normal(size=d_x), random_spd(rng, d_x, 0.5)),
        tuple(
            GaussianMoment(rng.normal(size=d_u), random_spd(rng, d_u, 2.0))
            for _ in range(horizon + 1)
        ),
    )
    terminal = TerminalCondition()
    if terminal_weight:
        terminal = TerminalCondition(weight=random_spd(rng, d_x), goal=rng.normal(size=d_x))
    return LinearProblem(tuple(models), priors, terminal, alpha)


@dataclass
class JointPosterior:
    """Posterior of the stacked latent vector and the maps that read states and inputs off it."""

    mean: np.ndarray
    cov: np.ndarray
    state_maps: list[np.ndarray]
    state_offsets: list[np.ndarray]
    input_maps: list[np.ndarray]

    def state(self, t: int) -> GaussianMoment:
        M = self.state_maps[t]
        return GaussianMoment(M @ self.mean + self.state_offsets[t], M @ self.cov @ M.T)

    def input(self, t: int) -> GaussianMoment:
        S = self.input_maps[t]
        return GaussianMoment(S @ self.mean, S @ self.cov @ S.T)

    def conditional_controller(self, t: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(K, k, Sigma)`` of ``p(u_t | x_t)`` from the joint posterior of ``(x_t, u_t)``."""
        M, S = self.state_maps[t], self.input_maps[t]
        x = self.state(t)
        u = self.input(t)
        cross = S @ self.cov @ M.T
        K = np.linalg.solve(x.Sigma, cross.T).T
        return K, u.mu - K @ x.mu, u.Sigma - K @ cross.T


def joint_posterior(problem: LinearProblem) -> JointPosterior:
    """Condition the jointly Gaussian ``(x_0, u_0..u_T, eta_0..eta_{T-1})`` on every observation.

    States are affine in that vector, so the posterior is a single Gaussian conditioning step
    in moment form; nothing is propagated recursively.
    """
    models, priors, terminal = problem.models, problem.priors, problem.terminal
    T = len(models) - 1
    d_x, d_u = priors.x0.dim, priors.inputs[0].dim
    n = d_x + (T + 1) * d_u + T * d_x

    mean = np.zeros(n)
    cov = np.zeros((n, n))
    mean[:d_x] = priors.x0.mu
    cov[:d_x, :d_x] = priors.x0.Sigma
    input_maps = []
    for t in range(T + 1):
        lo = d_x + t * d_u
        mean[lo : lo + d_u] = priors.inputs[t].mu
        cov[lo : lo + d_u, lo : lo + d_u] = priors.inputs[t].Sigma
        S = np.zeros((d_u, n))
        S[:, lo : lo + d_u] = np.eye(d_u)
        input_maps.append(S)

    state_maps = [np.zeros((d_x, n))]
    state_maps[0][:, :d_x] = np.eye(d_x)
    state_offsets = [np.zeros(d_x)]
    for t in range(T):
        dyn = models[t].dynamics
        lo = d_x + (T + 1) * d_u + t * d_x
        cov[lo : lo + d_x, lo : lo + d_x] = dyn.Sigma_eta
        noise = np.zeros((d_x, n))
        noise[:, lo : lo + d_x] = np.eye(d_x)
        state_maps.append(dyn.A @ state_maps[t] + dyn.B @ input_maps[t] + noise)
        state_offsets.append(dyn.A @ state_offsets[t] + dyn.a)

    rows, offsets, values, noises = [], [], [], []
    for t, model in enumerate(models):
        obs = model.observation
        if obs is None:
            continue
        rows.append(obs.E @ state_maps[t] + obs.F @ input_maps[t])
        offsets.append(obs.E @ state_offsets[t] + obs.e)
        values.append(obs.z)
        noises.append(obs.Sigma_xi)
    if terminal.weight is not None:
        rows.append(state_maps[T])
        offsets.append(state_offsets[T])
        values.append(np.asarray(terminal.goal, dtype=float))
        noises.append(np.linalg.inv(problem.alpha * np.asarray(terminal.weight)))

    H = np.vstack(rows)
    h = np.concatenate(offsets)
    y = np.concatenate(values)
    m = sum(block.shape[0] for block in noises)
    R = np.zeros((m, m))
    i = 0
    for block in noises:
        R[i : i + block.shape[0], i : i + block.shape[0]] = block
        i += block.shape[0]

    innovation_cov = H @ cov @ H.T + R
    gain = np.linalg.solve(innovation_cov, H @ cov).T
    post_mean = mean + gain @ (y - H @ mean - h)
    post_cov = cov - gain @ H @ cov
    return JointPosterior(
        post_mean, 0.5 * (post_cov + post_cov.T), state_maps, state_offsets, input_maps
    )


def random_instance(index: int) -> LinearProblem:
    """A small problem whose shape, terminal condition and noise are drawn from ``index``.

    ``d_x <= 3``, ``d_u <= 2`` and ``T <= 5``.
    """
    rng = np.random.default_rng(10_000 + index)
    return random_problem(
        index,
        d_x=int(rng.integers(1, 4)),
        d_u=int(rng.integers(1, 3)),
        horizon=int(rng.integers(1, 6)),
        alpha=float(rng.choice([0.5, 1.0, 2.0])),
        process_noise=bool(rng.integers(0, 2)),
        terminal_weight=bool(rng.integers(0, 2)),
    )

"""Tests for the closed-form backward recursion."""

from __future__ import annotations

import numpy as np
import pytest

from input_inference.controller import riccati_backward
from input_inference.engine import (
    Priors,
    TerminalCondition,
    TimestepModel,
    backward_pass,
    forward_pass,
    state_evidence,
)
from input_inference.gaussian.linalg import inv_psd
from input_inference.lqr import solve_lqr
from input_inference.models import LinearDynamics
from input_inference.models.observation import LinearizedObservation
from tests.helpers import random_problem

C1 = LinearDynamics([[1.1, 0.0], [0.1, 1.1]], [[0.1], [0.0]], [-1.0, -2.0], np.zeros((2, 2)))


def _quadratic_observation(alpha):
    E = np.vstack([np.eye(2), np.zeros((1, 2))])
    F = np.array([[0.0], [0.0], [1.0]])
    theta = np.diag([10.0, 10.0, 1.0])
    return LinearizedObservation(
        E=E,
        F=F,
        e=np.zeros(3),
        Sigma_xi=inv_psd(alpha * theta),
        alpha=alpha,
        z=[10.0, 10.0, 0.0],
    )


class TestRiccatiBackward:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_message_passing(self, seed):
        problem = random_problem(seed, horizon=5)
        msgs = backward_pass(
            forward_pass(problem.models, problem.priors, problem.alpha), problem.terminal
        )
        closed = riccati_backward(problem.models, problem.priors, problem.terminal, problem.alpha)
        assert len(closed) == 6
        for t in range(6):
            np.testing.assert_allclose(
                closed[t].Lambda, msgs[t].x_bwd.Lambda, rtol=1e-8, atol=1e-10
            )
            np.testing.assert_allclose(closed[t].nu, msgs[t].x_bwd.nu, rtol=1e-8, atol=1e-10)

    def test_matches_with_terminal_weight(self):
        problem = random_problem(11, d_x=3, d_u=2, horizon=3, terminal_weight=True)
        msgs = backward_pass(forward_pass(problem.models, problem.priors), problem.terminal)
        closed = riccati_backward(problem.models, problem.priors, problem.terminal)
        for t in range(4):
            np.testing.assert_allclose(
                closed[t].Lambda, msgs[t].x_bwd.Lambda, rtol=1e-8, atol=1e-10
            )

    def test_single_step_is_the_state_evidence(self):
        obs = _quadratic_observation(2.0)
        models = [TimestepModel(C1, obs), TimestepModel(None, None)]
        priors = Priors.isotropic([0.0, 0.0], horizon=1, d_u=1, input_cov=1.0)
        closed = riccati_backward(models, priors)
        evidence = state_evidence(obs, priors.inputs[0], 2, 0)
        np.testing.assert_array_equal(closed[1].Lambda, np.zeros((2, 2)))
        np.testing.assert_allclose(closed[0].Lambda, evidence.Lambda, rtol=1e-12)
        np.testing.assert_allclose(closed[0].Lambda, np.diag([20.0, 20.0]), rtol=1e-12)
        np.testing.assert_allclose(closed[0].nu, evidence.nu, rtol=1e-12)

    def test_lqr_limit(self):
        alpha, horizon = 1e5, 30
        obs = _quadratic_observation(alpha)
        models = [TimestepModel(C1, obs)] * horizon + [TimestepModel(None, None)]
        priors = Priors.isotropic([0.0, 0.0], horizon=horizon, d_u=1, input_cov=100.0)
        terminal = TerminalCondition(weight=10.0 * np.eye(2), goal=np.array([10.0, 10.0]))
        closed = riccati_backward(models, priors, terminal)
        _, value = solve_lqr(
            C1, 10.0 * np.eye(2), [[1.0]], 10.0 * np.eye(2), [10.0, 10.0], [0.0], horizon
        )
        for t in range(horizon + 1):
            scale = alpha * np.abs(value.P[t]).max()
            np.testing.assert_allclose(
                closed[t].Lambda, alpha * value.P[t], rtol=1e-5, atol=1e-6 * scale
            )
            offset_scale = alpha * np.abs(value.p[t]).max()
            np.testing.assert_allclose(
                -closed[t].nu, alpha * value.p[t], rtol=1e-5, atol=1e-6 * offset_scale
            )

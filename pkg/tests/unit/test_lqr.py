"""Tests for the finite-horizon LQR solver."""

from __future__ import annotations

import numpy as np
import pytest

from input_inference.controller.policy import LinearGaussianController
from input_inference.errors import ContractViolationError, NumericalError
from input_inference.lqr import lqr_rollout, solve_lqr
from input_inference.models.dynamics import LinearDynamics

C1 = LinearDynamics([[1.1, 0.0], [0.1, 1.1]], [[0.1], [0.0]], [-1.0, -2.0], np.zeros((2, 2)))
X_GOAL = np.array([10.0, 10.0])


def _solve_c1(horizon=60):
    return solve_lqr(C1, 10.0 * np.eye(2), [[1.0]], 10.0 * np.eye(2), X_GOAL, [0.0], horizon)


class TestSolveLqr:
    def test_first_gains(self):
        controller, _ = _solve_c1()
        np.testing.assert_allclose(
            controller.gains[0], [[-5.87778697521724, -8.22536251310138]], rtol=1e-9
        )
        np.testing.assert_allclose(controller.offsets[0], [141.031494883186], rtol=1e-9)

    def test_last_gains(self):
        controller, _ = _solve_c1()
        np.testing.assert_allclose(controller.gains[59], [[-1.0, 0.0]], atol=1e-12)
        np.testing.assert_allclose(controller.offsets[59], [10.0], rtol=1e-12)

    def test_zero_terminal_value_gives_zero_gain(self):
        dyn = LinearDynamics([[1.0]], [[1.0]], [0.0], [[0.0]])
        controller, value = solve_lqr(dyn, [[1.0]], [[1.0]], [[0.0]], [0.0], [0.0], 1)
        np.testing.assert_array_equal(controller.gains, np.zeros((1, 1, 1)))
        np.testing.assert_array_equal(value.P[1], [[0.0]])

    def test_controller_has_zero_covariance(self):
        controller, _ = _solve_c1(5)
        assert len(controller) == 5
        np.testing.assert_array_equal(controller.covariances, np.zeros((5, 1, 1)))

    @pytest.mark.parametrize("scale", [1e-3, 7.0, 1e4])
    def test_cost_scaling_leaves_gains_unchanged(self, scale):
        controller, value = _solve_c1()
        scaled, scaled_value = solve_lqr(
            C1,
            scale * 10.0 * np.eye(2),
            [[scale]],
            scale * 10.0 * np.eye(2),
            X_GOAL,
            [0.0],
            60,
        )
        np.testing.assert_allclose(scaled.gains, controller.gains, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(scaled.offsets, controller.offsets, rtol=1e-9)
        np.testing.assert_allclose(scaled_value.P, scale * value.P, rtol=1e-9, atol=1e-12 * scale)

    def test_value_function_is_symmetric_psd(self):
        _, value = _solve_c1()
        for P in value.P:
            np.testing.assert_array_equal(P, P.T)
            assert np.all(np.linalg.eigvalsh(P) >= -1e-9)

    def test_value_matches_closed_loop_cost(self):
        controller, value = _solve_c1(20)
        x0 = np.array([1.0, -2.0])
        xs, us = lqr_rollout(C1, controller, x0, 20)
        cost = sum(
            10.0 * (x - X_GOAL) @ (x - X_GOAL) + float(u @ u) for x, u in zip(xs[:-1], us)
        )
        cost += 10.0 * (xs[-1] - X_GOAL) @ (xs[-1] - X_GOAL)
        assert value.value(0, x0) == pytest.approx(cost, rel=1e-9)

    def test_monotone_in_terminal_weight(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            a, b = rng.uniform(-2.0, 2.0, size=2)
            dyn = LinearDynamics([[a]], [[b]], [0.0], [[0.0]])
            _, without = solve_lqr(dyn, [[1.0]], [[1.0]], [[0.0]], [0.0], [0.0], 8)
            _, with_terminal = solve_lqr(dyn, [[1.0]], [[1.0]], [[1.0]], [0.0], [0.0], 8)
            assert np.all(without.P[:, 0, 0] <= with_terminal.P[:, 0, 0] + 1e-12)

    def test_time_varying_dynamics(self):
        steps = [C1] * 3
        varying, _ = solve_lqr(steps, np.eye(2), [[1.0]], np.eye(2), X_GOAL, [0.0], 3)
        fixed, _ = solve_lqr(C1, np.eye(2), [[1.0]], np.eye(2), X_GOAL, [0.0], 3)
        np.testing.assert_allclose(varying.gains, fixed.gains)

    def test_rejects_bad_horizon(self):
        with pytest.raises(ContractViolationError, match="horizon"):
            _solve_c1(0)

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ContractViolationError, match="R"):
            solve_lqr(C1, np.eye(2), np.eye(2), np.eye(2), X_GOAL, [0.0], 3)

    def test_indefinite_input_weight(self):
        dyn = LinearDynamics([[1.0]], [[1.0]], [0.0], [[0.0]])
        with pytest.raises(NumericalError, match="positive definite"):
            solve_lqr(dyn, [[1.0]], [[-5.0]], [[1.0]], [0.0], [0.0], 2)


class TestRollout:
    def test_zero_controller_from_rest(self):
        dyn = LinearDynamics(np.eye(2), [[1.0], [0.0]], [0.0, 0.0], np.zeros((2, 2)))
        controller = LinearGaussianController(
            np.zeros((4, 1, 2)), np.zeros((4, 1)), np.zeros((4, 1, 1))
        )
        xs, us = lqr_rollout(dyn, controller, [0.0, 0.0], 4)
        assert xs.shape == (5, 2)
        assert us.shape == (4, 1)
        np.testing.assert_array_equal(xs, np.zeros((5, 2)))

    def test_reaches_goal(self):
        controller, _ = _solve_c1()
        xs, _ = lqr_rollout(C1, controller, [0.0, 0.0], 60)
        assert np.all(np.abs(xs[-1] - X_GOAL) < 0.5)

    def test_scalar_geometric_series(self):
        dyn = LinearDynamics([[0.5]], [[1.0]], [0.0], [[0.0]])
        controller = LinearGaussianController(
            np.zeros((6, 1, 1)), np.ones((6, 1)), np.zeros((6, 1, 1))
        )
        xs, _ = lqr_rollout(dyn, controller, [0.0], 6)
        t = np.arange(7)
        np.testing.assert_allclose(xs[:, 0], 2.0 - 2.0 * 0.5**t, rtol=1e-12)

    def test_controller_too_short(self):
        controller, _ = _solve_c1(3)
        with pytest.raises(ContractViolationError, match="horizon"):
            lqr_rollout(C1, controller, [0.0, 0.0], 5)

"""Tests for the EM driver."""

from __future__ import annotations

from unittest.mock import patch

import numpy as np
import pytest

from input_inference.cli.config import resolve_config
from input_inference.cli.experiments import build_environment, build_observation_model, build_priors
from input_inference.engine.em import em_iterate, linearize_trajectory, refresh_priors
from input_inference.engine.state import EmConfig, Priors
from input_inference.errors import ContractViolationError, EMAbortedError, NumericalError
from input_inference.models import Cartpole, LinearC1, Pendulum
from input_inference.models.cost import trajectory_cost
from input_inference.models.environments import rollout_open_loop


def _linear_setup(**config):
    env = LinearC1(horizon=20)
    model = env.observation_model(terminal_weight=[10.0, 10.0], x_goal=[10.0, 10.0])
    priors = Priors.isotropic(env.initial_state(), horizon=20, d_u=1, input_cov=100.0)
    settings = {"alpha_init": 1e3, "update_alpha": False, "max_iters": 3}
    settings.update(config)
    return env, model, priors, EmConfig(**settings)


def _pendulum_setup(**config):
    env = Pendulum()
    model = env.observation_model()
    priors = Priors.isotropic(env.initial_state(), horizon=env.horizon, d_u=1, input_cov=0.2)
    settings = {"alpha_init": 0.01, "delta_alpha_inv": 0.99, "max_iters": 1}
    settings.update(config)
    return env, model, priors, EmConfig(**settings)


@pytest.fixture(scope="module")
def c1_two_iterations():
    env = LinearC1()
    model = env.observation_model(terminal_weight=[10.0, 10.0], x_goal=[10.0, 10.0])
    priors = Priors.isotropic(env.initial_state(), horizon=60, d_u=1, input_cov=100.0)
    config = EmConfig(alpha_init=1e5, update_alpha=False, max_iters=2, convergence_tol=0.0)
    return env, model, em_iterate(env, model, priors, config)


class TestEmIterate:
    def test_trace_rows(self):
        result = em_iterate(*_linear_setup())
        assert [row.iteration for row in result.trace] == [0, 1, 2, 3]
        assert all(row.alpha == 1e3 for row in result.trace)
        assert not result.converged
        assert len(result.controller) == 21

    def test_initial_row_is_the_prior_rollout(self):
        result = em_iterate(*_pendulum_setup())
        assert result.trace[0].predicted_cost == pytest.approx(40400.0, rel=1e-6)

    @pytest.mark.parametrize("name", ["pendulum", "cartpole", "double_cartpole"])
    def test_registry_priors_leave_the_hanging_symmetry(self, name):
        config = resolve_config("trajopt", name)
        env = build_environment(config)
        priors = build_priors(env, config)
        assert all(np.all(prior.mu > 0.0) for prior in priors.inputs)
        if name == "pendulum":
            em_config = config.em.model_copy(update={"max_iters": 1})
            result = em_iterate(env, build_observation_model(env, config), priors, em_config)
            assert result.trace[0].predicted_cost == pytest.approx(40400.0, rel=1e-6)

    def test_alpha_is_updated(self):
        result = em_iterate(*_pendulum_setup(max_iters=3))
        alphas = [row.alpha for row in result.trace]
        assert alphas[0] == alphas[1] == 0.01
        assert alphas[2] != alphas[1]
        assert alphas[2] <= alphas[1] / 0.99 * (1 + 1e-12)

    def test_converges_within_tolerance(self):
        env, model, priors, config = _linear_setup(
            max_iters=10, convergence_tol=10.0, convergence_window=1
        )
        result = em_iterate(env, model, priors, config)
        assert result.converged
        assert len(result.trace) == 3

    def test_cost_equal_to_the_prior_rollout_never_counts_as_converged(self):
        env, model, priors, config = _linear_setup(
            max_iters=4, convergence_tol=10.0, convergence_window=1
        )
        with patch("input_inference.engine.em.trajectory_cost", return_value=5.0):
            result = em_iterate(env, model, priors, config)
        assert not result.converged
        assert len(result.trace) == 5

    def test_alpha_cap_holds_on_a_linear_problem(self):
        result = em_iterate(
            *_linear_setup(
                update_alpha=True,
                alpha_init=1e-6,
                delta_alpha_inv=0.8,
                max_iters=6,
                convergence_tol=0.0,
            )
        )
        alphas = [row.alpha for row in result.trace]
        assert len(alphas) == 7
        assert alphas[-1] != alphas[0]
        for old, new in zip(alphas, alphas[1:]):
            assert new <= old / 0.8 * (1 + 1e-12)

    def test_likelihood_does_not_increase_on_a_linear_problem(self):
        result = em_iterate(*_linear_setup(max_iters=5, convergence_tol=0.0))
        nll = [row.nll for row in result.trace]
        assert len(nll) == 6
        for old, new in zip(nll, nll[1:]):
            assert new <= old + 1e-9 * abs(old)

    def test_zero_iterations(self):
        env, model, priors, config = _linear_setup(max_iters=0)
        result = em_iterate(env, model, priors, config)
        assert result.trace == []
        assert result.msgs is None
        np.testing.assert_array_equal(result.controller.gains, np.zeros((21, 1, 2)))
        np.testing.assert_allclose(result.controller.covariances, 100.0)

    def test_priors_are_refreshed(self):
        result = em_iterate(*_linear_setup(max_iters=1))
        np.testing.assert_allclose(result.priors.inputs[3].mu, result.msgs[3].u_marginal.mu)
        assert result.priors.inputs[3].Sigma[0, 0] < 100.0

    def test_history_without_diagnostics(self):
        result = em_iterate(*_linear_setup())
        assert result.history == (result.msgs,)
        assert result.diagnostic_controllers == ()

    def test_diagnostics(self):
        result = em_iterate(*_linear_setup(diagnostics=True))
        assert len(result.history) == len(result.trace) - 1
        assert len(result.diagnostic_controllers) == len(result.trace) - 1
        assert result.history[-1] is result.msgs

    def test_failure_is_wrapped(self):
        with patch(
            "input_inference.engine.em.backward_pass",
            side_effect=NumericalError("singular", timestep=4),
        ):
            with pytest.raises(EMAbortedError) as info:
                em_iterate(*_linear_setup())
        assert info.value.iteration == 1
        assert len(info.value.trace) == 1
        assert info.value.exit_code == 3

    def test_dimension_mismatch(self):
        env, _, priors, config = _linear_setup()
        with pytest.raises(ContractViolationError, match="cost model"):
            em_iterate(env, Cartpole().observation_model(), priors, config)


class TestHelpers:
    def test_terminal_weight_replaces_the_final_observation(self):
        env, model, _, _ = _linear_setup()
        xs = np.zeros((3, 2))
        us = np.zeros((3, 1))
        models = linearize_trajectory(env, model, xs, us, 2.0)
        assert models[2].dynamics is None
        assert models[2].observation is None
        assert models[1].observation.alpha == 2.0

    def test_length_mismatch(self):
        env, model, _, _ = _linear_setup()
        with pytest.raises(ContractViolationError, match="inputs"):
            linearize_trajectory(env, model, np.zeros((3, 2)), np.zeros((2, 1)), 1.0)

    def test_refresh_keeps_the_initial_state(self):
        result = em_iterate(*_linear_setup(max_iters=1))
        refreshed = refresh_priors(result.priors, result.msgs)
        assert refreshed.x0 is result.priors.x0


class TestLinearExactness:
    def test_converges_in_one_iteration(self, c1_two_iterations):
        _, _, result = c1_two_iterations
        first, second = result.trace[1].predicted_cost, result.trace[2].predicted_cost
        assert abs(second - first) <= 1e-6 * first
        assert first < result.trace[0].predicted_cost

    def test_marginal_means_follow_the_dynamics(self, c1_two_iterations):
        env, _, result = c1_two_iterations
        xs, us = result.msgs.marginal_means()
        for t in range(60):
            np.testing.assert_allclose(
                xs[t + 1], env.A @ xs[t] + env.B @ us[t] + env.a, rtol=1e-6, atol=1e-6
            )

    def test_open_loop_inputs_reproduce_the_predicted_cost(self, c1_two_iterations):
        env, model, result = c1_two_iterations
        xs, us = result.msgs.marginal_means()
        rolled = rollout_open_loop(env, xs[0], us[:-1])
        np.testing.assert_allclose(rolled, xs, rtol=1e-6, atol=1e-6)
        assert trajectory_cost(model, rolled, us) == pytest.approx(
            result.trace[-1].predicted_cost, rel=1e-9
        )

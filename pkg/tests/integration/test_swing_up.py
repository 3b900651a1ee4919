"""Swing-up experiments on the nonlinear environments.

These run the full EM loop for hundreds of iterations; run them with ``pytest -m slow``.
"""

from __future__ import annotations

import pytest

from input_inference.cli.config import resolve_config
from input_inference.cli.experiments import (
    build_environment,
    build_observation_model,
    build_priors,
)
from input_inference.engine.em import em_iterate
from input_inference.evaluation import monte_carlo_eval

pytestmark = pytest.mark.slow


def _optimize(env_name, **overrides):
    config = resolve_config("trajopt", env_name, overrides=overrides)
    env = build_environment(config)
    model = build_observation_model(env, config)
    result = em_iterate(env, model, build_priors(env, config), config.em)
    return config, env, model, result


def _alpha_respects_cap(trace, delta):
    alphas = [row.alpha for row in trace]
    return all(new <= old / delta * (1 + 1e-12) for old, new in zip(alphas, alphas[1:]))


def _late_average_falls(costs, window=20):
    window = min(window, len(costs) // 2)
    late = sum(costs[-window:]) / window
    earlier = sum(costs[-2 * window : -window]) / window
    return late < earlier


@pytest.fixture(scope="module")
def pendulum():
    return _optimize("pendulum")


def test_pendulum_cost_falls(pendulum):
    config, _, _, result = pendulum
    costs = [row.predicted_cost for row in result.trace]
    assert costs[0] == pytest.approx(40400.0, rel=1e-6)
    assert min(costs) < 1.6e4
    assert len(result.trace) <= config.em.max_iters + 1
    assert _alpha_respects_cap(result.trace, config.em.delta_alpha_inv)


def test_pendulum_evaluation_matches_prediction(pendulum):
    config, env, model, result = pendulum
    predicted = result.trace[-1].predicted_cost
    report = monte_carlo_eval(
        env, result.controller, model, 100, config.seed, predicted_cost=predicted
    )
    assert report.n_failures == 0
    assert abs(report.mean - predicted) <= 0.15 * predicted
    assert report.std < 0.15 * report.mean


@pytest.mark.parametrize("env_name", ["cartpole", "double_cartpole"])
def test_cart_systems_complete(env_name):
    config, env, model, result = _optimize(env_name)
    costs = [row.predicted_cost for row in result.trace]
    assert len(costs) >= 3
    assert costs[-1] < costs[0]
    assert _late_average_falls(costs)
    assert _alpha_respects_cap(result.trace, config.em.delta_alpha_inv)
    predicted = costs[-1]
    report = monte_carlo_eval(
        env, result.controller, model, 20, config.seed, predicted_cost=predicted
    )
    assert 0.8 <= report.mean / predicted <= 1.25

"""The experiment families: LQR gains, LQR equivalence, trajectory optimization, evaluation."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from input_inference.cli import artifacts
from input_inference.cli.config import ExperimentConfig
from input_inference.controller.policy import LinearGaussianController
from input_inference.engine.em import EmResult, em_iterate
from input_inference.engine.state import Priors
from input_inference.errors import ConfigError, DivergenceError, EMAbortedError
from input_inference.evaluation.monte_carlo import EvalReport, monte_carlo_eval
from input_inference.evaluation.rollout import rollout
from input_inference.lqr.solver import solve_lqr
from input_inference.models.cost import cost_increments
from input_inference.models.dynamics import LinearDynamics
from input_inference.models.environments import Environment, LinearSystem, rollout_open_loop
from input_inference.models.observation import ObservationModel
from input_inference.models.registry import make_environment

logger = logging.getLogger("input_inference")


def build_environment(config: ExperimentConfig, *, zero_noise: bool = False) -> Environment:
    return make_environment(
        config.env.name,
        dt=config.env.dt,
        horizon=config.env.horizon,
        process_noise_scale=0.0 if zero_noise else config.env.process_noise_scale,
    )


def build_observation_model(env: Environment, config: ExperimentConfig) -> ObservationModel:
    cost = config.cost
    return env.observation_model(
        theta=cost.theta,
        z_goal=cost.z_goal,
        terminal_weight=cost.terminal_weight,
        x_goal=cost.x_goal,
    )


def build_priors(env: Environment, config: ExperimentConfig) -> Priors:
    return Priors.isotropic(
        env.initial_state(),
        horizon=env.horizon,
        d_u=env.d_u,
        input_cov=config.priors.input_cov,
        input_mean=config.priors.input_mean,
        x0_cov=config.priors.x0_cov,
    )


def _linear_problem(config: ExperimentConfig) -> tuple[LinearSystem, ObservationModel]:
    env = build_environment(config)
    if not isinstance(env, LinearSystem):
        raise ConfigError(f"environment {env.name!r} is not a linear system")
    return env, build_observation_model(env, config)


def _lqr_controller(env: LinearSystem, model: ObservationModel) -> LinearGaussianController:
    d_x = env.d_x
    Q = model.Theta[:d_x, :d_x]
    R = model.Theta[d_x:, d_x:]
    x_goal = model.x_goal if model.x_goal is not None else model.z_goal[:d_x]
    u_goal = model.z_goal[d_x:]
    Q_f = model.terminal_weight if model.terminal_weight is not None else Q
    dynamics = LinearDynamics(env.A, env.B, env.a, env.Sigma_eta)
    controller, _ = solve_lqr(dynamics, Q, R, Q_f, x_goal, u_goal, env.horizon)
    return controller


def run_lqr(config: ExperimentConfig, out: Path) -> dict[str, Path]:
    env, model = _linear_problem(config)
    controller = _lqr_controller(env, model)
    path = artifacts.write_gains(out / "gains_lqr.csv", controller, env.horizon)
    logger.info("wrote %s", path)
    return {"gains_lqr": path}


def run_lqr_equiv(config: ExperimentConfig, out: Path) -> dict[str, Path]:
    """i2c gains against dynamic-programming LQR gains on a linear system."""
    env, model = _linear_problem(config)
    lqr = _lqr_controller(env, model)
    result = em_iterate(env, model, build_priors(env, config), config.em)

    errors = artifacts.gain_errors(result.controller, lqr, env.horizon)
    worst = int(np.argmax(errors))
    summary = {
        "max_relative_error": errors[worst],
        "argmax_t": worst,
        "relative_errors": errors,
        "horizon": env.horizon,
        "alpha": result.trace[-1].alpha if result.trace else config.em.alpha_init,
    }
    paths = {
        "gains_lqr": artifacts.write_gains(out / "gains_lqr.csv", lqr, env.horizon),
        "gains_i2c": artifacts.write_gains(out / "gains_i2c.csv", result.controller, env.horizon),
        "gains_diff": artifacts.write_json(out / "gains_diff.json", summary),
    }
    logger.info("max relative gain error %.3e at t=%d", errors[worst], worst)
    for path in paths.values():
        logger.info("wrote %s", path)
    return paths


def _trajectory(env: Environment, result: EmResult, priors: Priors) -> tuple[np.ndarray, ...]:
    if result.msgs is not None:
        return result.msgs.marginal_means()
    us = np.array([prior.mu for prior in priors.inputs])
    return rollout_open_loop(env, priors.x0.mu, us[:-1]), us


def run_trajopt(config: ExperimentConfig, out: Path) -> dict[str, Path]:
    """EM trajectory optimization; the partial convergence trace survives an abort."""
    env = build_environment(config)
    model = build_observation_model(env, config)
    priors = build_priors(env, config)
    convergence = out / "convergence.csv"
    try:
        result = em_iterate(env, model, priors, config.em)
    except EMAbortedError as exc:
        artifacts.write_convergence(convergence, exc.trace)
        raise

    xs, us = _trajectory(env, result, priors)
    paths = {
        "convergence": artifacts.write_convergence(convergence, result.trace),
        "trajectory": artifacts.write_trajectory(
            out / "trajectory.csv", xs, us, cost_increments(model, xs, us)
        ),
        "controller": artifacts.write_controller(out / "controller.json", result.controller),
    }
    for path in paths.values():
        logger.info("wrote %s", path)
    return paths


def run_eval(config: ExperimentConfig, controller_path: Path, out: Path) -> EvalReport:
    """Monte-Carlo evaluation of a saved controller.

    The predicted cost is the last EM prediction from the ``convergence.csv`` written next to
    the controller by ``trajopt``; without one it is the cost of the noise-free closed loop.
    Artifacts are written before a :class:`DivergenceError` reports failed trials.
    """
    controller_path = Path(controller_path)
    controller = artifacts.read_controller(controller_path)
    settings = config.evaluation
    env = build_environment(config, zero_noise=settings.zero_noise)
    model = build_observation_model(env, config)
    predicted = artifacts.read_predicted_cost(controller_path.parent / "convergence.csv")
    if predicted is None:
        logger.info("no EM prediction beside %s, using the noise-free closed loop", controller_path)
        predicted = rollout(build_environment(config, zero_noise=True), controller, model).cost

    report = monte_carlo_eval(
        env,
        controller,
        model,
        settings.n_trials,
        config.seed,
        predicted_cost=predicted,
        stochastic=settings.stochastic,
        sample_policy=settings.sample_policy,
        strict=settings.strict,
    )
    for path in (
        artifacts.write_report(out / "eval.json", report),
        artifacts.write_trial_costs(out / "trial_costs.csv", report),
    ):
        logger.info("wrote %s", path)
    if report.n_failures:
        raise DivergenceError(
            f"{report.n_failures} of {report.n_trials} trials diverged",
            trial=report.failed_trials[0],
        )
    return report

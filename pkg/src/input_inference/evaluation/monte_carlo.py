"""Monte-Carlo evaluation of a controller on the stochastic environment."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, Field, field_serializer

from input_inference.controller.policy import LinearGaussianController
from input_inference.errors import ContractViolationError, DivergenceError
from input_inference.evaluation.rollout import rollout
from input_inference.models.environments import Environment
from input_inference.models.observation import ObservationModel
from input_inference.settings import get_settings
from input_inference.utils.timing import timed

logger = logging.getLogger("input_inference")


class EvalReport(BaseModel):
    """Per-trial costs and their summary; diverged trials are recorded with infinite cost.

    ``mean`` and ``std`` (population) cover the finite costs, ``mean_with_failures`` all of them.
    JSON output writes non-finite values as ``null``.
    """

    predicted_cost: float
    evaluated_costs: list[float]
    mean: float
    std: float
    mean_with_failures: float
    n_trials: int
    n_failures: int = 0
    failed_trials: list[int] = Field(default_factory=list)
    seed: int

    @field_serializer("evaluated_costs", when_used="json")
    def _costs_to_json(self, costs: list[float]) -> list[float | None]:
        return [c if math.isfinite(c) else None for c in costs]

    @field_serializer("predicted_cost", "mean", "std", "mean_with_failures", when_used="json")
    def _summary_to_json(self, value: float) -> float | None:
        return value if math.isfinite(value) else None

    @classmethod
    def from_costs(cls, costs: list[float], predicted_cost: float, seed: int) -> EvalReport:
        arr = np.asarray(costs, dtype=float)
        finite = arr[np.isfinite(arr)]
        failed = [i for i, c in enumerate(costs) if not math.isfinite(c)]
        return cls(
            predicted_cost=predicted_cost,
            evaluated_costs=[float(c) for c in costs],
            mean=float(finite.mean()) if finite.size else math.nan,
            std=float(finite.std()) if finite.size else math.nan,
            mean_with_failures=float(arr.mean()),
            n_trials=len(costs),
            n_failures=len(failed),
            failed_trials=failed,
            seed=seed,
        )


def trial_generators(seed: int, n_trials: int) -> list[np.random.Generator]:
    """Independent counter-based streams, one per trial, derived from the master seed."""
    children = np.random.SeedSequence(seed).spawn(n_trials)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


@timed
def monte_carlo_eval(
    env: Environment,
    controller: LinearGaussianController,
    model: ObservationModel,
    n_trials: int,
    seed: int,
    *,
    predicted_cost: float,
    x0: ArrayLike | None = None,
    stochastic: bool = True,
    sample_policy: bool = False,
    workers: int | None = None,
    strict: bool = False,
) -> EvalReport:
    """Run ``n_trials`` rollouts with per-trial random streams, merged in trial order.

    With ``strict`` the first diverged trial raises :class:`DivergenceError` carrying its
    index; otherwise it counts as a failure with infinite cost.
    """
    if n_trials < 1:
        raise ContractViolationError(f"n_trials must be at least 1, got {n_trials}")
    workers = workers or get_settings().workers
    generators = trial_generators(seed, n_trials)

    def run_trial(index: int) -> float:
        try:
            result = rollout(
                env,
                controller,
                model,
                x0,
                stochastic=stochastic,
                rng=generators[index],
                sample_policy=sample_policy,
            )
        except DivergenceError as exc:
            if strict:
                raise DivergenceError(
                    f"trial {index} diverged: {exc}",
                    state=exc.state,
                    timestep=exc.timestep,
                    trial=index,
                ) from exc
            logger.warning("trial %d diverged at t=%s", index, exc.timestep)
            return math.inf
        return result.cost

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            costs = list(pool.map(run_trial, range(n_trials)))
    else:
        costs = [run_trial(i) for i in range(n_trials)]

    report = EvalReport.from_costs(costs, predicted_cost, seed)
    logger.info(
        "evaluated %d trials: mean %.6g, std %.6g, %d failures",
        report.n_trials,
        report.mean,
        report.std,
        report.n_failures,
    )
    return report

"""Controller rollouts and Monte-Carlo cost evaluation."""

from input_inference.evaluation.monte_carlo import EvalReport, monte_carlo_eval, trial_generators
from input_inference.evaluation.rollout import Rollout, rollout

__all__ = ["EvalReport", "Rollout", "monte_carlo_eval", "rollout", "trial_generators"]

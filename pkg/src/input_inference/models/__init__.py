"""Dynamics, observation (cost) models, environments and linearization."""

from input_inference.models.cost import cost_increments, trajectory_cost
from input_inference.models.dynamics import LinearDynamics, linearize_dynamics
from input_inference.models.environments import (
    Cartpole,
    DoubleCartpole,
    Environment,
    LinearC1,
    LinearSystem,
    Pendulum,
    rollout_open_loop,
    sample_process_noise,
)
from input_inference.models.observation import (
    LinearizedObservation,
    ObservationModel,
    linearize_observation,
)
from input_inference.models.registry import (
    environment_names,
    make_environment,
    register_environment,
    registry_defaults,
)

__all__ = [
    "Cartpole",
    "DoubleCartpole",
    "Environment",
    "LinearC1",
    "LinearDynamics",
    "LinearSystem",
    "LinearizedObservation",
    "ObservationModel",
    "Pendulum",
    "cost_increments",
    "environment_names",
    "linearize_dynamics",
    "linearize_observation",
    "make_environment",
    "register_environment",
    "registry_defaults",
    "rollout_open_loop",
    "sample_process_noise",
    "trajectory_cost",
]

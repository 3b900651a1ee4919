"""Gaussian representations and the elementary message-passing rules."""

from input_inference.gaussian.messages import (
    add_bwd,
    add_fwd,
    auxiliary_from_backward,
    auxiliary_of,
    auxiliary_through,
    backward_through_noise,
    equality_fuse,
    fuse_marginal,
    linear_transform_bwd,
    linear_transform_fwd,
    log_density,
    marginal_from_auxiliary,
    to_canonical,
    to_moment,
)
from input_inference.gaussian.models import GaussianAuxiliary, GaussianCanonical, GaussianMoment

__all__ = [
    "GaussianAuxiliary",
    "GaussianCanonical",
    "GaussianMoment",
    "add_bwd",
    "add_fwd",
    "auxiliary_from_backward",
    "auxiliary_of",
    "auxiliary_through",
    "backward_through_noise",
    "equality_fuse",
    "fuse_marginal",
    "linear_transform_bwd",
    "linear_transform_fwd",
    "log_density",
    "marginal_from_auxiliary",
    "to_canonical",
    "to_moment",
]

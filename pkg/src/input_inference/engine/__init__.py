"""E-step message passing and the M-step for alpha.

The EM driver lives in :mod:`input_inference.engine.em`.
"""

from input_inference.engine.backward import backward_pass, terminal_backward
from input_inference.engine.forward import (
    forward_pass,
    forward_pass_relinearized,
    input_evidence,
    state_evidence,
)
from input_inference.engine.mstep import (
    expected_residual_covariance,
    m_step_alpha,
    negative_log_likelihood,
    optimal_alpha,
)
from input_inference.engine.state import (
    EmConfig,
    MessageState,
    Priors,
    TerminalCondition,
    TerminalMode,
    TimestepMessages,
    TimestepModel,
)

__all__ = [
    "EmConfig",
    "MessageState",
    "Priors",
    "TerminalCondition",
    "TerminalMode",
    "TimestepMessages",
    "TimestepModel",
    "backward_pass",
    "expected_residual_covariance",
    "forward_pass",
    "forward_pass_relinearized",
    "input_evidence",
    "m_step_alpha",
    "negative_log_likelihood",
    "optimal_alpha",
    "state_evidence",
    "terminal_backward",
]

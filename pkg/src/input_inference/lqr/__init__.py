"""Dynamic-programming LQR used as the reference solution."""

from input_inference.lqr.solver import QuadraticValue, lqr_rollout, solve_lqr

__all__ = ["QuadraticValue", "lqr_rollout", "solve_lqr"]

"""Closed-form backward recursion of the state's backward message.

``Lambda_t = E^T S_x^-1 E + A^T (I + Lambda_{t+1} M)^-1 Lambda_{t+1} A`` and
``nu_t = A^T (I + Lambda_{t+1} M)^-1 (nu_{t+1} - Lambda_{t+1} (a + B mu_u')) + E^T S_x^-1 r``
with ``M = Sigma_eta + B Sigma_u' B^T``. In the LQR limit ``Lambda_t = alpha P_t`` and
``nu_t = -alpha p_t``.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from input_inference.engine.backward import terminal_backward
from input_inference.engine.forward import forward_pass, state_evidence
from input_inference.engine.state import Priors, TerminalCondition, TimestepModel
from input_inference.gaussian import GaussianCanonical
from input_inference.gaussian.linalg import solve


def riccati_backward(
    models: Sequence[TimestepModel],
    priors: Priors,
    terminal: TerminalCondition | None = None,
    alpha: float | None = None,
) -> list[GaussianCanonical]:
    """Backward messages ``(nu_t, Lambda_t)`` of ``X_t`` for ``t = 0..T``.

    Only the input-branch forward beliefs ``U'_t`` are needed from a forward pass; no
    intermediate backward edge messages are formed.
    """
    terminal = terminal or TerminalCondition()
    msgs = forward_pass(models, priors, alpha)
    T = msgs.horizon
    d_x = msgs.d_x
    eye = np.eye(d_x)

    out: list[GaussianCanonical | None] = [None] * (T + 1)
    out[T], _ = terminal_backward(msgs[T], msgs.alpha, terminal)
    for t in range(T - 1, -1, -1):
        step = msgs[t]
        dyn = step.model.dynamics
        nxt = out[t + 1]
        spread = dyn.Sigma_eta + dyn.B @ step.u_obs.Sigma @ dyn.B.T
        rhs = np.column_stack(
            [nxt.nu - nxt.Lambda @ (dyn.a + dyn.B @ step.u_obs.mu), nxt.Lambda]
        )
        sol = solve(eye + nxt.Lambda @ spread, rhs, timestep=t, edge="X")
        evidence = state_evidence(step.model.observation, step.prior_u, d_x, t)
        out[t] = GaussianCanonical(
            dyn.A.T @ sol[:, 0] + evidence.nu,
            dyn.A.T @ sol[:, 1:] @ dyn.A + evidence.Lambda,
        )
    return out

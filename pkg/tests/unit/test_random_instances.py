"""Message passing against the brute-force joint posterior on many small random problems."""

from __future__ import annotations

import numpy as np
import pytest

from input_inference.controller import extract_controller, riccati_backward
from input_inference.engine import backward_pass, forward_pass
from tests.helpers import joint_posterior, random_instance

INSTANCES = range(50)


@pytest.fixture(params=INSTANCES, ids=lambda i: f"instance{i}")
def solved(request):
    problem = random_instance(request.param)
    msgs = backward_pass(
        forward_pass(problem.models, problem.priors, problem.alpha), problem.terminal
    )
    return problem, msgs, joint_posterior(problem)


def test_marginals(solved):
    problem, msgs, joint = solved
    for t in range(len(problem.models)):
        x, u = joint.state(t), joint.input(t)
        np.testing.assert_allclose(msgs[t].x_marginal.mu, x.mu, rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(msgs[t].x_marginal.Sigma, x.Sigma, rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(msgs[t].u_marginal.mu, u.mu, rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(msgs[t].u_marginal.Sigma, u.Sigma, rtol=1e-8, atol=1e-10)


def test_conditional_controller(solved):
    problem, msgs, joint = solved
    controller = extract_controller(msgs)
    for t in range(len(problem.models) - 1):
        K, k, sigma = joint.conditional_controller(t)
        np.testing.assert_allclose(controller.gains[t], K, rtol=1e-7, atol=1e-9)
        np.testing.assert_allclose(controller.offsets[t], k, rtol=1e-7, atol=1e-9)
        np.testing.assert_allclose(controller.covariances[t], sigma, rtol=1e-7, atol=1e-9)


def test_closed_form_backward_messages(solved):
    problem, msgs, _ = solved
    closed = riccati_backward(problem.models, problem.priors, problem.terminal, problem.alpha)
    for t, message in enumerate(closed):
        np.testing.assert_allclose(message.Lambda, msgs[t].x_bwd.Lambda, rtol=1e-9, atol=1e-9)
        np.testing.assert_allclose(message.nu, msgs[t].x_bwd.nu, rtol=1e-9, atol=1e-9)

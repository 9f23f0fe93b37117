import math

import numpy as np
from scipy.integrate import trapezoid

from hkdelay.exceptions import IntegrationError
from hkdelay.model import Scenario, compute_h, quadrature_nodes
from hkdelay.solver.dense import DenseOutput

__all__ = ('rhs_pointwise', 'rhs_distributed')


def _off_diagonal(weights: np.ndarray) -> np.ndarray:
    """Zeroes the self-interaction entries on the last two axes."""
    agents = weights.shape[-1]
    return weights * (1.0 - np.eye(agents))


def _finite(velocity: np.ndarray, t: float) -> np.ndarray:
    if not np.all(np.isfinite(velocity)):
        raise IntegrationError(f'Non-finite derivative at t={t}.')
    return velocity


def rhs_pointwise(
        traj: DenseOutput,
        scenario: Scenario,
        t: float,
        state_at_t: np.ndarray
) -> np.ndarray:
    """Velocities of the pointwise-delay model at time ``t``.

    Agent ``i`` moves towards every other agent's opinion at ``t - tau(t)``
    with rate ``psi(x_i(t), x_j(t - tau(t))) / (N - 1)``.

    :param traj: Dense output covering ``[-tau_bar, t]``.
    :type traj: DenseOutput
    :param scenario: Problem description.
    :type scenario: Scenario
    :param t: Current time.
    :type t: float
    :param state_at_t: Opinions at ``t``, shape ``(N, d)``.
    :type state_at_t: np.ndarray
    :return: Derivatives of shape ``(N, d)``.
    :rtype: np.ndarray
    :raises IntegrationError: If a derivative is not finite.
    """
    lag = float(scenario.delay.pointwise(t))
    delayed = state_at_t if lag == 0 else traj.at(t - lag)[0]

    weights = _off_diagonal(
        scenario.influence.evaluate(
            state_at_t[:, None, :],
            delayed[None, :, :]
        )
    )
    pulls = delayed[None, :, :] - state_at_t[:, None, :]
    velocity = np.einsum('ij,ijk->ik', weights, pulls) \
        / (scenario.agent_count - 1)

    return _finite(velocity, t)


def rhs_distributed(
        traj: DenseOutput,
        scenario: Scenario,
        t: float,
        state_at_t: np.ndarray
) -> np.ndarray:
    """Velocities of the distributed-delay model at time ``t``.

    The pull towards agent ``j`` is averaged over ``s`` in
    ``[t - tau2(t), t - tau1(t)]`` with weight ``alpha(t - s) / h(t)``. The
    integral is a composite trapezoid with ``quadrature_points_per_step``
    sub-intervals per solver step covered by the window.

    :param traj: Dense output covering ``[-tau_bar, t]``.
    :type traj: DenseOutput
    :param scenario: Problem description.
    :type scenario: Scenario
    :param t: Current time.
    :type t: float
    :param state_at_t: Opinions at ``t``, shape ``(N, d)``.
    :type state_at_t: np.ndarray
    :return: Derivatives of shape ``(N, d)``.
    :rtype: np.ndarray
    :raises IntegrationError: If a derivative is not finite.
    """
    lower, upper = scenario.delay.window(t)
    covered = max(
        1,
        math.ceil(float(upper - lower) / scenario.solver.step - 1e-12)
    )
    intervals = scenario.solver.quadrature_points_per_step * covered

    lags, kernel = quadrature_nodes(scenario.delay, t, intervals)
    mass = compute_h(scenario.delay, t, intervals)

    samples = np.empty((lags.size, scenario.agent_count, scenario.dimension))
    current = lags == 0
    samples[current] = state_at_t
    if not np.all(current):
        samples[~current] = traj.at(t - lags[~current])

    weights = _off_diagonal(
        scenario.influence.evaluate(
            state_at_t[None, :, None, :],
            samples[:, None, :, :]
        )
    )
    pulls = samples[:, None, :, :] - state_at_t[None, :, None, :]
    integrand = np.einsum(
        'kij,kijd->kid',
        kernel[:, None, None] * weights,
        pulls
    )
    velocity = trapezoid(integrand, lags, axis=0) \
        / (mass * (scenario.agent_count - 1))

    return _finite(velocity, t)

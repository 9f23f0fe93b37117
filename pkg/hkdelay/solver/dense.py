"""Cubic Hermite dense output over ``[-tau_bar, T]``.

``Trajectory`` is the immutable result of an integration. The
``TrajectoryBuilder`` is the same representation while it is being filled:
it additionally answers queries inside the step currently being computed,
either from the previous segment's Hermite extension or from the tentative
end point proposed by a corrector pass.
"""

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from hkdelay.exceptions import DomainError, IntegrationError
from hkdelay.model import InitialHistory

__all__ = (
    'DenseOutput',
    'hermite',
    'Trajectory',
    'TrajectoryBuilder',
    'dense_eval'
)

# Relative slack on the ends of the dense output domain
_DOMAIN_SLACK = 1e-12


class DenseOutput(Protocol):
    history: InitialHistory

    def at(self, times: np.ndarray | float) -> np.ndarray:
        ...


def hermite(
        theta: np.ndarray,
        step: float,
        p0: np.ndarray,
        m0: np.ndarray,
        p1: np.ndarray,
        m1: np.ndarray
) -> np.ndarray:
    """Cubic Hermite polynomial on a segment of length ``step``.

    ``theta`` is the normalized position (``0`` at ``p0``, ``1`` at ``p1``)
    and may exceed ``1`` for extrapolation. ``m0`` and ``m1`` are time
    derivatives, scaled to the unit segment here.
    """
    theta = np.asarray(theta, dtype=float)[:, None, None]
    dp0 = m0 * step
    dp1 = m1 * step

    return p0 + theta * (
        dp0 + theta * (
            -2 * dp0 - dp1 - 3 * p0 + 3 * p1
            + theta * (dp0 + dp1 + 2 * p0 - 2 * p1)
        )
    )


def _interpolate(
        times: np.ndarray,
        grid: np.ndarray,
        states: np.ndarray,
        derivatives: np.ndarray,
        last: int,
        step: float
) -> np.ndarray:
    """Hermite values for ``0 < t <= grid[last]`` (requires ``last >= 1``)."""
    node = np.searchsorted(grid[:last + 1], times, side='right') - 1
    node = np.clip(node, 0, last)
    segment = np.minimum(node, last - 1)
    theta = (times - grid[segment]) / step

    values = hermite(
        theta,
        step,
        states[segment],
        derivatives[segment],
        states[segment + 1],
        derivatives[segment + 1]
    )

    # Grid nodes reproduce the stored states exactly
    exact = grid[node] == times
    values[exact] = states[node[exact]]

    return values


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Integrated states on a uniform grid plus the initial history."""

    grid: np.ndarray
    states: np.ndarray
    derivatives: np.ndarray
    history: InitialHistory

    @property
    def tau_bar(self) -> float:
        return self.history.tau_bar

    @property
    def horizon(self) -> float:
        return float(self.grid[-1])

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def agent_count(self) -> int:
        return self.states.shape[1]

    @property
    def dimension(self) -> int:
        return self.states.shape[2]

    def at(self, times: np.ndarray | float) -> np.ndarray:
        """All agent states at the given times.

        :param times: Times inside ``[-tau_bar, T]``.
        :type times: np.ndarray | float
        :return: States of shape ``(len(times), agent_count, dimension)``.
        :rtype: np.ndarray
        :raises DomainError: If a time lies outside ``[-tau_bar, T]``.
        """
        times = np.atleast_1d(np.asarray(times, dtype=float))
        slack = _DOMAIN_SLACK * max(1.0, self.horizon)

        if np.any(times < -self.tau_bar - slack) \
                or np.any(times > self.horizon + slack):
            raise DomainError(
                f'Dense output is defined on [-{self.tau_bar}, '
                f'{self.horizon}].'
            )

        times = np.minimum(times, self.horizon)
        values = np.empty((times.size, self.agent_count, self.dimension))
        past = times <= 0

        if np.any(past):
            values[past] = self.history.evaluate(times[past])
        if not np.all(past):
            values[~past] = _interpolate(
                times[~past],
                self.grid,
                self.states,
                self.derivatives,
                len(self.grid) - 1,
                self.step
            )

        return values


class TrajectoryBuilder:
    """Mutable dense output used while the method of steps advances."""

    def __init__(self, history: InitialHistory, grid: np.ndarray) -> None:
        self.history = history
        self.grid = grid
        self.step = float(grid[1] - grid[0])

        shape = (len(grid), history.agent_count, history.dimension)
        self.states = np.zeros(shape)
        self.derivatives = np.zeros(shape)
        self.states[0] = history.evaluate(0.0)[0]

        self.filled = 0
        self.tentative = False
        self.open_hit = False

    def open_step(self, index: int) -> None:
        """Starts the step from ``grid[index]`` to ``grid[index + 1]``."""
        self.filled = index
        self.tentative = False
        self.open_hit = False

    def propose(self, state: np.ndarray, derivative: np.ndarray) -> None:
        """Stores a tentative end point of the open step."""
        self.states[self.filled + 1] = state
        self.derivatives[self.filled + 1] = derivative
        self.tentative = True

    def commit(self, state: np.ndarray, derivative: np.ndarray) -> None:
        """Closes the open step with its final end point.

        :raises IntegrationError: If the end point is not finite.
        """
        if not (np.all(np.isfinite(state)) and np.all(np.isfinite(derivative))):
            raise IntegrationError(
                f'Non-finite state at t={self.grid[self.filled + 1]}.'
            )

        self.states[self.filled + 1] = state
        self.derivatives[self.filled + 1] = derivative
        self.filled += 1
        self.tentative = False

    def at(self, times: np.ndarray | float) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        known_until = self.grid[self.filled]
        slack = _DOMAIN_SLACK * max(1.0, float(self.grid[-1]))

        if np.any(times < -self.history.tau_bar - slack) \
                or np.any(times > known_until + self.step + slack):
            raise DomainError(
                'Delayed argument outside the integrated range.'
            )

        values = np.empty(
            (times.size, self.history.agent_count, self.history.dimension)
        )
        past = times <= 0
        known = ~past & (times <= known_until)
        ahead = times > known_until

        if np.any(past):
            values[past] = self.history.evaluate(times[past])
        if np.any(known):
            values[known] = _interpolate(
                times[known],
                self.grid,
                self.states,
                self.derivatives,
                self.filled,
                self.step
            )
        if np.any(ahead):
            self.open_hit = True
            values[ahead] = self._extend(times[ahead])

        return values

    def _extend(self, times: np.ndarray) -> np.ndarray:
        """Values inside the open step."""
        base = self.filled

        if self.tentative:
            return hermite(
                (times - self.grid[base]) / self.step,
                self.step,
                self.states[base],
                self.derivatives[base],
                self.states[base + 1],
                self.derivatives[base + 1]
            )

        if base >= 1:
            return hermite(
                (times - self.grid[base - 1]) / self.step,
                self.step,
                self.states[base - 1],
                self.derivatives[base - 1],
                self.states[base],
                self.derivatives[base]
            )

        lead = (times - self.grid[base])[:, None, None]
        return self.states[base] + lead * self.derivatives[base]

    def freeze(self) -> Trajectory:
        """Returns the finished, immutable trajectory."""
        states = self.states.copy()
        derivatives = self.derivatives.copy()
        states.flags.writeable = False
        derivatives.flags.writeable = False

        return Trajectory(
            grid=self.grid,
            states=states,
            derivatives=derivatives,
            history=self.history
        )


def dense_eval(traj: Trajectory, agent: int, t: float) -> np.ndarray:
    """Opinion of a single agent at time ``t``.

    :param traj: Integrated trajectory.
    :type traj: Trajectory
    :param agent: Zero-based agent index.
    :type agent: int
    :param t: Time inside ``[-tau_bar, T]``.
    :type t: float
    :return: Opinion vector of shape ``(dimension,)``.
    :rtype: np.ndarray
    :raises DomainError: If the agent index or the time is invalid.
    """
    if not 0 <= agent < traj.agent_count:
        raise DomainError(f'No agent with index {agent}.')

    return traj.at(t)[0, agent]

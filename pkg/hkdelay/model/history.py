from dataclasses import dataclass
from typing import Protocol

import numpy as np
from numpy.polynomial import polynomial

from hkdelay.exceptions import DomainError, ScenarioError

__all__ = (
    'HistoryProfile',
    'ConstantProfile',
    'PolynomialProfile',
    'SampledProfile',
    'BlendedProfile',
    'InitialHistory',
    'eval_history'
)

# Relative tolerance on the ends of the history domain
_DOMAIN_SLACK = 1e-12

# Points used to check a history for finiteness at construction
_PROBE_POINTS = 257


class HistoryProfile(Protocol):
    """Continuous vector-valued initial datum of a single agent."""

    @property
    def dimension(self) -> int:
        ...

    def __call__(self, s: np.ndarray) -> np.ndarray:
        ...


@dataclass(frozen=True)
class ConstantProfile:
    value: tuple[float, ...]

    @property
    def dimension(self) -> int:
        return len(self.value)

    def __call__(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.broadcast_to(
            np.asarray(self.value, dtype=float),
            (s.size, self.dimension)
        ).copy()


@dataclass(frozen=True)
class PolynomialProfile:
    """Polynomial in ``s`` with vector coefficients in ascending powers."""

    coefficients: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        if not self.coefficients:
            raise ScenarioError('Polynomial history needs a coefficient.')
        if len({len(c) for c in self.coefficients}) != 1:
            raise ScenarioError(
                'Polynomial history coefficients must share one dimension.'
            )

    @property
    def dimension(self) -> int:
        return len(self.coefficients[0])

    def __call__(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        # polyval maps the leading axis of the coefficients onto powers
        return polynomial.polyval(
            s,
            np.asarray(self.coefficients, dtype=float)
        ).T


@dataclass(frozen=True)
class SampledProfile:
    """Piecewise-linear interpolation of vector samples."""

    nodes: tuple[float, ...]
    values: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        if len(self.nodes) < 2 or len(self.nodes) != len(self.values):
            raise ScenarioError(
                'Sampled history needs at least two aligned nodes.'
            )
        if np.any(np.diff(self.nodes) <= 0):
            raise ScenarioError('Sampled history nodes must increase.')
        if len({len(v) for v in self.values}) != 1:
            raise ScenarioError(
                'Sampled history values must share one dimension.'
            )

    @property
    def dimension(self) -> int:
        return len(self.values[0])

    def __call__(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        values = np.asarray(self.values, dtype=float)

        return np.stack(
            [np.interp(s, self.nodes, values[:, k])
             for k in range(self.dimension)],
            axis=-1
        )


@dataclass(frozen=True)
class BlendedProfile:
    """Convex combination ``(1 - weight) * first + weight * second``.

    Used to place additional agents inside the support of a reference
    ensemble.
    """

    first: HistoryProfile
    second: HistoryProfile
    weight: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.weight <= 1.0:
            raise ScenarioError('Blend weight must lie in [0, 1].')
        if self.first.dimension != self.second.dimension:
            raise ScenarioError('Blended profiles must share one dimension.')

    @property
    def dimension(self) -> int:
        return self.first.dimension

    def __call__(self, s: np.ndarray) -> np.ndarray:
        if self.weight == 0.0:
            return self.first(s)
        if self.weight == 1.0:
            return self.second(s)

        return (1.0 - self.weight) * self.first(s) \
            + self.weight * self.second(s)


@dataclass(frozen=True)
class InitialHistory:
    """Initial data of all agents on ``[-tau_bar, 0]``."""

    tau_bar: float
    profiles: tuple[HistoryProfile, ...]

    def __post_init__(self) -> None:
        if not self.tau_bar > 0:
            raise ScenarioError(
                'History domain [-tau_bar, 0] needs tau_bar > 0.'
            )
        if not self.profiles:
            raise ScenarioError('History needs at least one agent profile.')
        if len({p.dimension for p in self.profiles}) != 1:
            raise ScenarioError('All history profiles must share a dimension.')

        for agent, profile in enumerate(self.profiles):
            if isinstance(profile, SampledProfile) and (
                profile.nodes[0] > -self.tau_bar * (1 - _DOMAIN_SLACK)
                or profile.nodes[-1] < 0.0
            ):
                raise ScenarioError(
                    f'Sampled history of agent {agent} does not cover '
                    f'[-tau_bar, 0].'
                )

        probe = self.evaluate(np.linspace(-self.tau_bar, 0.0, _PROBE_POINTS))

        if not np.all(np.isfinite(probe)):
            raise ScenarioError('History must be finite on [-tau_bar, 0].')

    @property
    def agent_count(self) -> int:
        return len(self.profiles)

    @property
    def dimension(self) -> int:
        return self.profiles[0].dimension

    def evaluate(self, s: np.ndarray | float) -> np.ndarray:
        """Evaluates every agent at the times ``s``.

        :param s: Times inside ``[-tau_bar, 0]``.
        :type s: np.ndarray | float
        :return: States of shape ``(len(s), agent_count, dimension)``.
        :rtype: np.ndarray
        :raises DomainError: If a time lies outside ``[-tau_bar, 0]``.
        """
        s = np.atleast_1d(np.asarray(s, dtype=float))
        slack = _DOMAIN_SLACK * self.tau_bar

        if np.any(s < -self.tau_bar - slack) or np.any(s > slack):
            raise DomainError(
                f'History evaluated outside [-{self.tau_bar}, 0].'
            )

        s = np.clip(s, -self.tau_bar, 0.0)

        return np.stack([profile(s) for profile in self.profiles], axis=1)


def eval_history(history: InitialHistory, agent: int, s: float) -> np.ndarray:
    """Returns the initial datum of a single agent at time ``s``.

    :param history: Initial history of the scenario.
    :type history: InitialHistory
    :param agent: Zero-based agent index.
    :type agent: int
    :param s: Time inside ``[-tau_bar, 0]``.
    :type s: float
    :return: Opinion vector of shape ``(dimension,)``.
    :rtype: np.ndarray
    :raises DomainError: If the agent index or the time is invalid.
    """
    if not 0 <= agent < history.agent_count:
        raise DomainError(f'No agent with index {agent}.')

    return history.evaluate(s)[0, agent]

from dataclasses import dataclass

import numpy as np
from loguru import logger

from hkdelay.exceptions import DomainError
from hkdelay.model import InitialHistory
from hkdelay.settings import app_config
from hkdelay.solver import Trajectory
from hkdelay.utils import max_pairwise_distance

__all__ = (
    'WindowDiameters',
    'diameter_at',
    'diameter_series',
    'window_times',
    'complete_windows',
    'window_diameters',
    'compute_M0'
)

# Slack when deciding whether ``n * tau_bar`` still fits into the horizon
_WINDOW_SLACK = 1e-9


@dataclass(frozen=True)
class WindowDiameters:
    """Sampled diameters ``D_n`` of the windows ``[n*tau_bar - tau_bar,
    n*tau_bar]``, ``D_0`` being the history window."""

    tau_bar: float
    values: tuple[float, ...]
    samples_per_window: int

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, n: int) -> float:
        return self.values[n]

    @property
    def D0(self) -> float:
        return self.values[0]

    @property
    def last(self) -> int:
        """Index of the last complete window."""
        return len(self.values) - 1


def diameter_at(traj: Trajectory, t: float) -> float:
    """Largest distance between two agents at time ``t``.

    :param traj: Integrated trajectory.
    :type traj: Trajectory
    :param t: Time inside ``[-tau_bar, T]``.
    :type t: float
    :return: Diameter ``d(t)``.
    :rtype: float
    :raises DomainError: If ``t`` is outside the trajectory.
    """
    return max_pairwise_distance(traj.at(t)[0])


def diameter_series(
        traj: Trajectory,
        times: np.ndarray | None = None
) -> np.ndarray:
    """Diameters ``d(t)`` at the given times, the solver grid by default."""
    states = traj.states if times is None else traj.at(times)

    return np.array([max_pairwise_distance(state) for state in states])


def window_times(tau_bar: float, n: int, samples: int) -> np.ndarray:
    """``samples + 1`` uniform times of window ``n``.

    Doubling ``samples`` yields a superset, so refining never lowers a
    sampled maximum.
    """
    return np.linspace(n * tau_bar - tau_bar, n * tau_bar, samples + 1)


def complete_windows(tau_bar: float, horizon: float) -> int:
    """Index of the last window ``[n*tau_bar - tau_bar, n*tau_bar]`` that
    ends inside ``[0, horizon]``."""
    return int(np.floor(horizon / tau_bar + _WINDOW_SLACK))


def window_diameters(
        traj: Trajectory,
        samples_per_window: int | None = None
) -> WindowDiameters:
    """Sampled window diameters over every complete window.

    :param traj: Integrated trajectory.
    :type traj: Trajectory
    :param samples_per_window: Sub-intervals per window, at least 8.
    :type samples_per_window: int | None
    :return: Diameters ``D_0, ..., D_n``.
    :rtype: WindowDiameters
    :raises DomainError: If ``samples_per_window`` is below 8.
    """
    samples = samples_per_window or app_config.analysis.samples_per_window

    if samples < 8:
        raise DomainError('samples_per_window must be at least 8.')

    tau_bar = traj.tau_bar
    last = complete_windows(tau_bar, traj.horizon)

    if traj.horizon - last * tau_bar > _WINDOW_SLACK * max(1.0, traj.horizon):
        logger.warning(
            f'Horizon {traj.horizon} is not a multiple of tau_bar={tau_bar}: '
            f'partial window after t={last * tau_bar} is skipped'
        )

    values = []
    for n in range(last + 1):
        cloud = traj.at(window_times(tau_bar, n, samples))
        values.append(max_pairwise_distance(cloud.reshape(-1, traj.dimension)))

    return WindowDiameters(
        tau_bar=tau_bar,
        values=tuple(values),
        samples_per_window=samples
    )


def compute_M0(history: InitialHistory, samples: int | None = None) -> float:
    """Largest opinion norm over the initial history.

    :param history: Initial history.
    :type history: InitialHistory
    :param samples: Uniform samples of ``[-tau_bar, 0]``, at least 8.
    :type samples: int | None
    :return: ``M0``.
    :rtype: float
    """
    samples = samples or app_config.analysis.history_samples

    if samples < 8:
        raise DomainError('compute_M0 needs at least 8 samples.')

    states = history.evaluate(np.linspace(-history.tau_bar, 0.0, samples))

    return float(np.linalg.norm(states, axis=-1).max())

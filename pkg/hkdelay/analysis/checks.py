"""Sampled verification of the consensus inequalities along a trajectory.

Every check returns its worst signed margin (right-hand side minus left-hand
side); a check passes when that margin is not below the negative slack.
"""

import numpy as np
from loguru import logger
from scipy.stats import linregress

from hkdelay.analysis.diameters import (
    WindowDiameters,
    complete_windows,
    diameter_at,
    diameter_series,
    window_times
)
from hkdelay.exceptions import DomainError
from hkdelay.schemas import CheckRecord, ConsensusCertificate
from hkdelay.settings import app_config
from hkdelay.solver import Trajectory
from hkdelay.types import CheckStatus
from hkdelay.utils import max_pairwise_distance, reduce_cloud

__all__ = (
    'check_record',
    'skipped_record',
    'verify_hull_confinement',
    'verify_lemma_chain',
    'verify_projection_contraction',
    'fit_decay_rate',
    'verify_rate_dominance'
)

# Sub-samples per solver step used to resolve the hull of the anchor window
_ANCHOR_REFINEMENT = 8


def check_record(
        name: str,
        margins: np.ndarray | float,
        slack: float,
        note: str | None = None
) -> CheckRecord:
    margins = np.atleast_1d(np.asarray(margins, dtype=float))
    worst = float(margins.min())
    status = CheckStatus.PASSED if worst >= -slack else CheckStatus.FAILED

    logger.debug(f'Check {name}: worst margin {worst:.3e} ({status.value})')

    return CheckRecord(
        name=name,
        status=status,
        worst_margin=worst,
        slack=slack,
        samples=margins.size,
        note=note
    )


def skipped_record(name: str, slack: float, note: str) -> CheckRecord:
    logger.warning(f'Check {name} skipped: {note}')

    return CheckRecord(
        name=name,
        status=CheckStatus.SKIPPED,
        slack=slack,
        note=note
    )


def _unit_directions(
        count: int,
        dimension: int,
        rng: np.random.Generator
) -> np.ndarray:
    """``count`` random unit vectors followed by the ``2 * dimension`` signed
    axes."""
    random = rng.normal(size=(count, dimension))
    random /= np.linalg.norm(random, axis=1, keepdims=True)
    axes = np.eye(dimension)

    return np.vstack([random, axes, -axes])


def _anchor_times(
        traj: Trajectory,
        start: float,
        end: float,
        samples: int
) -> np.ndarray:
    """Uniform samples of ``[start, end]`` refined around the solver grid."""
    times = [np.linspace(start, end, samples)]

    if start < 0:
        times.append(
            np.linspace(
                start,
                min(end, 0.0),
                app_config.analysis.history_samples
            )
        )
    if end > 0:
        fine = traj.step / _ANCHOR_REFINEMENT
        first = int(np.ceil(max(start, 0.0) / fine))
        last = int(np.floor(end / fine + 1e-9))
        times.append(np.arange(first, last + 1) * fine)

    return np.clip(np.unique(np.concatenate(times)), -traj.tau_bar, end)


def verify_hull_confinement(
        traj: Trajectory,
        T_anchor: float,
        directions: int | None = None,
        sample_times: int | None = None,
        *,
        seed: int | None = None
) -> float:
    """Checks that projections after ``T_anchor`` stay between the extreme
    projections over ``[T_anchor - tau_bar, T_anchor]``.

    :param traj: Integrated trajectory.
    :type traj: Trajectory
    :param T_anchor: Anchor time in ``[0, T)``.
    :type T_anchor: float
    :param directions: Random unit directions, at least 16.
    :type directions: int | None
    :param sample_times: Uniform samples of the anchor window and of
        ``[T_anchor, T]``.
    :type sample_times: int | None
    :param seed: Seed of the direction generator.
    :type seed: int | None
    :return: Worst signed margin over directions, agents and later times.
    :rtype: float
    """
    directions = directions or app_config.analysis.hull_directions
    samples = sample_times or app_config.analysis.hull_sample_times
    seed = app_config.analysis.seed if seed is None else seed

    if not 0 <= T_anchor < traj.horizon:
        raise DomainError(f'Anchor {T_anchor} outside [0, {traj.horizon}).')
    if directions < 16:
        raise DomainError('Hull confinement needs at least 16 directions.')

    vectors = _unit_directions(
        directions,
        traj.dimension,
        np.random.default_rng(seed)
    )

    anchor = traj.at(
        _anchor_times(traj, T_anchor - traj.tau_bar, T_anchor, samples)
    ) @ vectors.T
    lowest = anchor.min(axis=(0, 1))
    highest = anchor.max(axis=(0, 1))

    later_times = np.union1d(
        traj.grid[traj.grid >= T_anchor],
        np.linspace(T_anchor, traj.horizon, samples)
    )
    later = traj.at(later_times) @ vectors.T

    return float(min((later - lowest).min(), (highest - later).min()))


def _suffix_clouds(traj: Trajectory, wd: WindowDiameters) -> list[np.ndarray]:
    """Reduced sample clouds of ``[n*tau_bar - tau_bar, T]`` for every
    window ``n``."""
    tau_bar = wd.tau_bar
    samples = wd.samples_per_window
    clouds = [
        reduce_cloud(
            traj.at(window_times(tau_bar, n, samples))
            .reshape(-1, traj.dimension)
        )
        for n in range(len(wd))
    ]

    tail_start = wd.last * tau_bar
    if traj.horizon > tail_start:
        tail_count = max(
            2,
            int(np.ceil(samples * (traj.horizon - tail_start) / tau_bar)) + 1
        )
        tail = traj.at(np.linspace(tail_start, traj.horizon, tail_count))
        suffix = reduce_cloud(tail.reshape(-1, traj.dimension))
    else:
        suffix = np.empty((0, traj.dimension))

    suffixes = [np.empty((0, traj.dimension))] * len(clouds)
    for n in reversed(range(len(clouds))):
        suffix = reduce_cloud(np.vstack([clouds[n], suffix]))
        suffixes[n] = suffix

    return suffixes


def verify_lemma_chain(
        traj: Trajectory,
        cert: ConsensusCertificate,
        wd: WindowDiameters
) -> list[CheckRecord]:
    """Runs the six window and decay checks.

    ``window_bound``: ``|x_i(s) - x_j(t)| <= D_n`` for ``s, t >= n*tau_bar -
    tau_bar``. ``state_bound``: ``|x_i(t)| <= M0``. ``window_contraction``:
    ``D_{n+1} <= e^{-K tau_bar} d(n tau_bar) + (1 - e^{-K tau_bar}) D_n``.
    ``diameter_contraction``: ``d(n tau_bar) <= C D_{n-2}``.
    ``geometric_decay``: ``D_{3n} <= C_tilde^n D_0``. ``exponential_decay``:
    ``d(t) <= D_0 e^{-gamma (t - 2 tau_bar)}``.

    :param traj: Integrated trajectory.
    :type traj: Trajectory
    :param cert: Certificate constants of the same trajectory.
    :type cert: ConsensusCertificate
    :param wd: Window diameters of the same trajectory.
    :type wd: WindowDiameters
    :return: One record per check, in the order above.
    :rtype: list[CheckRecord]
    """
    slack = cert.slack
    tau_bar = wd.tau_bar
    values = np.asarray(wd.values)
    anchors = np.array([diameter_at(traj, n * tau_bar) for n in range(len(wd))])
    records = []

    window_margins = [
        values[n] - max_pairwise_distance(cloud)
        for n, cloud in enumerate(_suffix_clouds(traj, wd))
    ]
    records.append(check_record('window_bound', window_margins, slack))

    norms = np.linalg.norm(traj.states, axis=-1)
    records.append(check_record('state_bound', cert.M0 - norms.ravel(), slack))

    if wd.last >= 1:
        decay = np.exp(-cert.K * tau_bar)
        contraction = decay * anchors[:-1] + (1.0 - decay) * values[:-1]
        records.append(
            check_record(
                'window_contraction',
                contraction - values[1:],
                slack
            )
        )
    else:
        records.append(
            skipped_record('window_contraction', slack, 'insufficient horizon')
        )

    if wd.last >= 3:
        n = np.arange(2, wd.last + 1)
        records.append(
            check_record(
                'diameter_contraction',
                cert.C * values[n - 2] - anchors[n],
                slack
            )
        )

        n = np.arange(1, wd.last // 3 + 1)
        records.append(
            check_record(
                'geometric_decay',
                cert.C_tilde ** n * cert.D0 - values[3 * n],
                slack
            )
        )
    else:
        for name in ('diameter_contraction', 'geometric_decay'):
            records.append(
                skipped_record(name, slack, 'insufficient horizon')
            )

    bound = cert.D0 * np.exp(-cert.gamma * (traj.grid - 2 * tau_bar))
    records.append(
        check_record(
            'exponential_decay',
            bound - diameter_series(traj),
            slack
        )
    )

    return records


def verify_projection_contraction(
        traj: Trajectory,
        wd: WindowDiameters,
        K: float,
        trials: int | None = None,
        *,
        seed: int | None = None
) -> float:
    """Samples the pairwise projection contraction.

    For random agents ``i != j``, unit ``v``, window ``n`` and times
    ``n*tau_bar <= t0 <= t <= T`` checks
    ``<x_i(t) - x_j(t), v> <= e^{-K(t - t0)} <x_i(t0) - x_j(t0), v>
    + (1 - e^{-K(t - t0)}) D_n``. The anchor ``t0`` is uniform on
    ``[n*tau_bar, T]`` and ``t`` uniform on ``[t0, T]``.

    :return: Worst signed margin over all trials.
    :rtype: float
    """
    trials = trials or app_config.analysis.projection_trials
    seed = app_config.analysis.seed if seed is None else seed
    rng = np.random.default_rng(seed)

    last = min(wd.last, complete_windows(wd.tau_bar, traj.horizon))
    n = rng.integers(0, last + 1, size=trials)
    start = np.minimum(n * wd.tau_bar, traj.horizon)
    t0 = rng.uniform(start, traj.horizon)
    t = rng.uniform(t0, traj.horizon)

    pairs = np.array([
        rng.choice(traj.agent_count, size=2, replace=False)
        for _ in range(trials)
    ])
    vectors = rng.normal(size=(trials, traj.dimension))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)

    rows = np.arange(trials)
    at_t0 = traj.at(t0)
    at_t = traj.at(t)

    gap_t0 = np.einsum(
        'kd,kd->k',
        at_t0[rows, pairs[:, 0]] - at_t0[rows, pairs[:, 1]],
        vectors
    )
    gap_t = np.einsum(
        'kd,kd->k',
        at_t[rows, pairs[:, 0]] - at_t[rows, pairs[:, 1]],
        vectors
    )

    decay = np.exp(-K * (t - t0))
    bound = decay * gap_t0 + (1.0 - decay) * np.asarray(wd.values)[n]

    return float((bound - gap_t).min())


def fit_decay_rate(
        traj: Trajectory,
        t_start: float | None = None,
        t_end: float | None = None
) -> float:
    """Empirical exponential decay rate of the diameter.

    Least-squares slope of ``ln d(t)`` over the grid points of
    ``[t_start, t_end]``, negated.

    :param traj: Integrated trajectory.
    :type traj: Trajectory
    :param t_start: Start of the fit, ``0`` by default.
    :type t_start: float | None
    :param t_end: End of the fit, ``T`` by default.
    :type t_end: float | None
    :return: Empirical rate.
    :rtype: float
    :raises DomainError: If ``d(t)`` vanishes or the range has fewer than two
        grid points.
    """
    t_start = 0.0 if t_start is None else t_start
    t_end = traj.horizon if t_end is None else t_end

    inside = (traj.grid >= t_start - 1e-12) & (traj.grid <= t_end + 1e-12)
    if np.count_nonzero(inside) < 2:
        raise DomainError(
            f'Decay fit needs two grid points in [{t_start}, {t_end}].'
        )

    times = traj.grid[inside]
    diameters = diameter_series(traj)[inside]

    if np.any(diameters <= 0):
        raise DomainError(
            'Diameter vanishes inside the fit range: consensus is exact and '
            'the decay rate is undefined.'
        )

    return -float(linregress(times, np.log(diameters)).slope)


def verify_rate_dominance(
        traj: Trajectory,
        gamma: float
) -> tuple[CheckRecord, float | None]:
    """Compares the fitted rate over ``[0, T]`` with ``gamma``."""
    tolerance = app_config.analysis.rate_tolerance

    try:
        rate = fit_decay_rate(traj)
    except DomainError as e:
        return skipped_record('rate_dominance', tolerance, e.detail), None

    return check_record(
        'rate_dominance',
        rate - gamma,
        tolerance
    ), rate

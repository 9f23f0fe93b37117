"""Particle-ensemble diagnostics of the continuum limit.

The continuum claims are exercised by proxy: ensembles of growing size are
drawn from one reference profile, and each member is certified with the same
constants. Empirical measures carry equal weights and equal point counts.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from loguru import logger
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from hkdelay.analysis import (
    build_certificate,
    compute_M0,
    diameter_series,
    window_times
)
from hkdelay.exceptions import DomainError, ScenarioError
from hkdelay.model import (
    BlendedProfile,
    InitialHistory,
    Scenario,
    compute_psi0
)
from hkdelay.schemas import (
    LadderMemberReport,
    MeanFieldConfig,
    MeanFieldReport,
    MeanFieldRow
)
from hkdelay.settings import app_config
from hkdelay.solver import Trajectory, integrate
from hkdelay.types import InfluenceForm, TransportMethod
from hkdelay.utils import max_pairwise_distance

__all__ = (
    'EmpiricalMeasure',
    'empirical_at',
    'support_diameter',
    'wasserstein1',
    'ladder_scenario',
    'reference_psi0',
    'n_independence_check'
)

# Largest measure handled by the exact assignment
_MAX_POINTS = 256

# Relative slack on the lower delay bound
_TAU_STAR_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Equal-weight point masses."""

    points: np.ndarray

    def __post_init__(self) -> None:
        points = np.atleast_2d(np.asarray(self.points, dtype=float))

        if not np.all(np.isfinite(points)):
            raise DomainError('Empirical measure points must be finite.')

        object.__setattr__(self, 'points', points)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.size, 1.0 / self.size) if self.size else np.empty(0)


def empirical_at(traj: Trajectory, t: float) -> EmpiricalMeasure:
    """Empirical measure of the agents at time ``t``.

    :raises DomainError: If ``t`` is outside ``[-tau_bar, T]``.
    """
    return EmpiricalMeasure(traj.at(t)[0])


def support_diameter(mu: EmpiricalMeasure) -> float:
    """Diameter of the support of ``mu``.

    :raises DomainError: If the measure is empty.
    """
    if mu.size == 0:
        raise DomainError('Support diameter of an empty measure.')

    return max_pairwise_distance(mu.points)


def wasserstein1(
        mu: EmpiricalMeasure,
        nu: EmpiricalMeasure,
        method: TransportMethod = TransportMethod.AUTO
) -> float:
    """1-Wasserstein distance between two equal-size empirical measures.

    One-dimensional measures are matched in sorted order, higher dimensions
    solve the minimum-cost perfect matching on the Euclidean distance matrix.
    Both are exact for equal weights.

    :param mu: First measure.
    :type mu: EmpiricalMeasure
    :param nu: Second measure.
    :type nu: EmpiricalMeasure
    :param method: Matching algorithm.
    :type method: TransportMethod
    :return: Transport cost.
    :rtype: float
    :raises DomainError: If sizes or dimensions differ, a measure is empty or
        larger than 256 points, or sorted matching is asked for ``d > 1``.
    """
    if mu.size != nu.size:
        raise DomainError(
            f'Measures have {mu.size} and {nu.size} points; resample to '
            f'equal counts.'
        )
    if mu.size == 0 or mu.size > _MAX_POINTS:
        raise DomainError(
            f'Transport needs between 1 and {_MAX_POINTS} points per measure.'
        )
    if mu.dimension != nu.dimension:
        raise DomainError('Measures live in different dimensions.')

    if method is TransportMethod.AUTO:
        method = TransportMethod.SORTED if mu.dimension == 1 \
            else TransportMethod.ASSIGNMENT

    if method is TransportMethod.SORTED:
        if mu.dimension != 1:
            raise DomainError('Sorted matching is exact only in dimension 1.')

        return float(
            np.abs(np.sort(mu.points[:, 0]) - np.sort(nu.points[:, 0])).mean()
        )

    cost = cdist(mu.points, nu.points)
    rows, cols = linear_sum_assignment(cost)

    return float(cost[rows, cols].mean())


def ladder_scenario(template: Scenario, agent_count: int) -> Scenario:
    """Scenario with ``agent_count`` agents placed inside the template
    ensemble.

    Agent ``k`` sits at quantile ``k / (agent_count - 1)`` of the template
    profiles taken in order, blending the two neighbouring profiles linearly.

    :param template: Reference scenario.
    :type template: Scenario
    :param agent_count: Ensemble size, at least 2.
    :type agent_count: int
    :return: Scenario sharing delay, influence, horizon and solver with the
        template.
    :rtype: Scenario
    """
    profiles = template.history.profiles
    top = len(profiles) - 1
    blended = []

    for k in range(agent_count):
        position = k * top / (agent_count - 1)
        lower = min(int(np.floor(position)), top - 1)
        blended.append(
            BlendedProfile(
                first=profiles[lower],
                second=profiles[lower + 1],
                weight=min(1.0, max(0.0, position - lower))
            )
        )

    return Scenario(
        agent_count=agent_count,
        dimension=template.dimension,
        horizon=template.horizon,
        delay=template.delay,
        influence=template.influence,
        history=InitialHistory(
            tau_bar=template.tau_bar,
            profiles=tuple(blended)
        ),
        solver=template.solver
    )


def _initial_window(history: InitialHistory) -> np.ndarray:
    return history.evaluate(
        window_times(
            history.tau_bar,
            0,
            app_config.analysis.samples_per_window
        )
    )


def reference_psi0(template: Scenario) -> float:
    """Influence lower bound valid for every ladder member.

    Ladder histories are convex blends of the template histories, so their
    ``M0`` and ``D0`` never exceed the template's.
    """
    M0 = compute_M0(template.history)

    if template.influence.form is InfluenceForm.DIFFERENCE:
        D0 = max_pairwise_distance(
            _initial_window(template.history).reshape(-1, template.dimension)
        )
        return compute_psi0(
            template.influence,
            M0,
            dimension=template.dimension,
            D0=D0
        )

    return compute_psi0(template.influence, M0, dimension=template.dimension)


def _check_tau_star(template: Scenario, tau_star: float) -> None:
    smallest = template.delay.smallest_lag(template.probe_times())

    if smallest < tau_star * (1.0 - _TAU_STAR_SLACK):
        raise ScenarioError(
            f'Mean-field runs need delays bounded below by '
            f'tau_star={tau_star}, sampled minimum is {smallest}.'
        )


def _run_member(
        template: Scenario,
        agent_count: int,
        psi0: float
) -> tuple[LadderMemberReport, list[MeanFieldRow]]:
    scenario = ladder_scenario(template, agent_count)
    traj = integrate(scenario)
    cert = build_certificate(traj, scenario, psi0=psi0, jobs=1)

    initial = float(
        diameter_series(
            traj,
            window_times(
                scenario.tau_bar,
                0,
                app_config.analysis.samples_per_window
            )
        ).max()
    )
    support = diameter_series(traj)
    bound = initial * np.exp(-cert.gamma * (traj.grid - 2 * scenario.tau_bar))
    margins = bound - support

    transport = None
    if agent_count <= _MAX_POINTS:
        transport = wasserstein1(
            empirical_at(traj, 0.0),
            empirical_at(traj, traj.horizon)
        )

    logger.info(
        f'Ladder member N={agent_count}: gamma={cert.gamma:.10g}, '
        f'worst margin {margins.min():.3e}'
    )

    rows = [
        MeanFieldRow(N=agent_count, t=t, dX=d, bound=b, margin=m)
        for t, d, b, m in zip(traj.grid, support, bound, margins)
    ]
    member = LadderMemberReport(
        N=agent_count,
        C=cert.C,
        C_tilde=cert.C_tilde,
        gamma=cert.gamma,
        initial_support_diameter=initial,
        worst_margin=float(margins.min()),
        transport=transport,
        certified=cert.passed
    )

    return member, rows


def n_independence_check(
        config: MeanFieldConfig,
        scenario_template: Scenario,
        *,
        jobs: int | None = None
) -> MeanFieldReport:
    """Certifies every ladder member and compares the constants.

    Passes when ``C``, ``C_tilde`` and ``gamma`` coincide across the ladder
    and ``d_X(t) <= max_s d_X(g_s) e^{-gamma (t - 2 tau_bar)}`` holds at every
    grid time of every member.

    :param config: Ladder and lower delay bound.
    :type config: MeanFieldConfig
    :param scenario_template: Reference ensemble.
    :type scenario_template: Scenario
    :param jobs: Ladder members integrated concurrently.
    :type jobs: int | None
    :return: Report with per-member results and the sampled decay rows.
    :rtype: MeanFieldReport
    :raises ScenarioError: If a delay drops below ``tau_star``.
    :raises CertificateError: If the ladder cannot be certified.
    """
    _check_tau_star(scenario_template, config.tau_star)
    psi0 = reference_psi0(scenario_template)

    if config.lipschitz_L is not None:
        logger.debug(f'Declared Lipschitz constant L={config.lipschitz_L}')

    with ThreadPoolExecutor(max_workers=jobs or app_config.jobs) as executor:
        results = list(
            executor.map(
                lambda n: _run_member(scenario_template, n, psi0),
                config.N_ladder
            )
        )

    members = [member for member, _ in results]
    rows = [row for _, member_rows in results for row in member_rows]

    constants = {(m.C, m.C_tilde, m.gamma) for m in members}
    initial = max(m.initial_support_diameter for m in members)

    return MeanFieldReport(
        members=members,
        rows=rows,
        constants_identical=len(constants) == 1,
        slack=app_config.analysis.check_slack * (1.0 + initial)
    )

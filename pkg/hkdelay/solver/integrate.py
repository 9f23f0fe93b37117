from typing import Callable

import numpy as np
from loguru import logger

from hkdelay.model import Scenario
from hkdelay.settings import app_config
from hkdelay.solver.dense import DenseOutput, Trajectory, TrajectoryBuilder
from hkdelay.solver.rhs import rhs_distributed, rhs_pointwise
from hkdelay.types import DelayKind

__all__ = ('integrate', 'select_rhs')

RightHandSide = Callable[[DenseOutput, Scenario, float, np.ndarray], np.ndarray]


def select_rhs(scenario: Scenario) -> RightHandSide:
    """Right-hand side matching the delay kind of the scenario."""
    if scenario.delay.kind is DelayKind.POINTWISE:
        return rhs_pointwise
    return rhs_distributed


def _rk4_pass(
        rhs: RightHandSide,
        builder: TrajectoryBuilder,
        scenario: Scenario,
        index: int
) -> tuple[np.ndarray, np.ndarray]:
    """One classical RK4 step from ``grid[index]``.

    Returns the end state and the derivative there, which becomes the
    Hermite slope of the next node.
    """
    h = scenario.solver.step
    t = float(builder.grid[index])
    y = builder.states[index]
    k1 = builder.derivatives[index]

    k2 = rhs(builder, scenario, t + h / 2, y + (h / 2) * k1)
    k3 = rhs(builder, scenario, t + h / 2, y + (h / 2) * k2)
    k4 = rhs(builder, scenario, t + h, y + h * k3)

    end = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)

    return end, rhs(builder, scenario, t + h, end)


def integrate(scenario: Scenario) -> Trajectory:
    """Integrates the scenario on ``[0, T]`` by the method of steps.

    Fixed-step RK4 where delayed arguments come from the cubic Hermite dense
    output. A stage whose delayed time falls inside the step being computed
    first reads the extension of the previous segment; the step is then
    re-run ``corrector_iterations`` times against its own tentative end point.

    :param scenario: Validated problem description.
    :type scenario: Scenario
    :return: Immutable trajectory with dense output over ``[-tau_bar, T]``.
    :rtype: Trajectory
    :raises IntegrationError: If a state or a derivative is not finite.
    """
    rhs = select_rhs(scenario)
    grid = scenario.grid()
    builder = TrajectoryBuilder(scenario.history, grid)
    iterations = scenario.solver.corrector_iterations
    tolerance = app_config.solver.corrector_tolerance

    logger.debug(
        f'Integrating {scenario.agent_count} agents in dimension '
        f'{scenario.dimension}: {scenario.delay.kind.value} delay, '
        f'step={scenario.solver.step}, steps={scenario.step_count}, '
        f'corrector_iterations={iterations}'
    )

    builder.derivatives[0] = rhs(builder, scenario, 0.0, builder.states[0])

    unconverged = 0
    worst_residual = 0.0

    for index in range(scenario.step_count):
        builder.open_step(index)
        end, slope = _rk4_pass(rhs, builder, scenario, index)

        if builder.open_hit and iterations > 0:
            residual = np.inf
            for _ in range(iterations):
                builder.propose(end, slope)
                previous = end
                end, slope = _rk4_pass(rhs, builder, scenario, index)
                residual = float(np.abs(end - previous).max())

            if residual > tolerance:
                unconverged += 1
                worst_residual = max(worst_residual, residual)

        builder.commit(end, slope)

    if unconverged:
        logger.warning(
            f'Corrector did not converge on {unconverged} of '
            f'{scenario.step_count} steps (worst residual '
            f'{worst_residual:.3e} > {tolerance:.1e})'
        )

    return builder.freeze()

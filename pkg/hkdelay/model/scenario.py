from dataclasses import dataclass, field

import numpy as np

from hkdelay.exceptions import ScenarioError
from hkdelay.model.delay import DelaySpec
from hkdelay.model.history import InitialHistory
from hkdelay.model.influence import InfluenceSpec
from hkdelay.settings import app_config
from hkdelay.types import InfluenceForm

__all__ = ('SolverParams', 'Scenario')

# Tolerance on ``horizon / step`` being an integer
_GRID_SLACK = 1e-9

# History states used to probe the influence function at construction
_INFLUENCE_PROBES = 256


@dataclass(frozen=True)
class SolverParams:
    step: float
    corrector_iterations: int = field(
        default_factory=lambda: app_config.solver.corrector_iterations
    )
    quadrature_points_per_step: int = field(
        default_factory=lambda: app_config.solver.quadrature_points_per_step
    )

    def __post_init__(self) -> None:
        if not (np.isfinite(self.step) and self.step > 0):
            raise ScenarioError('Solver step must be positive.')
        if self.corrector_iterations < 0:
            raise ScenarioError('corrector_iterations must be >= 0.')
        if self.quadrature_points_per_step < 1:
            raise ScenarioError('quadrature_points_per_step must be >= 1.')


@dataclass(frozen=True)
class Scenario:
    """Complete description of one delayed consensus problem."""

    agent_count: int
    dimension: int
    horizon: float
    delay: DelaySpec
    influence: InfluenceSpec
    history: InitialHistory
    solver: SolverParams

    def __post_init__(self) -> None:
        if self.agent_count < 2:
            raise ScenarioError('agent_count must be at least 2.')
        if self.dimension < 1:
            raise ScenarioError('dimension must be at least 1.')
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise ScenarioError('horizon must be positive.')

        if self.history.agent_count != self.agent_count:
            raise ScenarioError(
                f'History has {self.history.agent_count} profiles for '
                f'{self.agent_count} agents.'
            )
        if self.history.dimension != self.dimension:
            raise ScenarioError(
                f'History dimension {self.history.dimension} differs from '
                f'dimension {self.dimension}.'
            )
        if not np.isclose(self.delay.tau_bar, self.history.tau_bar,
                          rtol=1e-12, atol=0.0):
            raise ScenarioError(
                'Delay and history must agree on tau_bar '
                '(history domain is [-tau_bar, 0]).'
            )

        fraction = app_config.solver.step_fraction
        step_cap = fraction * self.tau_bar
        if self.solver.step > step_cap * (1 + 1e-12):
            raise ScenarioError(
                f'Solver step {self.solver.step} exceeds '
                f'{fraction:g}*tau_bar = {step_cap}.'
            )
        if abs(self.step_count * self.solver.step - self.horizon) \
                > _GRID_SLACK:
            raise ScenarioError(
                f'Solver step {self.solver.step} does not divide horizon '
                f'{self.horizon}.'
            )

        if self.influence.form is InfluenceForm.GENERAL \
                and self.dimension > 3 \
                and self.influence.psi0_override is None:
            raise ScenarioError(
                'General influence in dimension > 3 requires psi0_override.'
            )

        self.delay.check_bounds(self.probe_times())
        self._probe_influence()

    @property
    def tau_bar(self) -> float:
        return self.delay.tau_bar

    @property
    def step_count(self) -> int:
        return int(round(self.horizon / self.solver.step))

    def grid(self) -> np.ndarray:
        """Solver grid ``0, dt, ..., T``."""
        return np.arange(self.step_count + 1) * self.solver.step

    def probe_times(self) -> np.ndarray:
        """Uniform probes of ``[0, T]`` merged with every RK4 stage time."""
        uniform = np.linspace(
            0.0,
            self.horizon,
            app_config.analysis.delay_probe_points
        )
        stages = np.arange(2 * self.step_count + 1) * (self.solver.step / 2)

        return np.union1d(uniform, stages)

    def _probe_influence(self) -> None:
        states = self.history.evaluate(
            np.linspace(-self.tau_bar, 0.0, 9)
        ).reshape(-1, self.dimension)

        if len(states) > _INFLUENCE_PROBES:
            states = states[
                np.linspace(0, len(states) - 1, _INFLUENCE_PROBES).astype(int)
            ]

        self.influence.evaluate(states[:, None, :], states[None, :, :])

from dataclasses import dataclass
from typing import Callable

import numpy as np
from loguru import logger

from hkdelay.exceptions import InfluenceError, ScenarioError
from hkdelay.settings import app_config
from hkdelay.types import InfluenceForm

__all__ = (
    'ConstantInfluence',
    'SineInfluence',
    'RationalKernel',
    'GaussianKernel',
    'InfluenceSpec',
    'influence_from_family',
    'compute_psi0'
)

# Relative slack when comparing influence values against the declared K
_K_SLACK = 1e-12

# Pairs of grid points evaluated at once while searching for psi0
_PAIR_CHUNK = 1 << 18


@dataclass(frozen=True)
class ConstantInfluence:
    value: float

    form = InfluenceForm.GENERAL

    @property
    def supremum(self) -> float:
        return self.value

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        shape = np.broadcast_shapes(np.shape(x), np.shape(y))[:-1]
        return np.full(shape, float(self.value))


@dataclass(frozen=True)
class SineInfluence:
    """``offset + amplitude * sin(x[axis])`` with ``offset > |amplitude|``."""

    offset: float
    amplitude: float
    axis: int = 0

    form = InfluenceForm.GENERAL

    @property
    def supremum(self) -> float:
        return self.offset + abs(self.amplitude)

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        shape = np.broadcast_shapes(np.shape(x), np.shape(y))[:-1]
        values = self.offset + self.amplitude * np.sin(
            np.asarray(x, dtype=float)[..., self.axis]
        )
        return np.broadcast_to(values, shape)


@dataclass(frozen=True)
class RationalKernel:
    """``amplitude / (1 + scale * r**2)``."""

    amplitude: float
    scale: float = 1.0

    form = InfluenceForm.DIFFERENCE

    @property
    def supremum(self) -> float:
        return self.amplitude

    def __call__(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return self.amplitude / (1.0 + self.scale * r * r)


@dataclass(frozen=True)
class GaussianKernel:
    """``amplitude * exp(-(r / width)**2)``."""

    amplitude: float
    width: float = 1.0

    form = InfluenceForm.DIFFERENCE

    @property
    def supremum(self) -> float:
        return self.amplitude

    def __call__(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return self.amplitude * np.exp(-(r / self.width) ** 2)


@dataclass(frozen=True)
class InfluenceSpec:
    """Influence function together with its declared bounds.

    Every evaluation is cross-checked against positivity and against the
    declared supremum ``K``: all proof constants are derived from ``K``, so a
    wrong declaration must fail loudly instead of being re-estimated.
    """

    form: InfluenceForm
    evaluator: Callable[..., np.ndarray]
    K: float
    psi0_override: float | None = None

    def __post_init__(self) -> None:
        if not (np.isfinite(self.K) and self.K > 0):
            raise ScenarioError('Influence bound K must be positive and finite.')
        if self.psi0_override is not None:
            if not self.psi0_override > 0:
                raise ScenarioError('psi0_override must be positive.')
            if self.psi0_override > self.K:
                raise ScenarioError('psi0_override cannot exceed K.')

    def evaluate(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Evaluates ``psi(x, y)`` with numpy broadcasting on leading axes.

        :param x: Current opinions, trailing axis of length ``d``.
        :type x: np.ndarray
        :param y: Delayed opinions, trailing axis of length ``d``.
        :type y: np.ndarray
        :return: Influence values of the broadcast leading shape.
        :rtype: np.ndarray
        :raises InfluenceError: On non-positive, non-finite or too large values.
        """
        if self.form is InfluenceForm.DIFFERENCE:
            return self.evaluate_radial(
                np.linalg.norm(np.asarray(x) - np.asarray(y), axis=-1)
            )

        return self._checked(self.evaluator(x, y))

    def evaluate_radial(self, r: np.ndarray) -> np.ndarray:
        """Evaluates a difference-form influence at distances ``r``."""
        if self.form is not InfluenceForm.DIFFERENCE:
            raise ScenarioError('Radial evaluation needs a difference form.')

        return self._checked(self.evaluator(r))

    def _checked(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)

        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise InfluenceError(
                'Influence function must be strictly positive and finite.'
            )

        worst = float(values.max(initial=0.0))
        if worst > self.K * (1.0 + _K_SLACK):
            raise InfluenceError(
                f'Influence value {worst!r} exceeds the declared bound '
                f'K={self.K!r}.'
            )

        return values


def influence_from_family(
        family: ConstantInfluence | SineInfluence | RationalKernel
        | GaussianKernel,
        K: float | None = None,
        psi0_override: float | None = None
) -> InfluenceSpec:
    """Wraps a built-in influence family into an ``InfluenceSpec``.

    :param family: One of the built-in influence families.
    :param K: Declared supremum, defaults to the analytic supremum.
    :type K: float | None
    :param psi0_override: Analytic lower bound, if known.
    :type psi0_override: float | None
    :return: Validated influence specification.
    :rtype: InfluenceSpec
    """
    if isinstance(family, SineInfluence) \
            and not family.offset > abs(family.amplitude):
        raise ScenarioError(
            'Sinusoidal influence needs offset > |amplitude| to stay positive.'
        )
    if family.supremum <= 0:
        raise ScenarioError('Influence amplitude must be positive.')

    return InfluenceSpec(
        form=family.form,
        evaluator=family,
        K=family.supremum if K is None else K,
        psi0_override=psi0_override
    )


def _ball_grid(radius: float, dimension: int, resolution: int) -> np.ndarray:
    """Uniform cube grid restricted to the closed ball of ``radius``."""
    if radius == 0:
        return np.zeros((1, dimension))

    axis = np.linspace(-radius, radius, resolution)
    cube = np.stack(
        np.meshgrid(*([axis] * dimension), indexing='ij'),
        axis=-1
    ).reshape(-1, dimension)

    inside = np.linalg.norm(cube, axis=-1) <= radius * (1.0 + _K_SLACK)
    return cube[inside]


def compute_psi0(
        influence: InfluenceSpec,
        M0: float,
        grid_resolution: int | None = None,
        *,
        dimension: int = 1,
        D0: float | None = None
) -> float:
    """Lower bound of the influence on the region visited by the solution.

    General form: minimum of ``psi(y, z)`` over a grid of the product of
    balls of radius ``M0``. Difference form: minimum of ``psi(r)`` over a
    grid of ``[0, D0]``; without ``D0`` the bound ``2 * M0`` is used.

    :param influence: Influence specification.
    :type influence: InfluenceSpec
    :param M0: Bound on the norm of every opinion.
    :type M0: float
    :param grid_resolution: Points per axis, defaults to the configured value.
    :type grid_resolution: int | None
    :param dimension: Opinion dimension.
    :type dimension: int
    :param D0: Initial window diameter (difference form only).
    :type D0: float | None
    :return: ``psi0`` (the override when one is declared).
    :rtype: float
    :raises ScenarioError:
        If the general form in dimension above 3 has no override or the
        inputs are out of range.
    """
    if influence.psi0_override is not None:
        return influence.psi0_override

    resolution = grid_resolution or app_config.analysis.psi0_resolution

    if M0 < 0 or resolution < 2:
        raise ScenarioError('compute_psi0 needs M0 >= 0 and resolution >= 2.')

    if influence.form is InfluenceForm.DIFFERENCE:
        radius = 2.0 * M0 if D0 is None else D0
        r = np.linspace(0.0, radius, resolution)
        return float(influence.evaluate_radial(r).min())

    if dimension > 3:
        raise ScenarioError(
            'General influence in dimension > 3 requires psi0_override.'
        )

    budget = app_config.analysis.psi0_pair_budget
    capped = max(2, min(resolution, int(budget ** (1.0 / (2 * dimension)))))
    if capped < resolution:
        logger.warning(
            f'psi0 grid reduced from {resolution} to {capped} points per '
            f'axis in dimension {dimension} (pair budget {budget})'
        )

    points = _ball_grid(M0, dimension, capped)
    best = np.inf
    rows = max(1, _PAIR_CHUNK // len(points))

    for start in range(0, len(points), rows):
        values = influence.evaluate(
            points[start:start + rows, None, :],
            points[None, :, :]
        )
        best = min(best, float(values.min()))

    return best

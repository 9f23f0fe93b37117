from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from hkdelay.exceptions import DomainError, ScenarioError
from hkdelay.model.functions import TimeFunction
from hkdelay.types import DelayKind

__all__ = (
    'DelaySpec',
    'eval_delay',
    'quadrature_nodes',
    'compute_h'
)

# Relative slack on the delay bounds
_BOUND_SLACK = 1e-12

# Points used to check the kernel for positivity on [0, tau_bar]
_KERNEL_PROBES = 1025


@dataclass(frozen=True)
class DelaySpec:
    """Pointwise delay ``tau`` or distributed window ``[tau1, tau2]``.

    ``alpha`` weights the lag ``t - s`` inside the distributed window.
    """

    kind: DelayKind
    tau_bar: float
    tau: TimeFunction | None = None
    tau1: TimeFunction | None = None
    tau2: TimeFunction | None = None
    alpha: TimeFunction | None = None

    def __post_init__(self) -> None:
        if not (np.isfinite(self.tau_bar) and self.tau_bar > 0):
            raise ScenarioError(
                'Delay bound tau_bar must be positive '
                '(0 <= tau(t) <= tau_bar for some tau_bar > 0).'
            )

        if self.kind is DelayKind.POINTWISE:
            if self.tau is None:
                raise ScenarioError('Pointwise delay needs a tau function.')
            return

        if self.tau1 is None or self.tau2 is None or self.alpha is None:
            raise ScenarioError(
                'Distributed delay needs tau1, tau2 and alpha functions.'
            )

        kernel = np.asarray(
            self.alpha(np.linspace(0.0, self.tau_bar, _KERNEL_PROBES))
        )
        if not np.all(np.isfinite(kernel)) or np.any(kernel <= 0):
            raise ScenarioError(
                'Delay kernel alpha must be positive on [0, tau_bar].'
            )

    @property
    def _slack(self) -> float:
        return _BOUND_SLACK * self.tau_bar

    def pointwise(self, t: np.ndarray | float) -> np.ndarray:
        """Returns ``tau(t)`` checked against ``0 <= tau(t) <= tau_bar``.

        :raises ScenarioError: If the bound is violated.
        """
        values = np.asarray(self.tau(t), dtype=float)

        if not np.all(np.isfinite(values)) \
                or np.any(values < -self._slack) \
                or np.any(values > self.tau_bar + self._slack):
            raise ScenarioError(
                f'Delay tau(t) leaves [0, tau_bar={self.tau_bar}].'
            )

        return np.clip(values, 0.0, self.tau_bar)

    def window(self, t: np.ndarray | float) -> tuple[np.ndarray, np.ndarray]:
        """Returns ``(tau1(t), tau2(t))`` checked against
        ``0 <= tau1(t) < tau2(t) <= tau_bar``.

        :raises ScenarioError: If the bounds are violated.
        """
        lower = np.asarray(self.tau1(t), dtype=float)
        upper = np.asarray(self.tau2(t), dtype=float)

        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))) \
                or np.any(lower < -self._slack) \
                or np.any(upper > self.tau_bar + self._slack):
            raise ScenarioError(
                f'Distributed delays leave [0, tau_bar={self.tau_bar}].'
            )

        lower = np.clip(lower, 0.0, self.tau_bar)
        upper = np.clip(upper, 0.0, self.tau_bar)

        if np.any(lower >= upper):
            raise ScenarioError(
                'Distributed delays require tau1(t) < tau2(t) strictly.'
            )

        return lower, upper

    def check_bounds(self, times: np.ndarray) -> None:
        """Probes the delay bounds on the given times."""
        if self.kind is DelayKind.POINTWISE:
            self.pointwise(times)
        else:
            self.window(times)

    def smallest_lag(self, times: np.ndarray) -> float:
        """Smallest sampled lag (``tau`` or ``tau1``) on the given times."""
        if self.kind is DelayKind.POINTWISE:
            return float(self.pointwise(times).min())

        return float(self.window(times)[0].min())


def eval_delay(
        spec: DelaySpec,
        t: float
) -> float | tuple[float, float]:
    """Evaluates the delay at time ``t``.

    :param spec: Delay specification.
    :type spec: DelaySpec
    :param t: Non-negative time.
    :type t: float
    :return: ``tau(t)`` for pointwise delays, ``(tau1(t), tau2(t))`` otherwise.
    :rtype: float | tuple[float, float]
    :raises DomainError: If ``t`` is negative.
    :raises ScenarioError: If the user delay function violates its bounds.
    """
    if t < 0:
        raise DomainError(f'Delays are defined for t >= 0, got {t}.')

    if spec.kind is DelayKind.POINTWISE:
        return float(spec.pointwise(t))

    lower, upper = spec.window(t)
    return float(lower), float(upper)


def quadrature_nodes(
        spec: DelaySpec,
        t: float,
        intervals: int
) -> tuple[np.ndarray, np.ndarray]:
    """Uniform lag nodes on ``[tau1(t), tau2(t)]`` and kernel values there.

    :param spec: Distributed delay specification.
    :type spec: DelaySpec
    :param t: Non-negative time.
    :type t: float
    :param intervals: Number of trapezoid sub-intervals.
    :type intervals: int
    :return: Lags ``r`` and ``alpha(r)``, both of length ``intervals + 1``.
    :rtype: tuple[np.ndarray, np.ndarray]
    """
    if spec.kind is not DelayKind.DISTRIBUTED:
        raise ScenarioError('Quadrature nodes need a distributed delay.')
    if intervals < 1:
        raise ScenarioError('Quadrature needs at least one interval.')

    lower, upper = spec.window(t)
    lags = np.linspace(float(lower), float(upper), intervals + 1)

    return lags, np.asarray(spec.alpha(lags), dtype=float)


def compute_h(
        spec: DelaySpec,
        t: float,
        quadrature_resolution: int
) -> float:
    """Composite trapezoid value of the kernel mass over the delay window.

    :param spec: Distributed delay specification.
    :type spec: DelaySpec
    :param t: Non-negative time.
    :type t: float
    :param quadrature_resolution: Number of trapezoid sub-intervals.
    :type quadrature_resolution: int
    :return: Positive normalization ``h(t)``.
    :rtype: float
    :raises ScenarioError: If the result is not positive.
    """
    lags, kernel = quadrature_nodes(spec, t, quadrature_resolution)
    mass = float(trapezoid(kernel, lags))

    if not mass > 0:
        raise ScenarioError(
            f'Kernel mass h({t}) = {mass!r} is not positive.'
        )

    return mass

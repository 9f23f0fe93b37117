"""Continuous scalar functions of time used for delays and delay kernels.

Every function is a frozen dataclass evaluated through ``__call__`` and
vectorized over numpy arrays, so the solver can probe whole quadrature
grids at once.
"""

from dataclasses import dataclass
from typing import Protocol

import numpy as np
from numpy.polynomial import polynomial

from hkdelay.exceptions import ScenarioError

__all__ = (
    'TimeFunction',
    'ConstantFunction',
    'SinusoidalFunction',
    'PiecewiseLinearFunction',
    'PolynomialFunction'
)


class TimeFunction(Protocol):
    def __call__(self, t: np.ndarray | float) -> np.ndarray:
        ...


@dataclass(frozen=True)
class ConstantFunction:
    value: float

    def __call__(self, t: np.ndarray | float) -> np.ndarray:
        return np.full(np.shape(t), float(self.value))


@dataclass(frozen=True)
class SinusoidalFunction:
    """``offset + amplitude * sin(frequency * t + phase)``."""

    offset: float
    amplitude: float
    frequency: float = 1.0
    phase: float = 0.0

    def __call__(self, t: np.ndarray | float) -> np.ndarray:
        return self.offset + self.amplitude * np.sin(
            self.frequency * np.asarray(t, dtype=float) + self.phase
        )


@dataclass(frozen=True)
class PiecewiseLinearFunction:
    """Linear interpolation of samples, constant beyond the last node."""

    nodes: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.nodes) != len(self.values) or not self.nodes:
            raise ScenarioError('Nodes and values must be non-empty and aligned.')
        if np.any(np.diff(self.nodes) <= 0):
            raise ScenarioError('Nodes must be strictly increasing.')

    def __call__(self, t: np.ndarray | float) -> np.ndarray:
        return np.interp(
            np.asarray(t, dtype=float),
            self.nodes,
            self.values
        )


@dataclass(frozen=True)
class PolynomialFunction:
    """Polynomial with coefficients in ascending powers."""

    coefficients: tuple[float, ...]

    def __call__(self, t: np.ndarray | float) -> np.ndarray:
        return polynomial.polyval(
            np.asarray(t, dtype=float),
            self.coefficients
        )

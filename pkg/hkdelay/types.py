from enum import Enum
from typing import Literal

__all__ = (
    'DelayKind',
    'InfluenceForm',
    'CheckStatus',
    'TransportMethod',
    'SweepParameter',
    'CheckStatusesLiteral'
)


class DelayKind(str, Enum):
    POINTWISE = 'POINTWISE'
    """Agents see each other at the single lagged time ``t - tau(t)``."""

    DISTRIBUTED = 'DISTRIBUTED'
    """Agents see a weighted average over ``[t - tau2(t), t - tau1(t)]``."""


class InfluenceForm(str, Enum):
    GENERAL = 'GENERAL'
    """Influence ``psi(x, y)`` of the current and the delayed opinion."""

    DIFFERENCE = 'DIFFERENCE'
    """Influence ``psi(|x - y|)`` of the distance between opinions."""


class CheckStatus(str, Enum):
    PASSED = 'PASSED'
    """Worst margin is above the negative slack."""

    FAILED = 'FAILED'
    """At least one sampled instance violates the inequality."""

    SKIPPED = 'SKIPPED'
    """Not enough data (short horizon, vanishing diameter)."""


class TransportMethod(str, Enum):
    AUTO = 'AUTO'
    """Sorted matching in one dimension, assignment otherwise."""

    SORTED = 'SORTED'
    """Monotone matching of sorted one-dimensional samples."""

    ASSIGNMENT = 'ASSIGNMENT'
    """Minimum-cost perfect matching over the distance matrix."""


class SweepParameter(str, Enum):
    TAU_BAR = 'tau_bar'
    """Delay bound, shared by the delay and the history domain."""

    HORIZON = 'horizon'
    """Simulation end time."""

    STEP = 'step'
    """Solver step."""

    INFLUENCE_VALUE = 'influence.value'
    """Value of a constant influence function."""


CheckStatusesLiteral = Literal[
    CheckStatus.PASSED,
    CheckStatus.FAILED,
    CheckStatus.SKIPPED
]

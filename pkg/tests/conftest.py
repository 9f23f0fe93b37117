import math
from pathlib import Path

import numpy as np
import pytest
from loguru import logger

from hkdelay.cli.scenario import parse_scenario
from hkdelay.model import ConstantProfile, InitialHistory
from hkdelay.solver import Trajectory

SCENARIOS = Path(__file__).resolve().parent.parent / 'scenarios'

POINTWISE_SUITE_SIZE = 20
DISTRIBUTED_SUITE_SIZE = 10


@pytest.fixture(autouse=True)
def _drop_log_sinks():
    yield
    logger.remove()


@pytest.fixture
def log_messages():
    """Collects loguru messages of level WARNING and above."""
    messages = []
    sink = logger.add(lambda message: messages.append(str(message)),
                      level='WARNING')
    yield messages
    logger.remove(sink)


@pytest.fixture
def golden():
    def load(name: str) -> str:
        return (SCENARIOS / f'{name}.json').read_text(encoding='utf-8')

    return load


def constant(value: float) -> dict:
    return {'variant': 'constant', 'value': value}


def two_agent_document(
        tau: float = 0.0,
        step: float = 1e-3,
        horizon: float = 1.0,
        tau_bar: float = 1.0,
        influence: float = 1.0,
        start: tuple[float, float] = (1.0, 0.0)
) -> dict:
    return {
        'agent_count': 2,
        'dimension': 1,
        'horizon': horizon,
        'tau_bar': tau_bar,
        'delay': {'kind': 'POINTWISE', 'tau': constant(tau)},
        'influence': {'family': 'constant', 'value': influence},
        'history': [
            {'variant': 'constant', 'value': [start[0]]},
            {'variant': 'constant', 'value': [start[1]]}
        ],
        'solver': {'step': step}
    }


@pytest.fixture
def two_agent():
    """Two scalar agents with constant histories and constant influence."""

    def build(**kwargs):
        return parse_scenario(two_agent_document(**kwargs))

    return build


@pytest.fixture
def static_trajectory():
    """Trajectory frozen at the given points for all times."""

    def build(
            points=None,
            tau_bar: float = 1.0,
            horizon: float = 1.0,
            profiles=None
    ) -> Trajectory:
        if profiles is None:
            profiles = tuple(ConstantProfile(tuple(p)) for p in points)

        history = InitialHistory(tau_bar=tau_bar, profiles=tuple(profiles))
        start = history.evaluate(0.0)[0]
        grid = np.linspace(0.0, horizon, 5)
        states = np.broadcast_to(start, (grid.size, *start.shape)).copy()

        return Trajectory(
            grid=grid,
            states=states,
            derivatives=np.zeros_like(states),
            history=history
        )

    return build


def _linear_histories(
        rng: np.random.Generator,
        agents: int,
        dimension: int
) -> list[dict]:
    return [
        {
            'variant': 'polynomial',
            'coefficients': [
                rng.uniform(0.0, 1.0, dimension).tolist(),
                rng.uniform(-0.5, 0.5, dimension).tolist()
            ]
        }
        for _ in range(agents)
    ]


def _influence(rng: np.random.Generator) -> dict:
    amplitude = float(rng.uniform(0.5, 1.5))

    if rng.random() < 0.5:
        return {'family': 'constant', 'value': amplitude}
    return {'family': 'rational', 'amplitude': amplitude}


def random_pointwise_document(rng: np.random.Generator) -> dict:
    """Up to 16 agents in up to 3 dimensions on five delay windows.

    Sinusoidal delays oscillate over ``[0, tau_bar]`` and touch zero inside
    the horizon.
    """
    tau_bar = 0.5
    horizon = 2.5

    if rng.random() < 0.5:
        tau = constant(float(rng.uniform(0.0, tau_bar)))
    else:
        frequency = float(rng.uniform(1.0, 3.0))
        touch = float(rng.uniform(0.2, horizon - 0.2))
        tau = {
            'variant': 'sinusoidal',
            'offset': tau_bar / 2,
            'amplitude': tau_bar / 2,
            'frequency': frequency,
            'phase': 1.5 * math.pi - frequency * touch
        }

    agents = int(rng.integers(3, 17))
    dimension = int(rng.integers(1, 4))

    return {
        'agent_count': agents,
        'dimension': dimension,
        'horizon': horizon,
        'tau_bar': tau_bar,
        'delay': {'kind': 'POINTWISE', 'tau': tau},
        'influence': _influence(rng),
        'history': _linear_histories(rng, agents, dimension),
        'solver': {'step': 0.025}
    }


def random_distributed_document(rng: np.random.Generator) -> dict:
    tau_bar = 0.5
    lower = float(rng.choice([0.0, rng.uniform(0.0, 0.15)]))
    upper = {
        'variant': 'sinusoidal',
        'offset': float(rng.uniform(lower + 0.15, 0.4)),
        'amplitude': 0.05,
        'frequency': float(rng.uniform(0.5, 2.0))
    }
    alpha = constant(float(rng.uniform(0.5, 2.0))) if rng.random() < 0.5 \
        else {'variant': 'polynomial', 'coefficients': [1.0, 1.0]}

    agents = int(rng.integers(3, 9))
    dimension = int(rng.integers(1, 3))

    return {
        'agent_count': agents,
        'dimension': dimension,
        'horizon': 2.5,
        'tau_bar': tau_bar,
        'delay': {
            'kind': 'DISTRIBUTED',
            'tau1': constant(lower),
            'tau2': upper,
            'alpha': alpha
        },
        'influence': _influence(rng),
        'history': _linear_histories(rng, agents, dimension),
        'solver': {'step': 0.025}
    }


@pytest.fixture(scope='session')
def pointwise_suite() -> list[dict]:
    rng = np.random.default_rng(20240611)
    return [
        random_pointwise_document(rng) for _ in range(POINTWISE_SUITE_SIZE)
    ]


@pytest.fixture(scope='session')
def distributed_suite() -> list[dict]:
    rng = np.random.default_rng(5150)
    return [
        random_distributed_document(rng)
        for _ in range(DISTRIBUTED_SUITE_SIZE)
    ]

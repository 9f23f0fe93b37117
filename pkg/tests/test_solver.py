import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy.optimize import brentq

from hkdelay.cli.scenario import parse_scenario
from hkdelay.exceptions import DomainError, ScenarioError
from hkdelay.settings import app_config
from hkdelay.solver import (
    TrajectoryBuilder,
    dense_eval,
    integrate,
    rhs_distributed,
    rhs_pointwise
)

from tests.conftest import two_agent_document


def scalar_document(positions, tau_bar: float = 1.0) -> dict:
    return {
        'agent_count': len(positions),
        'dimension': 1,
        'horizon': 1.0,
        'tau_bar': tau_bar,
        'delay': {'kind': 'POINTWISE',
                  'tau': {'variant': 'constant', 'value': 0.0}},
        'influence': {'family': 'constant', 'value': 1.0},
        'history': [{'variant': 'constant', 'value': [p]} for p in positions],
        'solver': {'step': 0.25}
    }


def distributed_document(positions, alpha: dict) -> dict:
    document = scalar_document(positions)
    document['delay'] = {
        'kind': 'DISTRIBUTED',
        'tau1': {'variant': 'constant', 'value': 0.0},
        'tau2': {'variant': 'constant', 'value': 1.0},
        'alpha': alpha
    }
    return document


def initial_velocity(document: dict, rhs) -> np.ndarray:
    scenario = parse_scenario(document)
    builder = TrajectoryBuilder(scenario.history, scenario.grid())

    return rhs(builder, scenario, 0.0, builder.states[0])


def constant_delay_reference(t: np.ndarray) -> np.ndarray:
    """``y = x_1 - x_2`` for unit delay, unit influence and ``y = 1`` on
    ``[-1, 0]``."""
    return np.where(
        t <= 1.0,
        2 * np.exp(-t) - 1,
        1 + (2 - 2 * math.e * t) * np.exp(-t)
    )


class TestRightHandSide:
    @pytest.mark.parametrize('positions, expected', [
        ([0.0, 1.0], [1.0, -1.0]),
        ([0.0, 1.0, 2.0], [1.5, 0.0, -1.5]),
        ([0.7, 0.7, 0.7], [0.0, 0.0, 0.0])
    ])
    def test_pointwise_hand_values(self, positions, expected):
        velocity = initial_velocity(scalar_document(positions), rhs_pointwise)

        assert_allclose(velocity[:, 0], expected, atol=1e-15)

    @pytest.mark.parametrize('alpha', [
        {'variant': 'constant', 'value': 1.0},
        {'variant': 'polynomial', 'coefficients': [0.5, 1.0]}
    ])
    def test_distributed_hand_values(self, alpha):
        y0 = 0.8
        velocity = initial_velocity(
            distributed_document([y0, 0.0], alpha),
            rhs_distributed
        )

        assert_allclose(velocity[:, 0], [-y0, y0], atol=1e-10)

    def test_distributed_equilibrium(self):
        velocity = initial_velocity(
            distributed_document([0.3, 0.3, 0.3],
                                 {'variant': 'constant', 'value': 2.0}),
            rhs_distributed
        )

        assert_array_equal(velocity, 0.0)


class TestIntegrate:
    def test_undelayed_closed_form(self, two_agent):
        traj = integrate(two_agent(tau=0.0, step=1e-3))
        gap = traj.states[-1, 0, 0] - traj.states[-1, 1, 0]

        assert gap == pytest.approx(math.exp(-2.0), rel=1e-6)

    def test_mid_step_dense_output(self, two_agent):
        traj = integrate(two_agent(tau=0.0, step=0.01))
        times = np.arange(100) * 0.01 + 0.005
        gap = traj.at(times)[:, 0, 0] - traj.at(times)[:, 1, 0]

        assert_allclose(gap, np.exp(-2 * times), rtol=1e-6)

    def test_constant_delay_closed_form(self, two_agent):
        traj = integrate(
            two_agent(tau=1.0, step=1e-3, horizon=2.0, start=(0.5, -0.5))
        )
        times = traj.grid
        gap = traj.states[:, 0, 0] - traj.states[:, 1, 0]

        first = times <= 1.0
        assert np.abs(gap[first] - constant_delay_reference(times[first])).max() \
            <= 1e-5
        assert_allclose(gap, constant_delay_reference(times), atol=1e-5)
        assert gap[1000] == pytest.approx(2 / math.e - 1, abs=1e-9)

    def test_sign_flip(self, two_agent):
        traj = integrate(
            two_agent(tau=1.0, step=1e-3, horizon=2.0, start=(0.5, -0.5))
        )

        def gap(t: float) -> float:
            return float(dense_eval(traj, 0, t)[0] - dense_eval(traj, 1, t)[0])

        assert abs(gap(math.log(2))) <= 1e-5
        assert brentq(gap, 0.5, 0.9) == pytest.approx(math.log(2), abs=1e-4)

    def test_convergence_order(self, two_agent):
        errors = []
        for step in (1e-2, 1e-3):
            traj = integrate(
                two_agent(tau=1.0, step=step, horizon=2.0, start=(0.5, -0.5))
            )
            gap = traj.states[:, 0, 0] - traj.states[:, 1, 0]
            errors.append(
                np.abs(gap - constant_delay_reference(traj.grid)).max()
            )

        assert math.log10(errors[0] / errors[1]) >= 2.5

    def test_consensus_is_exact(self, golden):
        traj = integrate(parse_scenario(golden('consensus')))

        assert_array_equal(
            traj.states,
            np.broadcast_to(traj.states[:1], traj.states.shape)
        )

    def test_permutation_equivariance(self, pointwise_suite):
        document = pointwise_suite[0]
        order = np.random.default_rng(3).permutation(document['agent_count'])
        permuted = dict(
            document,
            history=[document['history'][k] for k in order]
        )

        traj = integrate(parse_scenario(document))
        relabelled = integrate(parse_scenario(permuted))

        assert_allclose(relabelled.states, traj.states[:, order],
                        rtol=1e-12, atol=1e-14)

    def test_translation_invariance(self, golden):
        document = json.loads(golden('eight_agent_rational'))
        shift = np.array([3.0, -2.0])
        shifted_document = dict(document)
        shifted_document['history'] = [
            {'variant': 'constant',
             'value': (np.asarray(h['value']) + shift).tolist()}
            for h in shifted_document['history']
        ]

        traj = integrate(parse_scenario(document))
        shifted = integrate(parse_scenario(shifted_document))

        assert_allclose(shifted.states - shift, traj.states,
                        atol=1e-12 * traj.horizon)

    def test_distributed_refinement(self, golden):
        coarse = integrate(parse_scenario(golden('distributed')))

        fine_document = json.loads(golden('distributed'))
        fine_document['solver'] = {
            'step': 0.0025,
            'quadrature_points_per_step': 32
        }
        fine = integrate(parse_scenario(fine_document))

        scale = max(1.0, float(np.abs(fine.states).max()))
        assert np.abs(coarse.states[-1] - fine.states[-1]).max() \
            <= 1e-5 * scale

    def test_corrector_path_with_vanishing_delay(self, pointwise_suite):
        document = next(
            d for d in pointwise_suite
            if d['delay']['tau']['variant'] == 'sinusoidal'
        )
        traj = integrate(parse_scenario(document))

        assert np.all(np.isfinite(traj.states))
        assert traj.states.shape == (101, document['agent_count'],
                                     document['dimension'])

    def test_unconverged_corrector_is_reported(self, log_messages):
        document = two_agent_document(tau=0.01, step=0.2, horizon=2.0)
        document['solver']['corrector_iterations'] = 1
        traj = integrate(parse_scenario(document))

        assert np.all(np.isfinite(traj.states))
        assert any('Corrector did not converge' in m for m in log_messages)


class TestDenseOutput:
    def test_grid_nodes_are_exact(self, two_agent):
        traj = integrate(two_agent(tau=0.5, step=0.1))

        assert_array_equal(traj.at(traj.grid), traj.states)

    def test_history_region(self, two_agent):
        traj = integrate(two_agent(tau=0.5, step=0.1, start=(0.25, -1.0)))

        assert_array_equal(dense_eval(traj, 1, -0.5), [-1.0])

    def test_continuous_at_zero(self, golden):
        traj = integrate(parse_scenario(golden('distributed')))
        eps = 1e-9

        assert_allclose(traj.at(eps)[0], traj.at(-eps)[0], atol=1e-8)

    @pytest.mark.parametrize('t', [-1.5, 1.5])
    def test_out_of_range(self, two_agent, t):
        traj = integrate(two_agent(tau=0.0, step=0.1))

        with pytest.raises(DomainError):
            dense_eval(traj, 0, t)

    def test_invalid_agent(self, two_agent):
        traj = integrate(two_agent(tau=0.0, step=0.1))

        with pytest.raises(DomainError):
            dense_eval(traj, 2, 0.5)

    def test_states_are_read_only(self, two_agent):
        traj = integrate(two_agent(tau=0.0, step=0.1))

        with pytest.raises(ValueError):
            traj.states[0, 0, 0] = 5.0


class TestSolverParams:
    def test_step_cap(self, two_agent):
        with pytest.raises(ScenarioError, match=r'0\.25\*tau_bar'):
            two_agent(step=0.5)

    def test_step_divides_horizon(self, two_agent):
        with pytest.raises(ScenarioError, match='divide'):
            two_agent(step=0.003)

    def test_step_cap_follows_settings(self, two_agent, monkeypatch):
        monkeypatch.setattr(app_config.solver, 'step_fraction', 0.1)

        with pytest.raises(ScenarioError, match=r'0\.1\*tau_bar'):
            two_agent(step=0.2)

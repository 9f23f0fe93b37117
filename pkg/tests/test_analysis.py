import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from hkdelay.analysis import (
    build_certificate,
    certificate_constants,
    compute_M0,
    diameter_at,
    fit_decay_rate,
    verify_hull_confinement,
    verify_lemma_chain,
    window_diameters
)
from hkdelay.cli.scenario import parse_scenario
from hkdelay.exceptions import CertificateError, DomainError
from hkdelay.model import (
    ConstantProfile,
    InitialHistory,
    PolynomialProfile
)
from hkdelay.solver import integrate
from hkdelay.types import CheckStatus

CHECKS = (
    'hull_confinement',
    'window_bound',
    'state_bound',
    'window_contraction',
    'diameter_contraction',
    'geometric_decay',
    'exponential_decay',
    'projection_contraction',
    'rate_dominance'
)

LEMMA_CHAIN = CHECKS[1:7]


def mirrored_profiles():
    # x_1(s) = s, x_2(s) = -s
    return (
        PolynomialProfile(((0.0,), (1.0,))),
        PolynomialProfile(((0.0,), (-1.0,)))
    )


@pytest.fixture(scope='module')
def undelayed():
    scenario = parse_scenario({
        'agent_count': 2,
        'dimension': 1,
        'horizon': 4.0,
        'tau_bar': 1.0,
        'delay': {'kind': 'POINTWISE',
                  'tau': {'variant': 'constant', 'value': 0.0}},
        'influence': {'family': 'constant', 'value': 1.0},
        'history': [{'variant': 'constant', 'value': [1.0]},
                    {'variant': 'constant', 'value': [0.0]}],
        'solver': {'step': 0.01}
    })
    traj = integrate(scenario)

    return scenario, traj


class TestDiameters:
    @pytest.mark.parametrize('points, expected', [
        ([[0.4], [0.4], [0.4]], 0.0),
        ([[0.0], [1.0]], 1.0),
        ([[0.0], [1.0], [2.0]], 2.0),
        ([[0.0, 0.0], [3.0, 4.0], [1.0, 1.0]], 5.0)
    ])
    def test_diameter_at(self, static_trajectory, points, expected):
        traj = static_trajectory(points)

        assert diameter_at(traj, 0.5) == pytest.approx(expected)
        assert diameter_at(traj, -0.5) == pytest.approx(expected)

    def test_identical_histories(self, static_trajectory):
        wd = window_diameters(static_trajectory([[1.0], [1.0]]), 8)

        assert wd.values == (0.0, 0.0)

    def test_constant_histories(self, static_trajectory):
        wd = window_diameters(static_trajectory([[0.0], [1.0]]), 8)

        assert wd.D0 == 1.0

    def test_mirrored_histories(self, static_trajectory):
        traj = static_trajectory(profiles=mirrored_profiles())

        assert window_diameters(traj, 8).D0 == pytest.approx(2.0)

    def test_needs_eight_samples(self, static_trajectory):
        with pytest.raises(DomainError):
            window_diameters(static_trajectory([[0.0], [1.0]]), 4)

    def test_monotone_sequence(self, undelayed):
        _, traj = undelayed
        values = window_diameters(traj, 64).values

        assert len(values) == 5
        assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))

    def test_refinement_never_lowers(self, golden):
        traj = integrate(parse_scenario(golden('eight_agent_rational')))
        ladder = [window_diameters(traj, s).values for s in (8, 16, 32, 64)]

        for coarse, fine in zip(ladder, ladder[1:]):
            assert all(f >= c - 1e-12 for c, f in zip(coarse, fine))

    def test_partial_window_warns(self, two_agent, log_messages):
        traj = integrate(two_agent(step=0.1, horizon=1.5))
        wd = window_diameters(traj, 8)

        assert wd.last == 1
        assert any('partial window' in m for m in log_messages)

    @pytest.mark.parametrize('profiles, expected', [
        ((ConstantProfile((3.0, 4.0)),), 5.0),
        ((ConstantProfile((0.0,)), ConstantProfile((0.0,))), 0.0),
        (mirrored_profiles()[:1], 1.0)
    ])
    def test_M0(self, profiles, expected):
        history = InitialHistory(1.0, profiles)

        assert compute_M0(history, 16) == pytest.approx(expected)


class TestCertificateConstants:
    def test_unit_values(self):
        constants = certificate_constants(1.0, 1.0, 1.0)

        assert constants.C == pytest.approx(0.8646647168, abs=1e-9)
        assert constants.C_tilde == pytest.approx(0.9502129316, abs=1e-9)
        assert constants.gamma == pytest.approx(0.0170230603, abs=1e-9)

    @pytest.mark.parametrize('K, tau_bar', [(1.0, 1.0), (2.0, 0.3), (0.5, 4.0)])
    def test_constant_influence(self, K, tau_bar):
        constants = certificate_constants(K, K, tau_bar)
        expected = max(1 - math.exp(-2 * K * tau_bar), math.exp(-K * tau_bar))

        assert constants.C == pytest.approx(expected, rel=1e-14)
        assert constants.C <= constants.C_tilde < 1.0
        assert constants.gamma > 0.0

    def test_small_psi0_keeps_C_below_one(self):
        constants = certificate_constants(1.0, 1e-6, 1.0)

        assert 0.0 < constants.C < 1.0
        assert constants.gamma > 0.0

    def test_vanishing_gap_is_refused(self):
        with pytest.raises(CertificateError, match='leave'):
            certificate_constants(1.0, 1e-300, 1.0)

    @pytest.mark.parametrize('K, psi0', [(1.0, 0.0), (1.0, -1.0), (0.5, 1.0)])
    def test_inconsistent_bounds(self, K, psi0):
        with pytest.raises(CertificateError):
            certificate_constants(K, psi0, 1.0)

    def test_gamma_decreases_with_delay(self):
        gammas = [
            certificate_constants(1.0, 1.0, tau_bar).gamma
            for tau_bar in (0.25, 0.5, 1.0)
        ]

        assert gammas[0] > gammas[1] > gammas[2]
        assert gammas[0] == pytest.approx(0.2521, abs=1e-4)


class TestDecayRate:
    def test_undelayed_rate(self, undelayed):
        _, traj = undelayed

        assert fit_decay_rate(traj) == pytest.approx(2.0, abs=1e-4)

    def test_scaled_influence(self, two_agent):
        traj = integrate(two_agent(step=0.01, horizon=2.0, influence=2.0))

        assert fit_decay_rate(traj, 0.5, 1.5) == pytest.approx(4.0, abs=1e-4)

    def test_consensus_has_no_rate(self, golden):
        traj = integrate(parse_scenario(golden('consensus')))

        with pytest.raises(DomainError, match='vanishes'):
            fit_decay_rate(traj)

    def test_needs_two_points(self, undelayed):
        _, traj = undelayed

        with pytest.raises(DomainError):
            fit_decay_rate(traj, 1.0, 1.005)


class TestHullConfinement:
    def test_identical_histories(self, golden):
        traj = integrate(parse_scenario(golden('consensus')))

        margin = verify_hull_confinement(traj, 0.0)

        assert margin == pytest.approx(0.0, abs=1e-12)

    def test_undelayed(self, undelayed):
        _, traj = undelayed

        for anchor in (0.0, 1.0, 2.5):
            assert verify_hull_confinement(traj, anchor) >= -1e-6

    def test_sign_flip_stays_in_hull(self, two_agent):
        traj = integrate(
            two_agent(tau=1.0, step=1e-2, horizon=2.0, start=(0.5, -0.5))
        )

        assert verify_hull_confinement(traj, 0.0, directions=32) >= -1e-6
        assert verify_hull_confinement(traj, 1.0) >= -1e-6

    def test_anchor_range(self, undelayed):
        _, traj = undelayed

        with pytest.raises(DomainError):
            verify_hull_confinement(traj, traj.horizon)

    def test_direction_count(self, undelayed):
        _, traj = undelayed

        with pytest.raises(DomainError):
            verify_hull_confinement(traj, 0.0, directions=4)


class TestCertificate:
    def test_undelayed(self, undelayed):
        scenario, traj = undelayed
        cert = build_certificate(traj, scenario)

        assert [c.name for c in cert.checks] == list(CHECKS)
        assert cert.passed
        assert (cert.K, cert.psi0, cert.M0, cert.D0) == (1.0, 1.0, 1.0, 1.0)
        assert cert.gamma == pytest.approx(0.0170230603, abs=1e-9)
        assert cert.empirical_rate == pytest.approx(2.0, abs=1e-4)
        assert cert.slack == pytest.approx(2e-6)

    def test_closed_form_chain(self, undelayed):
        scenario, traj = undelayed
        cert = build_certificate(traj, scenario)

        # d(n) = e^{-2n} against C D_{n-2}; the tightest window is n = 4
        record = cert.check('diameter_contraction')
        assert record.status is CheckStatus.PASSED
        assert record.worst_margin == pytest.approx(
            cert.C * math.exp(-2) - math.exp(-8), abs=1e-6
        )

    def test_consensus(self, golden):
        scenario = parse_scenario(golden('consensus'))
        traj = integrate(scenario)
        cert = build_certificate(traj, scenario)

        assert cert.passed
        assert cert.D0 == 0.0
        assert cert.check('rate_dominance').status is CheckStatus.SKIPPED
        assert cert.empirical_rate is None
        for name in LEMMA_CHAIN:
            assert cert.check(name).worst_margin >= -1e-12

    def test_short_horizon_skips(self, two_agent):
        scenario = two_agent(step=0.05, horizon=2.0)
        cert = build_certificate(integrate(scenario), scenario)

        for name in ('diameter_contraction', 'geometric_decay'):
            record = cert.check(name)
            assert record.status is CheckStatus.SKIPPED
            assert record.note == 'insufficient horizon'
        assert cert.passed

    def test_explicit_psi0(self, undelayed):
        scenario, traj = undelayed
        cert = build_certificate(traj, scenario, psi0=0.5, jobs=2)

        assert cert.psi0 == 0.5
        assert cert.C == pytest.approx(
            certificate_constants(1.0, 0.5, 1.0).C
        )

    def test_refused_certificate(self, undelayed):
        scenario, traj = undelayed

        with pytest.raises(CertificateError):
            build_certificate(traj, scenario, psi0=2.0)

    def test_eight_agent_rational(self, golden):
        scenario = parse_scenario(golden('eight_agent_rational'))
        traj = integrate(scenario)
        cert = build_certificate(traj, scenario)

        assert cert.passed
        assert cert.psi0 == pytest.approx(1.0 / (1.0 + cert.D0 ** 2))

    def test_unknown_check(self, undelayed):
        scenario, traj = undelayed
        cert = build_certificate(traj, scenario)

        with pytest.raises(KeyError):
            cert.check('missing')


def _assert_certified(document: dict) -> None:
    scenario = parse_scenario(document)
    traj = integrate(scenario)
    cert = build_certificate(traj, scenario)
    wd = window_diameters(traj)

    failed = [c.name for c in cert.checks if not c.passed]
    assert not failed, failed

    records = verify_lemma_chain(traj, cert, wd)
    assert [r.name for r in records] == list(LEMMA_CHAIN)
    assert all(r.status is CheckStatus.PASSED for r in records)
    assert cert.check('hull_confinement').worst_margin >= -cert.slack

    assert cert.empirical_rate is not None
    assert cert.empirical_rate >= cert.gamma - 1e-6


@pytest.mark.parametrize('index', range(20))
def test_pointwise_suite(pointwise_suite, index):
    _assert_certified(pointwise_suite[index])


@pytest.mark.parametrize('index', range(10))
def test_distributed_suite(distributed_suite, index):
    _assert_certified(distributed_suite[index])


def test_hull_confinement_on_every_anchor(pointwise_suite):
    for document in pointwise_suite[:5]:
        traj = integrate(parse_scenario(document))
        slack = 1e-6 * (1.0 + window_diameters(traj).D0)
        margins = [
            verify_hull_confinement(traj, anchor, directions=16)
            for anchor in np.arange(5) * 0.5
        ]
        assert min(margins) >= -slack


def test_decay_bound_implies_consensus(undelayed):
    scenario, traj = undelayed
    cert = build_certificate(traj, scenario)
    bound = cert.D0 * np.exp(-cert.gamma * (traj.horizon - 2 * cert.tau_bar))

    assert diameter_at(traj, traj.horizon) <= bound
    assert_allclose(diameter_at(traj, traj.horizon), math.exp(-8), rtol=1e-6)

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from loguru import logger

from hkdelay.analysis.checks import (
    check_record,
    verify_hull_confinement,
    verify_lemma_chain,
    verify_projection_contraction,
    verify_rate_dominance
)
from hkdelay.analysis.diameters import (
    WindowDiameters,
    compute_M0,
    window_diameters
)
from hkdelay.exceptions import CertificateError
from hkdelay.model import Scenario, compute_psi0
from hkdelay.schemas import ConsensusCertificate
from hkdelay.settings import app_config
from hkdelay.solver import Trajectory
from hkdelay.types import InfluenceForm

__all__ = ('ProofConstants', 'certificate_constants', 'build_certificate')


@dataclass(frozen=True)
class ProofConstants:
    C: float
    C_tilde: float
    gamma: float


def certificate_constants(K: float, psi0: float, tau_bar: float) -> ProofConstants:
    """Contraction constants of the consensus estimate.

    ``C = max{1 - e^{-2K tau_bar}, 1 - (psi0/K)(1 - e^{-K tau_bar})}``,
    ``C_tilde = 1 - e^{-K tau_bar}(1 - C)`` and
    ``gamma = ln(1/C_tilde) / (3 tau_bar)``. The gaps ``1 - C`` and
    ``1 - C_tilde`` are carried explicitly so that ``gamma`` keeps full
    precision when ``C_tilde`` is close to one.

    :param K: Supremum of the influence function.
    :type K: float
    :param psi0: Lower bound of the influence function.
    :type psi0: float
    :param tau_bar: Delay bound.
    :type tau_bar: float
    :return: ``C``, ``C_tilde`` and ``gamma``.
    :rtype: ProofConstants
    :raises CertificateError: If the bounds are inconsistent or a constant
        leaves ``(0, 1)``.
    """
    if not psi0 > 0:
        raise CertificateError(f'psi0={psi0!r} must be positive.')
    if K < psi0:
        raise CertificateError(f'K={K!r} is below psi0={psi0!r}.')
    if not tau_bar > 0:
        raise CertificateError(f'tau_bar={tau_bar!r} must be positive.')

    decay = math.exp(-K * tau_bar)
    gap = min(
        math.exp(-2.0 * K * tau_bar),
        (psi0 / K) * -math.expm1(-K * tau_bar)
    )
    gap_tilde = decay * gap
    C = 1.0 - gap
    C_tilde = 1.0 - gap_tilde

    # Gaps below the double resolution round C or C_tilde up to exactly 1
    if not (0.0 < C < 1.0 and 0.0 < C_tilde < 1.0 and gap_tilde > 0.0):
        raise CertificateError(
            f'Contraction constants leave (0, 1) for K={K!r}, '
            f'psi0={psi0!r}, tau_bar={tau_bar!r}.'
        )

    return ProofConstants(
        C=C,
        C_tilde=C_tilde,
        gamma=-math.log1p(-gap_tilde) / (3.0 * tau_bar)
    )


def _lower_bound(
        scenario: Scenario,
        M0: float,
        wd: WindowDiameters
) -> float:
    if scenario.influence.form is InfluenceForm.DIFFERENCE:
        return compute_psi0(
            scenario.influence,
            M0,
            dimension=scenario.dimension,
            D0=wd.D0
        )

    return compute_psi0(scenario.influence, M0, dimension=scenario.dimension)


def build_certificate(
        traj: Trajectory,
        scenario: Scenario,
        *,
        samples_per_window: int | None = None,
        psi0: float | None = None,
        jobs: int | None = None
) -> ConsensusCertificate:
    """Computes every proof constant and runs every check on a trajectory.

    :param traj: Trajectory integrated from ``scenario``.
    :type traj: Trajectory
    :param scenario: Scenario of the trajectory.
    :type scenario: Scenario
    :param samples_per_window: Sub-intervals per window.
    :type samples_per_window: int | None
    :param psi0: Externally established lower bound of the influence; the
        grid search is skipped when given.
    :type psi0: float | None
    :param jobs: Worker threads for the checks.
    :type jobs: int | None
    :return: Certificate with one record per check.
    :rtype: ConsensusCertificate
    :raises CertificateError: If the influence bounds are inconsistent.
    """
    K = scenario.influence.K
    M0 = compute_M0(scenario.history)
    wd = window_diameters(traj, samples_per_window)
    psi0 = _lower_bound(scenario, M0, wd) if psi0 is None else psi0
    constants = certificate_constants(K, psi0, scenario.tau_bar)
    slack = app_config.analysis.check_slack * (1.0 + wd.D0)

    certificate = ConsensusCertificate(
        K=K,
        M0=M0,
        psi0=psi0,
        D0=wd.D0,
        C=constants.C,
        C_tilde=constants.C_tilde,
        gamma=constants.gamma,
        tau_bar=scenario.tau_bar,
        slack=slack
    )

    anchors = np.arange(len(wd)) * scenario.tau_bar
    anchors = anchors[anchors < traj.horizon]

    with ThreadPoolExecutor(max_workers=jobs or app_config.jobs) as executor:
        hull = [
            executor.submit(verify_hull_confinement, traj, float(anchor))
            for anchor in anchors
        ]
        chain = executor.submit(verify_lemma_chain, traj, certificate, wd)
        projection = executor.submit(
            verify_projection_contraction,
            traj,
            wd,
            K
        )
        rate = executor.submit(verify_rate_dominance, traj, constants.gamma)

        hull_margin = min(future.result() for future in hull)
        chain_records = chain.result()
        projection_margin = projection.result()
        rate_record, empirical_rate = rate.result()

    certificate.checks = [
        check_record('hull_confinement', hull_margin, slack),
        *chain_records,
        check_record('projection_contraction', projection_margin, slack),
        rate_record
    ]
    certificate.empirical_rate = empirical_rate

    logger.info(
        f'Certificate: K={K:.6g}, psi0={psi0:.6g}, D0={wd.D0:.6g}, '
        f'C={constants.C:.10f}, C_tilde={constants.C_tilde:.10f}, '
        f'gamma={constants.gamma:.10g}, '
        f'{"passed" if certificate.passed else "FAILED"}'
    )

    return certificate

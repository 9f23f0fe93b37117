import argparse

from loguru import logger

from hkdelay.analysis import build_certificate
from hkdelay.cli.scenario import parse_scenario, resolve_scenario
from hkdelay.exceptions import CertificateError, InfluenceError
from hkdelay.export import (
    write_certificate_report,
    write_decay_svg,
    write_metrics_csv,
    write_trajectory_csv
)
from hkdelay.schemas import RunConfig
from hkdelay.solver import integrate

__all__ = ('add_parser', 'command_certify')


def add_parser(
        sub: argparse._SubParsersAction,
        common: argparse.ArgumentParser
) -> None:
    sub.add_parser(
        'certify',
        parents=[common],
        help='Integrate a scenario, build its consensus certificate and run '
             'every check'
    )


def command_certify(config: RunConfig) -> int:
    """Writes ``certificate.json``, ``metrics.csv`` and optionally
    ``decay.svg``. A run that cannot be certified leaves ``trajectory.csv``.

    :param config: Run options.
    :type config: RunConfig
    :return: ``0`` when every executed check passed, ``1`` otherwise.
    :rtype: int
    :raises CertificateError: If the certificate constants are undefined.
    """
    path = resolve_scenario(config.scenario)
    scenario = parse_scenario(
        path.read_text(encoding='utf-8'),
        step=config.step,
        horizon=config.horizon
    )

    logger.info(f'Certifying {path}')
    traj = integrate(scenario)

    try:
        cert = build_certificate(traj, scenario, jobs=config.jobs)
    except (CertificateError, InfluenceError):
        partial = write_trajectory_csv(traj, config.out / 'trajectory.csv')
        logger.warning(f'No certificate for {path}; wrote {partial}')
        raise

    write_certificate_report(cert, config.out / 'certificate.json')
    write_metrics_csv(traj, cert, config.out / 'metrics.csv')
    if config.emit_plots:
        write_decay_svg(traj, cert, config.out / 'decay.svg')

    if cert.empirical_rate is not None:
        logger.info(
            f'Empirical rate {cert.empirical_rate:.6g} vs gamma '
            f'{cert.gamma:.6g}'
        )

    failed = [check.name for check in cert.checks if not check.passed]
    if failed:
        logger.error(f'Failed checks: {", ".join(failed)}')
        return 1

    return 0

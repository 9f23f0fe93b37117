import argparse
from concurrent.futures import ThreadPoolExecutor

from loguru import logger

from hkdelay.analysis import build_certificate
from hkdelay.cli.scenario import (
    load_document,
    parse_scenario,
    resolve_scenario,
    set_parameter
)
from hkdelay.exceptions import (
    CertificateError,
    InfluenceError,
    IntegrationError,
    ScenarioError
)
from hkdelay.export import write_sweep_csv
from hkdelay.schemas import RunConfig, SweepRow
from hkdelay.solver import integrate

__all__ = ('add_parser', 'command_sweep', 'sweep_point')


def add_parser(
        sub: argparse._SubParsersAction,
        common: argparse.ArgumentParser
) -> None:
    parser = sub.add_parser(
        'sweep',
        parents=[common],
        help='Certify the scenario over a grid of one scalar parameter'
    )
    parser.add_argument(
        '--parameter',
        default='tau_bar',
        help='tau_bar, horizon, step, influence.value or a dotted path into '
             'the scenario document'
    )
    parser.add_argument(
        '--values',
        type=float,
        nargs='+',
        required=True,
        help='Parameter values'
    )


def sweep_point(document: dict, config: RunConfig, value: float) -> SweepRow:
    """Certifies one grid point.

    Run failures become a failed row; invalid scenarios propagate.
    """
    scenario = parse_scenario(
        set_parameter(document, config.parameter, value),
        step=config.step,
        horizon=config.horizon
    )

    try:
        traj = integrate(scenario)
        cert = build_certificate(traj, scenario, jobs=1)
    except (CertificateError, IntegrationError, InfluenceError) as e:
        logger.error(f'{config.parameter}={value}: {e.detail}')
        return SweepRow(value=value, passed=False, error=e.detail)

    return SweepRow(
        value=value,
        C=cert.C,
        C_tilde=cert.C_tilde,
        gamma=cert.gamma,
        empirical_rate=cert.empirical_rate,
        passed=cert.passed
    )


def command_sweep(config: RunConfig) -> int:
    """Writes ``sweep.csv`` with one certificate summary per value.

    :param config: Run options.
    :type config: RunConfig
    :return: ``0`` when every point passed, ``1`` otherwise.
    :rtype: int
    :raises ScenarioError: If a grid point yields an invalid scenario.
    """
    if not config.values:
        raise ScenarioError('Sweep needs at least one value.')

    path = resolve_scenario(config.scenario)
    document = load_document(path.read_text(encoding='utf-8'))

    logger.info(
        f'Sweeping {config.parameter} over {len(config.values)} values of '
        f'{path}'
    )

    with ThreadPoolExecutor(max_workers=config.jobs) as executor:
        rows = list(
            executor.map(
                lambda value: sweep_point(document, config, value),
                config.values
            )
        )

    write_sweep_csv(rows, config.parameter, config.out / 'sweep.csv')

    failed = [row.value for row in rows if not row.passed]
    if failed:
        logger.error(f'Sweep points failed: {failed}')
        return 1

    return 0

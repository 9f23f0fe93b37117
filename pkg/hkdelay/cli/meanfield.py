import argparse

from loguru import logger

from hkdelay.cli.scenario import parse_scenario, resolve_scenario
from hkdelay.export import write_meanfield_csv, write_meanfield_report
from hkdelay.meanfield import n_independence_check
from hkdelay.schemas import MeanFieldConfig, RunConfig

__all__ = ('add_parser', 'command_meanfield')


def add_parser(
        sub: argparse._SubParsersAction,
        common: argparse.ArgumentParser
) -> None:
    parser = sub.add_parser(
        'meanfield',
        parents=[common],
        help='Certify an ensemble ladder drawn from the scenario histories'
    )
    parser.add_argument(
        '--ladder',
        type=int,
        nargs='+',
        default=[8, 32, 128],
        help='Strictly increasing agent counts'
    )
    parser.add_argument(
        '--tau-star',
        dest='tau_star',
        type=float,
        default=None,
        help='Lower delay bound, defaults to the smallest sampled delay'
    )
    parser.add_argument(
        '--lipschitz',
        dest='lipschitz_L',
        type=float,
        default=None,
        help='Declared Lipschitz constant of the influence (recorded only)'
    )


def command_meanfield(config: RunConfig) -> int:
    """Writes ``meanfield.csv`` and ``meanfield.json``.

    :param config: Run options.
    :type config: RunConfig
    :return: ``0`` when constants agree and every decay bound holds.
    :rtype: int
    """
    path = resolve_scenario(config.scenario)
    template = parse_scenario(
        path.read_text(encoding='utf-8'),
        step=config.step,
        horizon=config.horizon
    )

    tau_star = config.tau_star
    if tau_star is None:
        tau_star = template.delay.smallest_lag(template.probe_times())

    meanfield_config = MeanFieldConfig(
        N_ladder=config.ladder,
        tau_star=tau_star,
        lipschitz_L=config.lipschitz_L
    )

    logger.info(f'Mean-field ladder {config.ladder} from {path}')
    report = n_independence_check(meanfield_config, template, jobs=config.jobs)

    write_meanfield_csv(report, config.out / 'meanfield.csv')
    write_meanfield_report(report, config.out / 'meanfield.json')

    if not report.passed:
        logger.error('Mean-field check failed')
        return 1

    return 0

import argparse

from loguru import logger

from hkdelay.cli.scenario import parse_scenario, resolve_scenario
from hkdelay.export import write_trajectory_csv
from hkdelay.schemas import RunConfig
from hkdelay.solver import integrate

__all__ = ('add_parser', 'command_simulate')


def add_parser(
        sub: argparse._SubParsersAction,
        common: argparse.ArgumentParser
) -> None:
    sub.add_parser(
        'simulate',
        parents=[common],
        help='Integrate a scenario and write the trajectory CSV'
    )


def command_simulate(config: RunConfig) -> int:
    """Writes ``trajectory.csv``; always succeeds once integrated."""
    path = resolve_scenario(config.scenario)
    scenario = parse_scenario(
        path.read_text(encoding='utf-8'),
        step=config.step,
        horizon=config.horizon
    )

    logger.info(f'Simulating {path}')
    write_trajectory_csv(integrate(scenario), config.out / 'trajectory.csv')

    return 0

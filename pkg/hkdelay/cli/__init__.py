"""Command line entry point.

Exit status: ``0`` when every executed check passed, ``1`` when a check
failed or a run could not be certified, ``2`` on configuration errors.
"""

import argparse
import sys
from typing import Callable

from loguru import logger
from pydantic import ValidationError

from hkdelay.cli import certify, meanfield, simulate, sweep
from hkdelay.exceptions import (
    CertificateError,
    DomainError,
    InfluenceError,
    IntegrationError,
    ScenarioError
)
from hkdelay.schemas import RunConfig
from hkdelay.settings import app_config

__all__ = ('SUBCOMMANDS', 'build_parser', 'configure_logging', 'run', 'main')

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

SUBCOMMANDS: dict[str, Callable[[RunConfig], int]] = {
    'simulate': simulate.command_simulate,
    'certify': certify.command_certify,
    'sweep': sweep.command_sweep,
    'meanfield': meanfield.command_meanfield
}


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '--scenario',
        required=True,
        help='Scenario file, or the name of a golden scenario'
    )
    common.add_argument(
        '--out',
        default='out',
        help='Output directory (created when missing)'
    )
    common.add_argument('--step', type=float, default=None,
                        help='Override the solver step')
    common.add_argument('--horizon', type=float, default=None,
                        help='Override the horizon')
    common.add_argument('--jobs', type=int, default=app_config.jobs,
                        help='Concurrent workers')
    common.add_argument('--plots', dest='emit_plots', action='store_true',
                        help='Also write SVG plots')

    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='hkdelay',
        description='Simulate and certify consensus of delayed '
                    'Hegselmann-Krause opinion dynamics'
    )
    sub = parser.add_subparsers(dest='subcommand', required=True)
    common = _common_options()

    for module in (simulate, certify, sweep, meanfield):
        module.add_parser(sub, common)

    return parser


def configure_logging(level: str | None = None) -> None:
    """Replaces the default sink with a stderr sink at the configured level."""
    logger.remove()
    logger.add(sys.stderr, level=level or app_config.logging.level)


def run(subcommand: str, config: RunConfig) -> int:
    """Runs one subcommand and maps errors onto the exit status.

    :param subcommand: One of ``SUBCOMMANDS``.
    :type subcommand: str
    :param config: Run options.
    :type config: RunConfig
    :return: Exit status.
    :rtype: int
    """
    try:
        config.out.mkdir(parents=True, exist_ok=True)
        return SUBCOMMANDS[subcommand](config)
    except (ScenarioError, ValidationError) as e:
        logger.error(f'Configuration error: {e}')
        return EXIT_CONFIG
    except OSError as e:
        logger.error(f'Cannot write artifacts: {e}')
        return EXIT_CONFIG
    except (CertificateError, IntegrationError, InfluenceError,
            DomainError) as e:
        logger.error(f'{type(e).__name__}: {e.detail}')
        return EXIT_FAILED


def main(argv: list[str] | None = None) -> int:
    configure_logging()
    args = vars(build_parser().parse_args(argv))
    subcommand = args.pop('subcommand')

    try:
        config = RunConfig.model_validate(args)
    except ValidationError as e:
        logger.error(f'Configuration error: {e}')
        return EXIT_CONFIG

    return run(subcommand, config)

# main.py (project root)
"""
Material-network command line.

Uses a factory for the argument parser so tests can build and drive it.

Usage: python main.py {train,run,transfer,divide} [options]
"""
import argparse
import logging
import sys
from typing import List, Optional

from app.cli.commands import divide, run, train, transfer
from app.cli.exceptions import EXIT_CONFIG_ERROR, EXIT_FAILURE, EXIT_SUCCESS, get_exit_code_for_exception
from app.core.exceptions import ApplicationError
from app.core.logging import configure_logging

logger = logging.getLogger(__name__)


def create_cli() -> argparse.ArgumentParser:
    """
    Parser factory - builds the top-level parser with every subcommand.

    Returns:
        Parser whose parsed namespace carries a ``handler`` callable.
    """
    parser = argparse.ArgumentParser(
        prog="dmn",
        description="Train material networks and run failure analyses on a material point",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in (train, run, transfer, divide):
        command.add_parser(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = create_cli()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, which is reserved for non-convergence
        return EXIT_SUCCESS if exc.code in (0, None) else EXIT_CONFIG_ERROR

    configure_logging()
    try:
        return args.handler(args)
    except ApplicationError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return get_exit_code_for_exception(exc)
    except Exception:
        logger.exception("Unexpected error in %s", args.command)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

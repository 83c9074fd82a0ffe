"""
``transfer``: lift a planar parameter file to a spatial one.
"""
import argparse
import logging

from app.cli.exceptions import EXIT_SUCCESS
from app.data.repositories.parameter_repository import ParameterRepository
from app.services.network_service import transfer_2d_to_3d

logger = logging.getLogger(__name__)


def handle(args: argparse.Namespace) -> int:
    repository = ParameterRepository()
    params = transfer_2d_to_3d(repository.read_2d(args.input))
    repository.write(params, args.output)
    return EXIT_SUCCESS


def add_parser(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("transfer", help="Convert 2-D network parameters to 3-D")
    parser.add_argument("input", help="2-D parameter file")
    parser.add_argument("output", help="3-D parameter file to write")
    parser.set_defaults(handler=handle)
    return parser

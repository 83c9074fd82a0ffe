"""
``divide``: cell-division report of a network for a macro-cell.
"""
import argparse
import logging
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from app.cli.exceptions import EXIT_SUCCESS
from app.data.repositories.output_repository import OutputRepository
from app.data.repositories.parameter_repository import ParameterRepository
from app.models.geometry import CellGeometry, ScaleTensor
from app.models.network import NetworkParams
from app.services.scale_geometry import cell_volume, propagate_scales, semi_axes

logger = logging.getLogger(__name__)


def cell_report(params: NetworkParams, macro: ScaleTensor) -> Dict[str, Any]:
    """Per active cell: ellipsoid semi-axes and axes (global frame), volume, orientation, weight and phase."""
    cells: List[Dict[str, Any]] = []
    geometries: List[CellGeometry] = propagate_scales(params, macro)
    for geometry in geometries:
        lengths, axes = semi_axes(geometry.scale)
        cells.append({
            **geometry.to_dict(),
            "volume": cell_volume(geometry.scale),
            "semi_axes": lengths.tolist(),
            "axes": axes.tolist(),
        })
    total = float(sum(cell["volume"] for cell in cells))
    logger.info("Divided macro-cell into %d cells, total volume %.6g", len(cells), total)
    return {
        "macro_scale_tensor": macro.to_list(),
        "macro_volume": cell_volume(macro),
        "total_volume": total,
        "cells": cells,
    }


def scale_from_args(args: argparse.Namespace) -> ScaleTensor:
    if args.lengths is not None:
        return ScaleTensor.from_lengths(*args.lengths)
    if args.matrix is not None:
        return ScaleTensor(np.array(args.matrix, dtype=float).reshape(3, 3))
    return ScaleTensor.sphere(args.h)


def handle(args: argparse.Namespace) -> int:
    params = ParameterRepository().read_3d(args.parameters)
    report = cell_report(params, scale_from_args(args))
    OutputRepository(Path(args.out_dir)).write_json(args.output, report)
    return EXIT_SUCCESS


def add_parser(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("divide", help="Write the cell-division report of a network")
    parser.add_argument("parameters", help="3-D parameter file")
    scale = parser.add_mutually_exclusive_group()
    scale.add_argument("--h", type=float, default=2.0, help="Sphere diameter (mm); default gives A = I")
    scale.add_argument("--lengths", type=float, nargs=3, metavar=("HX", "HY", "HZ"))
    scale.add_argument("--matrix", type=float, nargs=9, metavar="A", help="Row-major 3x3 scale tensor")
    parser.add_argument("--out-dir", default="out", help="Output directory")
    parser.add_argument("--output", default="cells.json", help="Report file name")
    parser.set_defaults(handler=handle)
    return parser

"""
``run``: load path on a single material point with crack enrichment.
"""
import argparse
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from app.cli.exceptions import EXIT_SUCCESS, get_exit_code_for_exception
from app.core.exceptions import ApplicationError, ConfigurationError
from app.data.repositories.config_repository import ConfigRepository, parse_value
from app.data.repositories.output_repository import OutputRepository, stress_strain_row
from app.data.repositories.parameter_repository import ParameterRepository
from app.models.run_config import RunConfig
from app.services.solver_service import FailureSolver

logger = logging.getLogger(__name__)


@dataclass
class RunOutcome:
    steps: int
    cracks: int
    rows: List[Dict[str, Any]]


def resolve_path(config_path: Path, value: str) -> Path:
    """Paths inside a config are relative to the config file."""
    path = Path(value)
    return path if path.is_absolute() else config_path.parent / path


def execute(config: RunConfig, config_path: Path, out_dir: Path) -> RunOutcome:
    """
    Run every load segment and write the outputs.

    Outputs are written even when a step fails, covering all committed steps;
    the failure is re-raised afterwards.
    """
    params = ParameterRepository().read_3d(resolve_path(config_path, config.parameter_file))
    solver = FailureSolver(
        params,
        config.build_materials(),
        config.build_cohesive(),
        config.scale.build(),
        config.solver,
    )
    state = solver.initial_state()
    rows = [stress_strain_row(0, 0.0, state.macro_strain, state.macro_stress, solver.diagnostics(state), 0)]
    output = OutputRepository(out_dir)

    try:
        for number, segment in enumerate(config.load_path, start=1):
            start_strain, start_stress = state.macro_strain.copy(), state.macro_stress.copy()
            logger.info("Segment %d: %d steps over %.6g ms", number, segment.steps, segment.duration)
            for step in range(1, segment.steps + 1):
                result = solver.solve_step_adaptive(state, segment.step_bc(start_strain, start_stress, step))
                rows.append(stress_strain_row(
                    state.step, state.time, state.macro_strain, state.macro_stress,
                    result.diagnostics, state.crack_count,
                ))
                logger.info(
                    "Step %d done: %d iterations, %d sub-steps, %d cracks",
                    state.step, result.iterations, result.substeps, state.crack_count,
                )
    finally:
        output.write_stress_strain(config.output.stress_strain, rows)
        output.write_cracks(config.output.cracks, state.cracks)
        report = [
            {**cell.to_dict(), **geometry.to_dict()}
            for cell, geometry in zip(solver.diagnostics(state).cells, (c.geometry for c in solver.cells))
        ]
        output.write_json(config.output.cells, {"step": state.step, "time": state.time, "cells": report})

    return RunOutcome(steps=state.step, cracks=state.crack_count, rows=rows)


def run_point(config_path: str, overrides: Dict[str, Any], out_dir: str) -> int:
    """Load, run and map failures to an exit code; top-level so sweep workers can pickle it."""
    try:
        config = ConfigRepository().load(RunConfig, config_path, overrides)
        outcome = execute(config, Path(config_path), Path(out_dir))
    except ApplicationError as exc:
        logger.error("Run in %s failed: %s", out_dir, exc)
        return get_exit_code_for_exception(exc)
    logger.info("Run in %s finished: %d steps, %d cracks", out_dir, outcome.steps, outcome.cracks)
    return EXIT_SUCCESS


def parse_sweep(text: str) -> Tuple[str, List[str]]:
    """``key=v1,v2,...`` -> (key, [v1, v2, ...])."""
    key, sep, values = text.partition("=")
    items = [v for v in values.split(",") if v]
    if not sep or not key or not items:
        raise ConfigurationError(f"Sweep '{text}' must look like key=v1,v2,...")
    return key, items


def sweep(config_path: str, key: str, values: List[str], out_dir: Path, workers: Optional[int] = None) -> int:
    """One process per sweep point, output in ``<out_dir>/<key>=<value>/``."""
    points = [(value, str(out_dir / f"{key}={value}")) for value in values]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_point, config_path, {key: parse_value(value)}, path) for value, path in points]
        codes = [future.result() for future in futures]
    for (value, _), code in zip(points, codes):
        logger.info("Sweep point %s=%s exited with %d", key, value, code)
    return next((code for code in codes if code != EXIT_SUCCESS), EXIT_SUCCESS)


def handle(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    if args.sweep:
        key, values = parse_sweep(args.sweep)
        return sweep(args.config, key, values, out_dir, args.workers)
    config = ConfigRepository().load(RunConfig, args.config)
    outcome = execute(config, Path(args.config), out_dir)
    logger.info("Run finished: %d steps, %d cracks", outcome.steps, outcome.cracks)
    return EXIT_SUCCESS


def add_parser(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("run", help="Run a load path on one material point")
    parser.add_argument("--config", required=True, help="Run config (JSON)")
    parser.add_argument("--out-dir", default="out", help="Output directory")
    parser.add_argument("--sweep", help="Parametric sweep, key=v1,v2,... with a dotted config key")
    parser.add_argument("--workers", type=int, default=None, help="Sweep worker processes")
    parser.set_defaults(handler=handle)
    return parser

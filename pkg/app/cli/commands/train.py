"""
``train``: fit network parameters to oracle-labelled elastic data.
"""
import argparse
import logging
from pathlib import Path
from typing import Any, Dict, Tuple

import numpy as np

from app.cli.commands.run import resolve_path
from app.cli.exceptions import EXIT_SUCCESS
from app.core.exceptions import ConfigurationError
from app.data.repositories.config_repository import ConfigRepository, apply_override
from app.data.repositories.output_repository import OutputRepository
from app.data.repositories.parameter_repository import ParameterRepository
from app.external.oracles import LabelOracle, LaminateOracle, ReferenceNetworkOracle
from app.models.network import NetworkParams
from app.models.run_config import TrainConfig
from app.models.training import TrainingReport
from app.services.training_service import TrainingService, initial_params

logger = logging.getLogger(__name__)

# CLI flag -> dotted config key
FLAG_OVERRIDES = {
    "depth": "depth",
    "n_train": "training.n_train",
    "n_test": "training.n_test",
    "epochs": "training.epochs",
    "seed": "training.seed",
    "oracle": "oracle.kind",
    "output": "output.parameters",
}


def build_oracle(config: TrainConfig, config_path: Path) -> LabelOracle:
    if config.oracle.kind == "laminate":
        return LaminateOracle(config.oracle.fraction, config.oracle.angles)
    params = ParameterRepository().read_3d(resolve_path(config_path, config.oracle.parameter_file))
    return ReferenceNetworkOracle(params)


def build_init(config: TrainConfig, config_path: Path, rng: np.random.Generator) -> NetworkParams:
    if config.init_file is None:
        return initial_params(config.depth, rng, config.phases)
    params = ParameterRepository().read_3d(resolve_path(config_path, config.init_file))
    if params.depth != config.depth:
        raise ConfigurationError(f"Warm-start file has depth {params.depth}, config asks for {config.depth}")
    logger.info("Warm start from %s", config.init_file)
    return params


def execute(config: TrainConfig, config_path: Path, out_dir: Path) -> Tuple[NetworkParams, TrainingReport]:
    """Generate data, train, and write the parameter file and the epoch report."""
    rng = np.random.default_rng(config.training.seed)
    service = TrainingService(config.training)
    train_set, test_set = service.generate(build_oracle(config, config_path), rng)
    init = build_init(config, config_path, rng)
    params, report = service.train(train_set, test_set, init)

    output = OutputRepository(out_dir)
    ParameterRepository().write(params, output.path(config.output.parameters))
    output.write_training_report(config.output.report, report)
    logger.info("Training finished: final test J = %.6e", report.final_test_cost)
    return params, report


def handle(args: argparse.Namespace) -> int:
    repository = ConfigRepository()
    if args.config:
        data: Dict[str, Any] = repository.read_raw(args.config)
        config_path = Path(args.config)
    else:
        data = {"oracle": {"kind": "laminate"}}
        config_path = Path.cwd() / "train.json"
    for flag, key in FLAG_OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            apply_override(data, key, value)
    config = repository.validate(TrainConfig, data, str(args.config or "<flags>"))
    execute(config, config_path, Path(args.out_dir))
    return EXIT_SUCCESS


def add_parser(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("train", help="Train a material network")
    parser.add_argument("--config", help="Train config (JSON); flags override its values")
    parser.add_argument("--out-dir", default="out", help="Output directory")
    parser.add_argument("--depth", type=int)
    parser.add_argument("--n-train", dest="n_train", type=int)
    parser.add_argument("--n-test", dest="n_test", type=int)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--oracle", choices=["laminate", "network"])
    parser.add_argument("--output", help="Parameter file name inside the output directory")
    parser.set_defaults(handler=handle)
    return parser

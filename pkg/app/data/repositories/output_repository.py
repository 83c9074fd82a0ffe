import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from app.core.tensors import mandel_to_tensor
from app.models.solver import CrackSurface, Diagnostics
from app.models.training import TrainingReport

logger = logging.getLogger(__name__)

TENSOR_COMPONENTS = ("11", "22", "33", "23", "13", "12")
STRESS_STRAIN_COLUMNS = (
    ["step", "time"]
    + [f"e{c}" for c in TENSOR_COMPONENTS]
    + [f"s{c}" for c in TENSOR_COMPONENTS]
    + ["Pi", "ep_avg", "M"]
)
CRACK_COLUMNS = ["step", "cell", "n1", "n2", "n3", "critical_traction", "reciprocal_length", "area"]
TRAINING_COLUMNS = ["epoch", "train_J", "test_J", "active_nodes"]


def format_number(value: Any) -> str:
    """Integers verbatim, floats with 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def stress_strain_row(
    step: int,
    time: float,
    strain: np.ndarray,
    stress: np.ndarray,
    diagnostics: Optional[Diagnostics],
    crack_count: int,
) -> Dict[str, Any]:
    """CSV row of a committed state; Mandel strain and stress written as tensor components."""
    row: Dict[str, Any] = {"step": step, "time": time}
    for name, value in zip(TENSOR_COMPONENTS, mandel_to_tensor(strain)):
        row[f"e{name}"] = value
    for name, value in zip(TENSOR_COMPONENTS, mandel_to_tensor(stress)):
        row[f"s{name}"] = value
    row["Pi"] = diagnostics.released_energy if diagnostics else 0.0
    row["ep_avg"] = diagnostics.average_plastic_strain if diagnostics else 0.0
    row["M"] = crack_count
    return row


def crack_row(crack: CrackSurface) -> Dict[str, Any]:
    record = crack.to_dict()
    n1, n2, n3 = record.pop("normal")
    record.update({"n1": n1, "n2": n2, "n3": n3})
    return record


class OutputRepository:
    """Writes run and training artifacts below one output directory."""

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def write_csv(self, name: str, columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> Path:
        target = self.path(name)
        target.parent.mkdir(parents=True, exist_ok=True)
        with target.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(columns)
            count = 0
            for row in rows:
                writer.writerow([format_number(row[column]) for column in columns])
                count += 1
        logger.info("Wrote %d rows to %s", count, target)
        return target

    def write_json(self, name: str, payload: Any) -> Path:
        target = self.path(name)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        logger.info("Wrote %s", target)
        return target

    def write_stress_strain(self, name: str, rows: List[Dict[str, Any]]) -> Path:
        return self.write_csv(name, STRESS_STRAIN_COLUMNS, rows)

    def write_cracks(self, name: str, cracks: Sequence[CrackSurface]) -> Path:
        return self.write_csv(name, CRACK_COLUMNS, (crack_row(crack) for crack in cracks))

    def write_training_report(self, name: str, report: TrainingReport) -> Path:
        return self.write_csv(name, TRAINING_COLUMNS, (record.to_row() for record in report.records))

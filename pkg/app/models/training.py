"""
Offline training models: sampling ranges, training configuration, samples
and the per-epoch report.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator


class PhaseRanges(BaseModel):
    """Log-uniform bounds of the nine orthotropic constants of one phase."""
    moduli: Tuple[float, float] = (1.0, 10.0)
    shear: Tuple[float, float] = (0.4, 4.0)
    poisson: Tuple[float, float] = (0.1, 0.4)

    @field_validator("moduli", "shear", "poisson")
    def check_bounds(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        low, high = v
        if low <= 0.0 or high < low:
            raise ValueError("Bounds must satisfy 0 < low <= high")
        return v


def _default_ranges() -> List[PhaseRanges]:
    return [
        PhaseRanges(),
        PhaseRanges(moduli=(0.01, 1.0), shear=(0.004, 0.4), poisson=(0.1, 0.4)),
    ]


class TrainingConfig(BaseModel):
    """Sampling sizes and SGD settings of one training run."""
    n_train: int = Field(400, gt=0)
    n_test: int = Field(100, gt=0)
    epochs: int = Field(100, ge=0)
    batch_size: int = Field(20, gt=0)
    learning_rate: float = Field(0.05, gt=0)
    decay_factor: float = Field(0.5, gt=0, le=1)
    decay_every: int = Field(50, gt=0)
    compression_threshold: float = Field(1e-3, ge=0)
    divergence_window: int = Field(10, gt=0)
    seed: int = 0
    ranges: List[PhaseRanges] = Field(default_factory=_default_ranges)

    @model_validator(mode='after')
    def check_ranges(self) -> 'TrainingConfig':
        if len(self.ranges) != 2:
            raise ValueError('Exactly two phase ranges are required')
        return self

    def learning_rate_at(self, epoch: int) -> float:
        """Step decay: multiplied by ``decay_factor`` every ``decay_every`` epochs."""
        return self.learning_rate * self.decay_factor ** (epoch // self.decay_every)


@dataclass
class TrainingSample:
    """Phase stiffness pair and the homogenized label."""
    phase_stiffness: Tuple[np.ndarray, np.ndarray]
    label: np.ndarray


@dataclass
class EpochRecord:
    epoch: int
    train_cost: float
    test_cost: float
    active_nodes: int

    def to_row(self) -> Dict[str, Any]:
        return {
            "epoch": self.epoch,
            "train_J": self.train_cost,
            "test_J": self.test_cost,
            "active_nodes": self.active_nodes,
        }


@dataclass
class TrainingReport:
    records: List[EpochRecord] = field(default_factory=list)
    pruned_leaves: int = 0
    cost_before_compression: float = 0.0
    cost_after_compression: float = 0.0

    @property
    def final_test_cost(self) -> float:
        return self.records[-1].test_cost if self.records else float("nan")

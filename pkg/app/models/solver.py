"""
State and result models of the implicit failure solver.
"""
import copy
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from app.core.exceptions import ValidationError
from app.models.cohesive import CohesiveParams, CohesiveState
from app.models.geometry import CellGeometry
from app.models.materials import Material, PlasticState


@dataclass
class CrackCandidate:
    """Plane of maximum effective traction found by the Mohr search."""
    normal: np.ndarray
    effective_traction: float
    angle: float


@dataclass
class MicroCell:
    """Bottom-layer degree of freedom: geometry, phase material, optional cohesive law."""
    geometry: CellGeometry
    material: Material
    cohesive: Optional[CohesiveParams] = None

    @property
    def index(self) -> int:
        return self.geometry.index

    @property
    def phase(self) -> int:
        return self.geometry.phase

    @property
    def weight(self) -> float:
        return self.geometry.weight


@dataclass
class CrackSurface:
    """Cohesive layer record: cell, v_c, normal, area and internal state."""
    cell: int
    reciprocal_length: float
    normal: np.ndarray
    global_normal: np.ndarray
    area: float
    params: CohesiveParams
    state: CohesiveState
    step: int = 0

    def copy(self) -> "CrackSurface":
        duplicate = copy.copy(self)
        duplicate.state = self.state.copy()
        return duplicate

    def to_dict(self) -> Dict[str, Any]:
        return {
            "step": self.step,
            "cell": self.cell,
            "normal": self.global_normal.tolist(),
            "critical_traction": self.params.critical_traction,
            "reciprocal_length": self.reciprocal_length,
            "area": self.area,
        }


@dataclass
class NetworkState:
    """Committed internal variables of one material point."""
    base_states: Dict[int, PlasticState]
    cracks: List[CrackSurface] = field(default_factory=list)
    macro_strain: np.ndarray = field(default_factory=lambda: np.zeros(6))
    macro_stress: np.ndarray = field(default_factory=lambda: np.zeros(6))
    time: float = 0.0
    step: int = 0
    # warm start: converged increments of the last step and its time increment
    last_base_increments: Dict[int, np.ndarray] = field(default_factory=dict)
    last_opening_increments: List[np.ndarray] = field(default_factory=list)
    last_dt: float = 0.0

    @property
    def crack_count(self) -> int:
        return len(self.cracks)

    def cracks_in(self, cell: int) -> List[CrackSurface]:
        return [crack for crack in self.cracks if crack.cell == cell]

    def copy(self) -> "NetworkState":
        return copy.deepcopy(self)

    def restore(self, snapshot: "NetworkState") -> None:
        """Overwrite every field with a deep copy of ``snapshot``."""
        self.__dict__.update(copy.deepcopy(snapshot).__dict__)


@dataclass
class MacroBC:
    """
    Mixed macroscale control for one step.

    Strain-controlled components carry the Mandel strain increment; the
    others carry the Mandel stress to reach at the end of the step.
    """
    strain_controlled: Sequence[bool]
    values: np.ndarray
    dt: float

    def __post_init__(self):
        self.strain_controlled = np.asarray(self.strain_controlled, dtype=bool).reshape(-1)
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.strain_controlled.size != 6 or self.values.size != 6:
            raise ValidationError("Boundary conditions need six components")
        if not self.dt > 0.0:
            raise ValidationError("Time increment must be positive")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("Boundary values must be finite")

    @classmethod
    def strain(cls, d_strain, dt: float) -> "MacroBC":
        return cls(np.ones(6, dtype=bool), np.asarray(d_strain, dtype=float), dt)

    @property
    def stress_controlled(self) -> np.ndarray:
        return ~self.strain_controlled

    def substep(self, start_stress: np.ndarray, index: int, count: int) -> "MacroBC":
        """Boundary condition of sub-step ``index`` (one-based) out of ``count``."""
        values = np.where(
            self.strain_controlled,
            self.values / count,
            start_stress + index / count * (self.values - start_stress),
        )
        return MacroBC(self.strain_controlled.copy(), values, self.dt / count)


@dataclass
class CellDiagnostics:
    """Treemap-ready summary of one micro-cell."""
    index: int
    phase: int
    weight: float
    effective_plastic_strain: float
    released_energy: float
    crack_count: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "phase": self.phase,
            "weight": self.weight,
            "effective_plastic_strain": self.effective_plastic_strain,
            "released_energy_per_area": self.released_energy,
            "crack_count": self.crack_count,
        }


@dataclass
class Diagnostics:
    released_energy: float
    average_plastic_strain: float
    cells: List[CellDiagnostics]


@dataclass
class StepResult:
    """Outcome of one macroscale step."""
    d_stress: np.ndarray
    stiffness: np.ndarray
    converged: bool
    strain: np.ndarray = field(default_factory=lambda: np.zeros(6))
    stress: np.ndarray = field(default_factory=lambda: np.zeros(6))
    iterations: int = 0
    refinements: int = 0
    substeps: int = 1
    activated: List[CrackSurface] = field(default_factory=list)
    work_residual: float = 0.0
    diagnostics: Optional[Diagnostics] = None
    # (index, count, converged) of every attempted sub-step
    schedule: List[tuple] = field(default_factory=list)

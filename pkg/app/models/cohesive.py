"""
Cohesive-layer parameters and internal state.
"""
from dataclasses import dataclass, field, replace
from typing import Any, Dict

import numpy as np

from app.core.exceptions import ValidationError


@dataclass(frozen=True)
class CohesiveParams:
    """Effective traction-separation law of one cohesive layer (GPa, mm, ms)."""
    critical_traction: float
    fracture_energy: float
    mode_ratio: float = 1.0
    relaxation_time: float = 1e-4
    penalty_stiffness: float = 1e8
    floor_stiffness: float = 1e-4
    hardening_stiffness: float = 0.0

    def __post_init__(self):
        if self.critical_traction <= 0.0 or self.fracture_energy <= 0.0:
            raise ValidationError("Critical traction and fracture energy must be positive")
        if self.relaxation_time <= 0.0:
            raise ValidationError("Relaxation time must be positive")
        if self.mode_ratio <= 0.0:
            raise ValidationError("Mode ratio beta must be positive")
        if self.floor_stiffness < 0.0 or self.hardening_stiffness < 0.0:
            raise ValidationError("Floor and hardening stiffness must be non-negative")
        if self.failure_opening <= self.critical_opening:
            raise ValidationError("Full-separation opening must exceed the critical opening")

    @property
    def critical_opening(self) -> float:
        """d_c = t_c / K."""
        return self.critical_traction / self.penalty_stiffness

    @property
    def failure_opening(self) -> float:
        """d_f = 2 G_c / t_c."""
        return 2.0 * self.fracture_energy / self.critical_traction

    def for_layer(self, reference_modulus: float, reciprocal_length: float,
                  traction_scale: float = 1.0) -> "CohesiveParams":
        """Layer-specific copy with K_h = E^base v_c and an optionally perturbed t_c."""
        return replace(
            self,
            critical_traction=self.critical_traction * traction_scale,
            hardening_stiffness=reference_modulus * reciprocal_length,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "critical_traction": self.critical_traction,
            "fracture_energy": self.fracture_energy,
            "mode_ratio": self.mode_ratio,
            "relaxation_time": self.relaxation_time,
        }


@dataclass
class CohesiveState:
    """Internal variables q_c of a cohesive layer; vectors in the cell frame."""
    normal: np.ndarray
    opening: np.ndarray = field(default_factory=lambda: np.zeros(3))
    traction: np.ndarray = field(default_factory=lambda: np.zeros(3))
    max_opening: float = 0.0
    max_traction: float = 0.0
    viscous_damage: float = 1.0

    def __post_init__(self):
        self.normal = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-8:
            raise ValidationError("Crack normal must be a unit vector")
        if not 0.0 <= self.viscous_damage <= 1.0:
            raise ValidationError("Viscous damage must lie in [0, 1]")

    @classmethod
    def initial(cls, params: CohesiveParams, normal: np.ndarray, stress_traction: np.ndarray) -> "CohesiveState":
        """Intact layer opened so that K d balances the current traction."""
        traction = np.asarray(stress_traction, dtype=float)
        return cls(
            normal=normal,
            opening=traction / params.penalty_stiffness,
            traction=traction.copy(),
            max_opening=params.critical_opening,
            max_traction=params.critical_traction,
            viscous_damage=1.0,
        )

    def copy(self) -> "CohesiveState":
        return CohesiveState(
            self.normal.copy(),
            self.opening.copy(),
            self.traction.copy(),
            self.max_opening,
            self.max_traction,
            self.viscous_damage,
        )


@dataclass
class TractionResult:
    """Layer traction, compliance G̃ and residual δd̃ for a trial opening."""
    traction: np.ndarray
    compliance: np.ndarray
    residual: np.ndarray
    state: CohesiveState
    effective_opening: float
    effective_traction: float
    loading: bool

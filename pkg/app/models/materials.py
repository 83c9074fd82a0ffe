"""
Phase material models: linear elasticity and small-strain von Mises plasticity.

Units are GPa / mm / ms throughout.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Tuple, Union

import numpy as np

from app.core.exceptions import ValidationError
from app.core.tensors import (
    is_positive_definite,
    isotropic_stiffness,
    orthotropic_compliance,
)


@dataclass(frozen=True)
class PiecewiseLinearHardening:
    """
    Yield stress ``intercept + slope * ε_p`` on consecutive ε_p segments.

    Each segment is ``(start, intercept, slope)``; the first starts at 0.
    """
    segments: Tuple[Tuple[float, float, float], ...]

    def __post_init__(self):
        segments = tuple(tuple(float(v) for v in segment) for segment in self.segments)
        if not segments or segments[0][0] != 0.0:
            raise ValidationError("First hardening segment must start at zero plastic strain")
        for (start, intercept, slope), following in zip(segments, segments[1:]):
            if following[0] <= start:
                raise ValidationError("Hardening breakpoints must increase")
            left = intercept + slope * following[0]
            right = following[1] + following[2] * following[0]
            if abs(left - right) > 1e-10 * max(1.0, abs(left)):
                raise ValidationError(f"Hardening law is discontinuous at ε_p = {following[0]}")
        for start, intercept, slope in segments:
            if slope <= 0.0:
                raise ValidationError("Hardening slopes must be positive")
            if intercept + slope * start <= 0.0:
                raise ValidationError("Yield stress must be positive")
        object.__setattr__(self, "segments", segments)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "piecewise", "segments": [list(s) for s in self.segments]}


@dataclass(frozen=True)
class ExponentialHardening:
    """σ^Y = (σ^y - σ^u) exp(-a ε_p) + E^h ε_p + σ^u."""
    initial_yield: float
    ultimate: float
    hardening_modulus: float
    rate: float

    def __post_init__(self):
        if self.initial_yield <= 0.0:
            raise ValidationError("Initial yield stress must be positive")
        if self.ultimate < self.initial_yield:
            raise ValidationError("Saturation stress must not be below the initial yield stress")
        if self.hardening_modulus <= 0.0 or self.rate < 0.0:
            raise ValidationError("Hardening modulus must be positive and rate non-negative")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "exponential",
            "initial_yield": self.initial_yield,
            "ultimate": self.ultimate,
            "hardening_modulus": self.hardening_modulus,
            "rate": self.rate,
        }


HardeningLaw = Union[PiecewiseLinearHardening, ExponentialHardening]


@dataclass(frozen=True, eq=False)
class ElasticMaterial:
    """Linear elastic phase with a Mandel stiffness in its material frame."""
    name: str
    stiffness: np.ndarray
    reference_modulus: float

    def __post_init__(self):
        stiffness = np.array(self.stiffness, dtype=float)
        if stiffness.shape != (6, 6) or not is_positive_definite(stiffness):
            raise ValidationError(f"Stiffness of '{self.name}' must be a 6x6 SPD matrix")
        stiffness.setflags(write=False)
        object.__setattr__(self, "stiffness", stiffness)

    @classmethod
    def isotropic(cls, name: str, youngs_modulus: float, poisson_ratio: float) -> "ElasticMaterial":
        if youngs_modulus <= 0.0 or not -1.0 < poisson_ratio < 0.5:
            raise ValidationError(f"Invalid isotropic constants for '{name}'")
        return cls(name, isotropic_stiffness(youngs_modulus, poisson_ratio), youngs_modulus)

    @classmethod
    def orthotropic(cls, name: str, e1, e2, e3, nu12, nu13, nu23, g12, g13, g23) -> "ElasticMaterial":
        compliance = orthotropic_compliance(e1, e2, e3, nu12, nu13, nu23, g12, g13, g23)
        if not is_positive_definite(compliance):
            raise ValidationError(f"Orthotropic constants of '{name}' are not admissible")
        return cls(name, np.linalg.inv(compliance), min(e1, e2, e3))

    @cached_property
    def compliance(self) -> np.ndarray:
        return np.linalg.inv(self.stiffness)


@dataclass(frozen=True, eq=False)
class VonMisesMaterial:
    """Isotropic elastic-plastic phase with J2 yield and isotropic hardening."""
    name: str
    youngs_modulus: float
    poisson_ratio: float
    hardening: HardeningLaw

    def __post_init__(self):
        if self.youngs_modulus <= 0.0 or not -1.0 < self.poisson_ratio < 0.5:
            raise ValidationError(f"Invalid elastic constants for '{self.name}'")

    @property
    def reference_modulus(self) -> float:
        return self.youngs_modulus

    @property
    def shear_modulus(self) -> float:
        return self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))

    @property
    def bulk_modulus(self) -> float:
        return self.youngs_modulus / (3.0 * (1.0 - 2.0 * self.poisson_ratio))

    @cached_property
    def stiffness(self) -> np.ndarray:
        return isotropic_stiffness(self.youngs_modulus, self.poisson_ratio)

    @cached_property
    def compliance(self) -> np.ndarray:
        return np.linalg.inv(self.stiffness)


Material = Union[ElasticMaterial, VonMisesMaterial]


@dataclass
class PlasticState:
    """Committed base-material state of one cell (cell frame)."""
    stress: np.ndarray = field(default_factory=lambda: np.zeros(6))
    strain: np.ndarray = field(default_factory=lambda: np.zeros(6))
    plastic_strain: np.ndarray = field(default_factory=lambda: np.zeros(6))
    effective_plastic_strain: float = 0.0

    def copy(self) -> "PlasticState":
        return PlasticState(
            self.stress.copy(),
            self.strain.copy(),
            self.plastic_strain.copy(),
            self.effective_plastic_strain,
        )


@dataclass
class BaseResponse:
    """Result of a base-material update for a trial strain increment."""
    stress: np.ndarray
    compliance: np.ndarray
    residual: np.ndarray
    state: PlasticState
    plastic: bool = False


# Constants of the particle-reinforced and unidirectional studies
PRESETS: Dict[str, Material] = {
    "particle": ElasticMaterial.isotropic("particle", 500.0, 0.3),
    "matrix": VonMisesMaterial(
        "matrix", 100.0, 0.3,
        PiecewiseLinearHardening(((0.0, 0.1, 10.0), (0.01, 0.18, 2.0))),
    ),
    "fiber": ElasticMaterial.orthotropic(
        "fiber",
        e1=245.0, e2=19.8, e3=19.8,
        # minor ratios nu21 = nu31 = 0.023 give nu12 = nu21 * E1 / E2
        nu12=0.023 * 245.0 / 19.8, nu13=0.023 * 245.0 / 19.8, nu23=0.67,
        g12=29.2, g13=29.2, g23=5.9,
    ),
    "epoxy": VonMisesMaterial(
        "epoxy", 3.8, 0.387,
        ExponentialHardening(initial_yield=0.025, ultimate=0.115, hardening_modulus=0.01, rate=140.0),
    ),
}

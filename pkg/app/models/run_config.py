"""
Configuration documents of the ``run`` and ``train`` commands.

Strain and stress values are tensor components named by their index pair
(``"11"``, ``"23"``, ...); conversion to Mandel vectors happens here.
"""
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.config import SolverSettings
from app.core.exceptions import ValidationError
from app.core.tensors import SQRT2
from app.models.cohesive import CohesiveParams
from app.models.geometry import ScaleTensor
from app.models.materials import (
    PRESETS,
    ElasticMaterial,
    ExponentialHardening,
    HardeningLaw,
    Material,
    PiecewiseLinearHardening,
    VonMisesMaterial,
)
from app.models.solver import MacroBC
from app.models.training import TrainingConfig

SCHEMA_VERSION = 1

# tensor component -> (Mandel index, Mandel factor)
COMPONENTS: Dict[str, Tuple[int, float]] = {
    "11": (0, 1.0),
    "22": (1, 1.0),
    "33": (2, 1.0),
    "23": (3, SQRT2),
    "13": (4, SQRT2),
    "12": (5, SQRT2),
}

ORTHOTROPIC_CONSTANTS = ("e1", "e2", "e3", "nu12", "nu13", "nu23", "g12", "g13", "g23")


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid")


class HardeningConfig(_Document):
    kind: Literal["piecewise", "exponential"]
    segments: Optional[List[Tuple[float, float, float]]] = None
    initial_yield: Optional[float] = None
    ultimate: Optional[float] = None
    hardening_modulus: Optional[float] = None
    rate: Optional[float] = None

    @model_validator(mode="after")
    def check_fields(self) -> "HardeningConfig":
        if self.kind == "piecewise" and not self.segments:
            raise ValueError("piecewise hardening needs 'segments'")
        if self.kind == "exponential":
            missing = [name for name in ("initial_yield", "ultimate", "hardening_modulus", "rate")
                       if getattr(self, name) is None]
            if missing:
                raise ValueError(f"exponential hardening is missing {missing}")
        return self

    def build(self) -> HardeningLaw:
        if self.kind == "piecewise":
            return PiecewiseLinearHardening(tuple(tuple(s) for s in self.segments))
        return ExponentialHardening(self.initial_yield, self.ultimate, self.hardening_modulus, self.rate)


class MaterialConfig(_Document):
    """A phase material, either a named preset or explicit constants."""
    preset: Optional[str] = None
    kind: Optional[Literal["elastic_isotropic", "elastic_orthotropic", "von_mises"]] = None
    name: Optional[str] = None
    youngs_modulus: Optional[float] = None
    poisson_ratio: Optional[float] = None
    constants: Optional[Dict[str, float]] = None
    hardening: Optional[HardeningConfig] = None

    @model_validator(mode="after")
    def check_source(self) -> "MaterialConfig":
        if (self.preset is None) == (self.kind is None):
            raise ValueError("give exactly one of 'preset' or 'kind'")
        if self.preset is not None and self.preset not in PRESETS:
            raise ValueError(f"unknown preset '{self.preset}', expected one of {sorted(PRESETS)}")
        if self.kind in ("elastic_isotropic", "von_mises"):
            if self.youngs_modulus is None or self.poisson_ratio is None:
                raise ValueError(f"'{self.kind}' needs youngs_modulus and poisson_ratio")
        if self.kind == "von_mises" and self.hardening is None:
            raise ValueError("'von_mises' needs a hardening block")
        if self.kind == "elastic_orthotropic":
            if not self.constants or set(self.constants) != set(ORTHOTROPIC_CONSTANTS):
                raise ValueError(f"'elastic_orthotropic' needs constants {list(ORTHOTROPIC_CONSTANTS)}")
        return self

    def build(self, phase: int) -> Material:
        if self.preset is not None:
            return PRESETS[self.preset]
        name = self.name or f"phase-{phase}"
        if self.kind == "elastic_isotropic":
            return ElasticMaterial.isotropic(name, self.youngs_modulus, self.poisson_ratio)
        if self.kind == "elastic_orthotropic":
            return ElasticMaterial.orthotropic(name, **self.constants)
        return VonMisesMaterial(name, self.youngs_modulus, self.poisson_ratio, self.hardening.build())


class CohesiveConfig(_Document):
    """Cohesive constants t_c (GPa), G_c (GPa mm), β and τ (ms)."""
    t_c: float = Field(gt=0)
    G_c: float = Field(gt=0)
    beta: float = Field(1.0, gt=0)
    tau: float = Field(1e-4, gt=0)

    def build(self) -> CohesiveParams:
        return CohesiveParams(self.t_c, self.G_c, mode_ratio=self.beta, relaxation_time=self.tau)


class ScaleConfig(_Document):
    """Macro-cell scale tensor: sphere diameter, mesh lengths or full matrix (mm, mm^-2)."""
    h: Optional[float] = None
    lengths: Optional[Tuple[float, float, float]] = None
    matrix: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def check_single_source(self) -> "ScaleConfig":
        given = [v for v in (self.h, self.lengths, self.matrix) if v is not None]
        if len(given) != 1:
            raise ValueError("give exactly one of 'h', 'lengths' or 'matrix'")
        return self

    def build(self) -> ScaleTensor:
        if self.h is not None:
            return ScaleTensor.sphere(self.h)
        if self.lengths is not None:
            return ScaleTensor.from_lengths(*self.lengths)
        return ScaleTensor(np.array(self.matrix, dtype=float))


class LoadSegment(_Document):
    """
    Linear ramp to end values over ``steps`` equal steps of ``duration / steps``.

    Listed strain components are strain-controlled; every other component is
    stress-controlled, toward its listed stress or toward zero.
    """
    steps: int = Field(gt=0)
    duration: float = Field(gt=0)
    strain: Dict[str, float] = Field(default_factory=dict)
    stress: Dict[str, float] = Field(default_factory=dict)

    @field_validator("strain", "stress")
    def check_components(cls, v: Dict[str, float]) -> Dict[str, float]:
        unknown = set(v) - set(COMPONENTS)
        if unknown:
            raise ValueError(f"unknown components {sorted(unknown)}")
        return v

    @model_validator(mode="after")
    def check_overlap(self) -> "LoadSegment":
        overlap = set(self.strain) & set(self.stress)
        if overlap:
            raise ValueError(f"components {sorted(overlap)} are both strain- and stress-controlled")
        return self

    @property
    def dt(self) -> float:
        return self.duration / self.steps

    def strain_controlled(self) -> np.ndarray:
        mask = np.zeros(6, dtype=bool)
        for name in self.strain:
            mask[COMPONENTS[name][0]] = True
        return mask

    def targets(self) -> Tuple[np.ndarray, np.ndarray]:
        """End-of-segment Mandel strain and stress targets."""
        strain, stress = np.zeros(6), np.zeros(6)
        for name, value in self.strain.items():
            index, factor = COMPONENTS[name]
            strain[index] = factor * value
        for name, value in self.stress.items():
            index, factor = COMPONENTS[name]
            stress[index] = factor * value
        return strain, stress

    def step_bc(self, start_strain: np.ndarray, start_stress: np.ndarray, step: int) -> MacroBC:
        """Boundary condition of step ``step`` (one-based) from the segment's start state."""
        if not 1 <= step <= self.steps:
            raise ValidationError(f"Step {step} outside segment of {self.steps} steps")
        mask = self.strain_controlled()
        strain_target, stress_target = self.targets()
        values = np.where(
            mask,
            (strain_target - start_strain) / self.steps,
            start_stress + step / self.steps * (stress_target - start_stress),
        )
        return MacroBC(mask, values, self.dt)


class RunOutputConfig(_Document):
    stress_strain: str = "stress_strain.csv"
    cracks: str = "cracks.csv"
    cells: str = "cells.json"


class RunConfig(_Document):
    """Single-material-point failure analysis."""
    schema_version: Literal[1] = SCHEMA_VERSION
    parameter_file: str
    materials: Dict[int, MaterialConfig]
    cohesive: Dict[int, CohesiveConfig] = Field(default_factory=dict)
    scale: ScaleConfig
    load_path: List[LoadSegment] = Field(min_length=1)
    solver: SolverSettings = Field(default_factory=SolverSettings)
    output: RunOutputConfig = Field(default_factory=RunOutputConfig)

    def build_materials(self) -> Dict[int, Material]:
        return {phase: material.build(phase) for phase, material in self.materials.items()}

    def build_cohesive(self) -> Dict[int, CohesiveParams]:
        return {phase: law.build() for phase, law in self.cohesive.items()}


class OracleConfig(_Document):
    """Label source: exact laminate or a frozen network read from file."""
    kind: Literal["laminate", "network"]
    fraction: float = Field(0.5, gt=0, lt=1)
    angles: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    parameter_file: Optional[str] = None

    @model_validator(mode="after")
    def check_parameter_file(self) -> "OracleConfig":
        if self.kind == "network" and not self.parameter_file:
            raise ValueError("network oracle needs 'parameter_file'")
        return self


class TrainOutputConfig(_Document):
    parameters: str = "parameters.json"
    report: str = "training.csv"


class TrainConfig(_Document):
    """Offline training of a network of depth ``depth``."""
    schema_version: Literal[1] = SCHEMA_VERSION
    depth: int = Field(ge=1)
    oracle: OracleConfig
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    init_file: Optional[str] = None
    phases: Optional[List[int]] = None
    output: TrainOutputConfig = Field(default_factory=TrainOutputConfig)

    @model_validator(mode="after")
    def check_phases(self) -> "TrainConfig":
        if self.phases is not None:
            if len(self.phases) != 2 ** (self.depth - 1):
                raise ValueError("'phases' needs one entry per bottom-layer node")
            if not set(self.phases) <= {1, 2}:
                raise ValueError("training phases must be 1 or 2")
        return self

"""
Ellipsoidal cell models used by the cell-division scheme.
"""
from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

from app.core.exceptions import ValidationError


@dataclass(frozen=True)
class ScaleTensor:
    """SPD 3x3 matrix A (mm^-2) of the ellipsoid x^T A x = 1."""
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        if matrix.shape != (3, 3) or not np.all(np.isfinite(matrix)):
            raise ValidationError("Scale tensor must be a finite 3x3 matrix")
        scale = max(1.0, float(np.max(np.abs(matrix))))
        if np.max(np.abs(matrix - matrix.T)) > 1e-10 * scale:
            raise ValidationError("Scale tensor must be symmetric")
        matrix = 0.5 * (matrix + matrix.T)
        try:
            np.linalg.cholesky(matrix)
        except np.linalg.LinAlgError:
            raise ValidationError("Scale tensor must be positive definite")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def sphere(cls, diameter: float) -> "ScaleTensor":
        """A = (4/h^2) I for a sphere of diameter h."""
        if diameter <= 0:
            raise ValidationError("Sphere diameter must be positive")
        return cls(4.0 / diameter ** 2 * np.eye(3))

    @classmethod
    def from_lengths(cls, hx: float, hy: float, hz: float) -> "ScaleTensor":
        """Diagonal tensor diag(4/hx^2, 4/hy^2, 4/hz^2) from mesh lengths."""
        lengths = np.array([hx, hy, hz], dtype=float)
        if np.any(lengths <= 0):
            raise ValidationError("Cell lengths must be positive")
        return cls(np.diag(4.0 / lengths ** 2))

    def rotated(self, rotation: np.ndarray) -> "ScaleTensor":
        """Components in a frame with ``v_new = rotation @ v``."""
        return ScaleTensor(rotation @ self.matrix @ rotation.T)

    def to_list(self):
        return self.matrix.tolist()


@dataclass(frozen=True)
class CellDivisionResult:
    """Children of one division and their shared cutting area (mm^2)."""
    first: ScaleTensor
    second: ScaleTensor
    area: float


@dataclass
class CellGeometry:
    """Scale tensor and orientation of one active bottom-layer cell."""
    index: int
    phase: int
    weight: float
    scale: ScaleTensor
    # cell-frame components = orientation @ global components
    orientation: np.ndarray = field(default_factory=lambda: np.eye(3))

    @property
    def local_scale(self) -> ScaleTensor:
        """Scale tensor expressed in the cell's own frame."""
        return self.scale.rotated(self.orientation)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "phase": self.phase,
            "weight": self.weight,
            "scale_tensor": self.scale.to_list(),
            "orientation": np.asarray(self.orientation).tolist(),
        }

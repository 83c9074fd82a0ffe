"""
Dense tensor kernels in orthonormal Mandel notation.

Symmetric second-order tensors are stored as 6-vectors ordered
``[11, 22, 33, 23, 13, 12]`` with shear entries scaled by sqrt(2), so the
plain dot product is the double contraction and 6x6 rotations are orthogonal.
"""
import math
from typing import Tuple

import numpy as np

from app.core.exceptions import ValidationError

SQRT2 = math.sqrt(2.0)

# Index pairs of the Mandel components
MANDEL_PAIRS = ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1))


def _mandel_basis() -> np.ndarray:
    basis = np.zeros((6, 3, 3))
    for index, (i, j) in enumerate(MANDEL_PAIRS):
        if i == j:
            basis[index, i, i] = 1.0
        else:
            basis[index, i, j] = basis[index, j, i] = 1.0 / SQRT2
    return basis


# Orthonormal basis tensors E_I with sigma = sum_I s_I E_I
MANDEL_BASIS = _mandel_basis()
MANDEL_BASIS.setflags(write=False)

IDENTITY_VEC = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
IDENTITY_VEC.setflags(write=False)


def to_mandel(matrix: np.ndarray) -> np.ndarray:
    """Convert a symmetric 3x3 tensor to its Mandel 6-vector."""
    matrix = np.asarray(matrix, dtype=float)
    return np.einsum('Iab,ab->I', MANDEL_BASIS, matrix)


def from_mandel(vector: np.ndarray) -> np.ndarray:
    """Convert a Mandel 6-vector to the symmetric 3x3 tensor."""
    vector = np.asarray(vector, dtype=float)
    return np.einsum('I,Iab->ab', vector, MANDEL_BASIS)


def tensor_to_mandel(components) -> np.ndarray:
    """Scale tensor components ``[11, 22, 33, 23, 13, 12]`` into Mandel form."""
    values = np.asarray(components, dtype=float).copy()
    values[3:] *= SQRT2
    return values


def mandel_to_tensor(vector) -> np.ndarray:
    """Inverse of :func:`tensor_to_mandel`."""
    values = np.asarray(vector, dtype=float).copy()
    values[3:] /= SQRT2
    return values


def sym_dyad_operator(normal: np.ndarray) -> np.ndarray:
    """
    6x3 operator B with ``B @ d = mandel(sym(d ⊗ n))``.

    Its transpose maps a Mandel stress to the traction vector on the plane
    with normal ``n``.
    """
    normal = np.asarray(normal, dtype=float)
    # sym(e_k ⊗ n) for each column k
    columns = [0.5 * (np.outer(e, normal) + np.outer(normal, e)) for e in np.eye(3)]
    return np.stack([to_mandel(column) for column in columns], axis=1)


def _axis_rotation(axis: int, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    i, j = [k for k in range(3) if k != axis]
    rot = np.eye(3)
    rot[i, i] = c
    rot[i, j] = -s
    rot[j, i] = s
    rot[j, j] = c
    return rot


def _axis_rotation_derivative(axis: int, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    i, j = [k for k in range(3) if k != axis]
    drot = np.zeros((3, 3))
    drot[i, i] = -s
    drot[i, j] = -c
    drot[j, i] = c
    drot[j, j] = -s
    return drot


def euler_matrix(angles) -> np.ndarray:
    """
    3x3 rotation ``R = R_x(alpha) @ R_y(beta) @ R_z(gamma)``.

    ``R`` maps parent-frame components to local-frame components.
    """
    alpha, beta, gamma = (float(a) for a in angles)
    if not all(math.isfinite(a) for a in (alpha, beta, gamma)):
        raise ValidationError("Euler angles must be finite")
    return _axis_rotation(0, alpha) @ _axis_rotation(1, beta) @ _axis_rotation(2, gamma)


def euler_matrix_derivatives(angles) -> np.ndarray:
    """Partial derivatives dR/d(alpha, beta, gamma), shape (3, 3, 3)."""
    alpha, beta, gamma = (float(a) for a in angles)
    rx, ry, rz = _axis_rotation(0, alpha), _axis_rotation(1, beta), _axis_rotation(2, gamma)
    return np.stack([
        _axis_rotation_derivative(0, alpha) @ ry @ rz,
        rx @ _axis_rotation_derivative(1, beta) @ rz,
        rx @ ry @ _axis_rotation_derivative(2, gamma),
    ])


def rotation6_from_matrix(rotation: np.ndarray) -> np.ndarray:
    """
    Mandel 6x6 rotation ``Q`` of a 3x3 rotation ``R``.

    For a symmetric tensor s, ``Q @ mandel(s) == mandel(R s R^T)``; stiffness
    matrices transform as ``Q C Q^T``.
    """
    return np.einsum('Iab,ac,Jcd,bd->IJ', MANDEL_BASIS, rotation, MANDEL_BASIS, rotation)


def rotation6_derivative(rotation: np.ndarray, d_rotation: np.ndarray) -> np.ndarray:
    """Directional derivative of :func:`rotation6_from_matrix` along ``d_rotation``."""
    return 2.0 * np.einsum('Iab,ac,Jcd,bd->IJ', MANDEL_BASIS, d_rotation, MANDEL_BASIS, rotation)


def rotation6(angles) -> np.ndarray:
    """Mandel 6x6 rotation from Euler angles (alpha, beta, gamma)."""
    return rotation6_from_matrix(euler_matrix(angles))


def rotate_stiffness(stiffness: np.ndarray, q6: np.ndarray) -> np.ndarray:
    """Return ``Q C Q^T``."""
    return q6 @ stiffness @ q6.T


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def eig_sym3(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigen-decomposition of a symmetric 3x3 matrix.

    Args:
        matrix: Symmetric 3x3 array.

    Returns:
        Tuple of eigenvalues sorted descending and a matrix whose columns
        are the matching unit eigenvectors. Each eigenvector is signed so
        that its largest-magnitude component is positive.

    Raises:
        ValidationError: If the input is not symmetric within 1e-12.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (3, 3):
        raise ValidationError(f"Expected a 3x3 matrix, got shape {matrix.shape}")
    scale = max(1.0, float(np.max(np.abs(matrix))))
    if np.max(np.abs(matrix - matrix.T)) > 1e-12 * scale:
        raise ValidationError("Matrix is not symmetric")

    values, vectors = np.linalg.eigh(symmetrize(matrix))
    order = np.argsort(values)[::-1]
    values = values[order]
    vectors = vectors[:, order]
    for k in range(3):
        column = vectors[:, k]
        if column[np.argmax(np.abs(column))] < 0.0:
            vectors[:, k] = -column
    return values, vectors


def isotropic_stiffness(youngs_modulus: float, poisson_ratio: float) -> np.ndarray:
    """Isotropic Mandel stiffness from Young's modulus and Poisson's ratio."""
    bulk = youngs_modulus / (3.0 * (1.0 - 2.0 * poisson_ratio))
    shear = youngs_modulus / (2.0 * (1.0 + poisson_ratio))
    return 3.0 * bulk * volumetric_projector() + 2.0 * shear * deviatoric_projector()


def orthotropic_compliance(e1, e2, e3, nu12, nu13, nu23, g12, g13, g23) -> np.ndarray:
    """Mandel compliance from the nine orthotropic engineering constants."""
    compliance = np.zeros((6, 6))
    compliance[0, 0] = 1.0 / e1
    compliance[1, 1] = 1.0 / e2
    compliance[2, 2] = 1.0 / e3
    compliance[0, 1] = compliance[1, 0] = -nu12 / e1
    compliance[0, 2] = compliance[2, 0] = -nu13 / e1
    compliance[1, 2] = compliance[2, 1] = -nu23 / e2
    compliance[3, 3] = 1.0 / (2.0 * g23)
    compliance[4, 4] = 1.0 / (2.0 * g13)
    compliance[5, 5] = 1.0 / (2.0 * g12)
    return compliance


def volumetric_projector() -> np.ndarray:
    return np.outer(IDENTITY_VEC, IDENTITY_VEC) / 3.0


def deviatoric_projector() -> np.ndarray:
    return np.eye(6) - volumetric_projector()


def is_positive_definite(matrix: np.ndarray) -> bool:
    """Cholesky screen of the symmetric part."""
    try:
        np.linalg.cholesky(symmetrize(matrix))
    except np.linalg.LinAlgError:
        return False
    return True

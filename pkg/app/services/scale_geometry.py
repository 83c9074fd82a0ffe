"""
Ellipsoidal cell division: back-propagation of the macroscale scale tensor
to the bottom-layer cells of a material network.
"""
import logging
import math
from typing import List

import numpy as np

from app.core.exceptions import ValidationError
from app.core.tensors import eig_sym3
from app.models.geometry import CellDivisionResult, CellGeometry, ScaleTensor
from app.models.network import NetworkParams, child_fraction

logger = logging.getLogger(__name__)

FRACTION_CLIP = 1e-9
INTERFACE_NORMAL = np.array([0.0, 0.0, 1.0])


def _unit(normal) -> np.ndarray:
    normal = np.asarray(normal, dtype=float)
    if normal.shape != (3,) or abs(np.linalg.norm(normal) - 1.0) > 1e-8:
        raise ValidationError("Normal must be a unit 3-vector")
    return normal


def projected_length(scale: ScaleTensor, normal) -> float:
    """
    |T R^T n| with R, T from the eigen-decomposition A = R Λ R^T, T = Λ^-1/2.

    This is the half-width of the ellipsoid measured along the normal
    direction in the unit-sphere reference configuration.
    """
    normal = _unit(normal)
    values, vectors = eig_sym3(scale.matrix)
    if values[-1] <= 0.0:
        raise ValidationError("Degenerate scale tensor")
    return float(np.linalg.norm((vectors.T @ normal) / np.sqrt(values)))


def divide_cell(parent: ScaleTensor, f1: float, normal) -> CellDivisionResult:
    """
    Split an ellipsoidal cell by the plane through its center with normal ``n``.

    Args:
        parent: Scale tensor A0 of the mother cell.
        f1: Volume fraction of the first child, in (0, 1).
        normal: Unit normal of the cutting plane (global frame).

    Returns:
        Child tensors satisfying containment, equal cutting area and the
        volume-fraction condition, plus the shared cutting area.
    """
    if not 0.0 < f1 < 1.0:
        raise ValidationError(f"Child fraction {f1} outside (0, 1)")
    normal = _unit(normal)
    f1 = min(max(f1, FRACTION_CLIP), 1.0 - FRACTION_CLIP)

    length_sq = projected_length(parent, normal) ** 2
    dyad = np.outer(normal, normal) / length_sq

    def child(fraction: float) -> ScaleTensor:
        return ScaleTensor(parent.matrix - (1.0 - 1.0 / fraction ** 2) * dyad)

    return CellDivisionResult(
        first=child(f1),
        second=child(1.0 - f1),
        area=cutting_area(parent, normal),
    )


def cutting_area(scale: ScaleTensor, normal) -> float:
    """Area of the central section with normal ``n``: pi / (sqrt(det A) |T R^T n|)."""
    length = projected_length(scale, normal)
    return math.pi / (math.sqrt(np.linalg.det(scale.matrix)) * length)


def cell_volume(scale: ScaleTensor) -> float:
    """Ellipsoid volume 4 pi / (3 sqrt(det A))."""
    det = float(np.linalg.det(scale.matrix))
    if det <= 0.0:
        raise ValidationError("Degenerate scale tensor")
    return 4.0 * math.pi / (3.0 * math.sqrt(det))


def reciprocal_length(scale: ScaleTensor, normal) -> float:
    """v_c = 1 / (2 |T R^T n|); equals 1/h for a sphere of diameter h."""
    return 1.0 / (2.0 * projected_length(scale, normal))


def semi_axes(scale: ScaleTensor):
    """Semi-axis lengths (shortest first) and the matching axis directions as columns."""
    values, vectors = eig_sym3(scale.matrix)
    return 1.0 / np.sqrt(values), vectors


def propagate_scales(params: NetworkParams, macro: ScaleTensor) -> List[CellGeometry]:
    """
    Backward pass of the cell-division scheme over the network tree.

    Each block's interface normal e3 is mapped to the global frame by the
    accumulated orientation and the block's cell is divided with the child
    fraction of its first child. Zero-weight subtrees are skipped.

    Args:
        params: Network parameters with a nonzero top weight.
        macro: Scale tensor of the macroscale cell (global frame).

    Returns:
        One CellGeometry per active bottom-layer cell, in leaf order.
    """
    weights = params.node_weights()
    orientations = params.global_orientations()
    scales = {0: macro}
    cells: List[CellGeometry] = []

    for node in range(params.num_nodes):
        if node not in scales:
            continue
        if params.is_leaf(node):
            leaf = params.leaf_position(node)
            cells.append(CellGeometry(
                index=leaf,
                phase=int(params.phases[leaf]),
                weight=float(weights[node]),
                scale=scales[node],
                orientation=orientations[node],
            ))
            continue

        first, second = params.children(node)
        active = [child for child in (first, second) if weights[child] > 0.0]
        if len(active) == 1:
            # pass-through block: the surviving child fills the whole cell
            scales[active[0]] = scales[node]
            continue
        if not active:
            logger.debug("Skipping pruned block %d", node)
            continue

        normal = orientations[node].T @ INTERFACE_NORMAL
        division = divide_cell(scales[node], child_fraction(weights, node), normal)
        scales[first] = division.first
        scales[second] = division.second

    logger.info("Propagated scale tensor to %d micro-cells", len(cells))
    return cells

"""
Crack-surface initiation: Mohr-circle search for the plane of maximum
effective traction and activation under the per-cell allowances.
"""
import logging
import math
from functools import cmp_to_key
from typing import Dict, List, Sequence

import numpy as np

from app.core.config import SolverSettings
from app.core.tensors import eig_sym3, from_mandel
from app.models.cohesive import CohesiveState
from app.models.solver import CrackCandidate, CrackSurface, MicroCell
from app.services.cohesive_service import effective_traction
from app.services.scale_geometry import cutting_area, reciprocal_length

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-12


def _candidate_angles(mean: float, radius: float, mode_ratio: float) -> List[float]:
    angles = [0.0, math.pi / 4.0, -math.pi / 4.0]
    if mode_ratio < 1.0 and mean > 0.0:
        ratio = mean / (radius * (mode_ratio ** -2 - 1.0))
        if 0.0 < ratio < 1.0:
            stationary = 0.5 * math.acos(ratio)
            angles += [stationary, -stationary]
    return angles


def candidate_planes(stress: np.ndarray, mode_ratio: float) -> List[CrackCandidate]:
    """
    All Mohr-circle candidate planes sorted by descending effective traction.

    Normals rotate from the first toward the third principal direction about
    the second one. Ties keep the order θ = 0, +π/4, -π/4, +θ*, -θ*.
    """
    tensor = from_mandel(stress)
    values, vectors = eig_sym3(tensor)
    mean = 0.5 * (values[0] + values[2])
    radius = 0.5 * (values[0] - values[2])
    scale = max(abs(values[0]), abs(values[2]), 1e-300)

    if radius <= TIE_TOLERANCE * scale:
        normal = vectors[:, 0]
        return [CrackCandidate(normal, max(mean, 0.0), 0.0)]

    candidates = []
    for angle in _candidate_angles(mean, radius, mode_ratio):
        normal = math.cos(angle) * vectors[:, 0] + math.sin(angle) * vectors[:, 2]
        candidates.append(CrackCandidate(normal, effective_traction(tensor @ normal, normal, mode_ratio), angle))

    def compare(first: CrackCandidate, second: CrackCandidate) -> int:
        gap = first.effective_traction - second.effective_traction
        if abs(gap) <= TIE_TOLERANCE * scale:
            return 0
        return -1 if gap > 0 else 1

    return sorted(candidates, key=cmp_to_key(compare))


def critical_planes(stress: np.ndarray, mode_ratio: float) -> List[CrackCandidate]:
    """
    Plane of maximum effective traction and, off the principal plane, its twin.

    Args:
        stress: Mandel stress.
        mode_ratio: Cohesive ratio β.

    Returns:
        One candidate for θ = 0 (or a hydrostatic state), otherwise the
        ±θ pair, which share the same effective traction.
    """
    candidates = candidate_planes(stress, mode_ratio)
    best = candidates[0]
    if best.angle == 0.0:
        return [best]
    twin = next(c for c in candidates if c.angle == -best.angle)
    return [best, twin]


def _admissible(normal: np.ndarray, existing: Sequence[np.ndarray], limit: float) -> bool:
    return all(abs(float(normal @ other)) < limit for other in existing)


def try_activate(
    cells: Sequence[MicroCell],
    stresses: Dict[int, np.ndarray],
    previous_stresses: Dict[int, np.ndarray],
    cracks: Sequence[CrackSurface],
    settings: SolverSettings,
    step: int = 0,
) -> List[CrackSurface]:
    """
    Select the (cell, plane) with the largest t_m - t_c and build its layer(s).

    Args:
        cells: Micro-cells; cells without a cohesive law never crack.
        stresses: Converged trial base stress per cell (cell frame).
        previous_stresses: Committed base stress per cell, used for the
            equilibrium-preserving initial opening.
        cracks: Existing crack list.
        settings: Allowances and perturbation size.
        step: Step number recorded on new layers.

    Returns:
        Zero, one, or two (twin planes) new crack surfaces.
    """
    best = None
    for cell in sorted(cells, key=lambda c: c.index):
        if cell.cohesive is None or cell.index not in stresses:
            continue
        existing = [crack.normal for crack in cracks if crack.cell == cell.index]
        if len(existing) >= settings.max_cracks_per_cell:
            continue
        candidates = candidate_planes(stresses[cell.index], cell.cohesive.mode_ratio)
        for candidate in candidates:
            if not _admissible(candidate.normal, existing, settings.crack_cosine_limit):
                continue
            excess = candidate.effective_traction - cell.cohesive.critical_traction
            if best is None or excess > best[2]:
                best = (cell, candidate, excess, candidates, existing)
            break

    if best is None or best[2] <= 0.0:
        return []

    cell, candidate, excess, candidates, existing = best
    planes = [(candidate, 1.0)]
    if candidate.angle != 0.0 and len(existing) + 2 <= settings.max_cracks_per_cell:
        twin = next((c for c in candidates if c.angle == -candidate.angle), None)
        if twin is not None and _admissible(twin.normal, existing + [candidate.normal], settings.crack_cosine_limit):
            planes = [(candidate, 1.0 + settings.twin_perturbation),
                      (twin, 1.0 - settings.twin_perturbation)]

    created = []
    local_scale = cell.geometry.local_scale
    previous = from_mandel(previous_stresses[cell.index])
    for plane, traction_scale in planes:
        v_c = reciprocal_length(local_scale, plane.normal)
        params = cell.cohesive.for_layer(cell.material.reference_modulus, v_c, traction_scale)
        crack = CrackSurface(
            cell=cell.index,
            reciprocal_length=v_c,
            normal=plane.normal,
            global_normal=cell.geometry.orientation.T @ plane.normal,
            area=cutting_area(local_scale, plane.normal),
            params=params,
            state=CohesiveState.initial(params, plane.normal, previous @ plane.normal),
            step=step,
        )
        created.append(crack)
        logger.info(
            "Activated crack in cell %d at step %d: t_m=%.6g, normal=%s, v_c=%.6g, S=%.6g",
            cell.index, step, plane.effective_traction, np.round(crack.global_normal, 6).tolist(),
            v_c, crack.area,
        )
    return created

"""
Effective cohesive law with backbone damage and viscous regularization.

Opening and traction are 3-vectors in the cell frame. A layer with normal n
adds ``v_c B(n) d`` to the cell strain, where ``B(n) d = mandel(sym(d ⊗ n))``,
and carries the traction ``B(n)^T σ``.
"""
import logging
import math
from typing import Iterable, Tuple

import numpy as np

from app.core.exceptions import SingularInterfaceError
from app.core.tensors import sym_dyad_operator
from app.models.cohesive import CohesiveParams, CohesiveState, TractionResult

logger = logging.getLogger(__name__)


def _split(vector: np.ndarray, normal: np.ndarray) -> Tuple[float, np.ndarray]:
    normal_part = float(vector @ normal)
    return normal_part, vector - normal_part * normal


def effective_opening(opening: np.ndarray, normal: np.ndarray, mode_ratio: float) -> float:
    """
    Scalar mixed-mode opening d_m.

    Tension (d_n >= 0): sqrt(d_n^2 + β^2 |d_S|^2); compression: β |d_S|.
    """
    d_n, d_s = _split(np.asarray(opening, dtype=float), np.asarray(normal, dtype=float))
    slide = float(np.linalg.norm(d_s))
    if d_n >= 0.0:
        return math.sqrt(d_n ** 2 + (mode_ratio * slide) ** 2)
    return mode_ratio * slide


def effective_traction(traction: np.ndarray, normal: np.ndarray, mode_ratio: float) -> float:
    """
    Scalar mixed-mode traction t_m.

    Tension (t_n >= 0): sqrt(t_n^2 + |t_S|^2 / β^2); compression: |t_S| / β.
    """
    t_n, t_s = _split(np.asarray(traction, dtype=float), np.asarray(normal, dtype=float))
    shear = float(np.linalg.norm(t_s))
    if t_n >= 0.0:
        return math.sqrt(t_n ** 2 + (shear / mode_ratio) ** 2)
    return shear / mode_ratio


def backbone_traction(params: CohesiveParams, opening: float) -> float:
    """Inviscid bilinear envelope without the κ floor."""
    d_c, d_f = params.critical_opening, params.failure_opening
    if opening <= d_c:
        return params.penalty_stiffness * opening
    if opening >= d_f:
        return 0.0
    return params.critical_traction * (d_f - opening) / (d_f - d_c)


def _backbone_slope(params: CohesiveParams, opening: float) -> float:
    d_c, d_f = params.critical_opening, params.failure_opening
    if opening < d_c:
        return params.penalty_stiffness
    if opening >= d_f:
        return 0.0
    return -params.critical_traction / (d_f - d_c)


def _reference_traction(params: CohesiveParams, opening: float) -> float:
    return params.critical_traction + params.hardening_stiffness * (opening - params.critical_opening)


def backbone_damage(params: CohesiveParams, max_opening: float) -> float:
    """D = t_0 / (t_c + K_h (d_0 - d_c)); one before softening starts."""
    if max_opening <= params.critical_opening:
        return 1.0
    return backbone_traction(params, max_opening) / _reference_traction(params, max_opening)


def viscous_damage(previous: float, backbone: float, relaxation_time: float, dt: float) -> float:
    """Backward-Euler update of dD_v/dt = (D - D_v) / τ."""
    return (relaxation_time * previous + dt * backbone) / (relaxation_time + dt)


def fracture_work(params: CohesiveParams, opening: float) -> float:
    """Integral of the inviscid envelope from 0 to ``opening``."""
    d_c, d_f, t_c = params.critical_opening, params.failure_opening, params.critical_traction
    if opening <= d_c:
        return 0.5 * params.penalty_stiffness * opening ** 2
    if opening >= d_f:
        return params.fracture_energy
    return 0.5 * t_c * d_c + t_c / (d_f - d_c) * (d_f * (opening - d_c) - 0.5 * (opening ** 2 - d_c ** 2))


def free_energy(params: CohesiveParams, state: CohesiveState) -> float:
    """
    Free energy per unit area of a layer.

    Work spent along the envelope up to d_0, less the recoverable part at
    d_0, plus the energy stored on the current secant branch.
    """
    d_0 = max(state.max_opening, params.critical_opening)
    t_0 = backbone_traction(params, d_0)
    d_m = min(effective_opening(state.opening, state.normal, params.mode_ratio), d_0)
    return fracture_work(params, d_0) - 0.5 * t_0 * d_0 + 0.5 * (t_0 / d_0) * d_m ** 2


def evaluate_cohesive(params: CohesiveParams, state: CohesiveState, d_opening: np.ndarray, dt: float) -> TractionResult:
    """
    Traction, compliance and residual of a layer for a trial opening increment.

    Args:
        params: Layer parameters including K_h.
        state: Committed layer state.
        d_opening: Opening increment from the committed state.
        dt: Time increment in ms.

    Returns:
        TractionResult with ``Δd = G̃ Δt + δd̃`` about the trial state.
    """
    normal = state.normal
    beta_sq = params.mode_ratio ** 2
    opening = state.opening + np.asarray(d_opening, dtype=float)
    d_n, d_s = _split(opening, normal)
    tension = d_n >= 0.0

    in_plane = np.eye(3) - np.outer(normal, normal)
    weight = beta_sq * in_plane + (np.outer(normal, normal) if tension else 0.0)
    direction = weight @ opening
    d_m = math.sqrt(max(float(opening @ direction), 0.0))
    previous_d_m = effective_opening(state.opening, normal, params.mode_ratio)

    d_0 = max(state.max_opening, params.critical_opening)
    loading = d_m >= d_0 and d_m >= previous_d_m
    new_d_0 = max(d_0, d_m) if loading else d_0
    damage = backbone_damage(params, new_d_0)
    relaxed = viscous_damage(state.viscous_damage, damage, params.relaxation_time, dt)

    if loading:
        reference = _reference_traction(params, d_m)
        t_v = relaxed * reference
        # d(D)/d(d_m) along the envelope enters through the backward-Euler weight
        envelope = backbone_traction(params, d_m)
        damage_slope = (_backbone_slope(params, d_m) * reference
                        - envelope * params.hardening_stiffness) / reference ** 2
        weight_new = dt / (params.relaxation_time + dt)
        t_v_slope = relaxed * params.hardening_stiffness + weight_new * damage_slope * reference
        secant = (t_v + params.floor_stiffness * d_m) / d_m
        slope = t_v_slope + params.floor_stiffness
    else:
        secant = relaxed * _reference_traction(params, d_0) / d_0 + params.floor_stiffness
        t_v = (secant - params.floor_stiffness) * d_m
        slope = secant
    t_m = t_v + params.floor_stiffness * d_m

    traction = secant * direction
    stiffness = secant * weight
    if not tension:
        traction = traction + params.penalty_stiffness * d_n * normal
        stiffness = stiffness + params.penalty_stiffness * np.outer(normal, normal)
    if d_m > 0.0:
        stiffness = stiffness + (slope - secant) / d_m ** 2 * np.outer(direction, direction)

    try:
        compliance = np.linalg.inv(stiffness)
    except np.linalg.LinAlgError:
        raise SingularInterfaceError("Cohesive layer tangent is singular")
    compliance = 0.5 * (compliance + compliance.T)
    residual = (opening - state.opening) - compliance @ (traction - state.traction)

    new_state = CohesiveState(
        normal=normal,
        opening=opening,
        traction=traction,
        max_opening=new_d_0,
        max_traction=backbone_traction(params, new_d_0),
        viscous_damage=min(max(relaxed, 0.0), 1.0),
    )
    return TractionResult(traction, compliance, residual, new_state, d_m, t_m, loading)


def enrich_cell_response(
    compliance: np.ndarray,
    residual: np.ndarray,
    layers: Iterable[Tuple[float, np.ndarray, np.ndarray, np.ndarray]],
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Stiffness and residual stress of a cell enriched with cohesive layers.

    Args:
        compliance: Base-material compliance D^base.
        residual: Base-material residual strain δε^base.
        layers: Tuples ``(v_c, normal, G̃, δd̃)`` for every layer of the cell.

    Returns:
        ``(C_N, δσ_N)`` with C_N = [D + Σ v_c B G̃ B^T]^-1 and
        δσ_N = -C_N [δε + Σ v_c B δd̃].
    """
    total_compliance = np.array(compliance, dtype=float)
    total_residual = np.array(residual, dtype=float)
    for reciprocal, normal, layer_compliance, layer_residual in layers:
        operator = sym_dyad_operator(normal)
        total_compliance = total_compliance + reciprocal * operator @ layer_compliance @ operator.T
        total_residual = total_residual + reciprocal * operator @ layer_residual
    stiffness = np.linalg.inv(total_compliance)
    stiffness = 0.5 * (stiffness + stiffness.T)
    return stiffness, -stiffness @ total_residual

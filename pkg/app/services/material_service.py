"""
Constitutive updates of the phase materials.

The von Mises update is a radial return with the exact consistent tangent.
Every update returns the algorithmic compliance D and the affine residual
δε so that ``Δε = D Δσ + δε`` holds at the evaluated state.
"""
import logging
import math

import numpy as np
from scipy.optimize import brentq

from app.core.exceptions import ReturnMappingError, ValidationError
from app.core.tensors import IDENTITY_VEC, deviatoric_projector
from app.models.materials import (
    BaseResponse,
    ElasticMaterial,
    HardeningLaw,
    Material,
    PiecewiseLinearHardening,
    PlasticState,
    VonMisesMaterial,
)

logger = logging.getLogger(__name__)

RETURN_TOLERANCE = 1e-12
RETURN_MAX_ITERATIONS = 25
SQRT_3_2 = math.sqrt(1.5)


def _segment(law: PiecewiseLinearHardening, plastic_strain: float):
    current = law.segments[0]
    for segment in law.segments:
        if plastic_strain >= segment[0]:
            current = segment
    return current


def yield_stress(law: HardeningLaw, plastic_strain: float) -> float:
    """
    Evaluate a hardening law.

    Args:
        law: Piecewise-linear or exponential hardening law.
        plastic_strain: Effective plastic strain ε_p ≥ 0.

    Returns:
        Yield stress in GPa.
    """
    if plastic_strain < 0.0:
        raise ValidationError(f"Effective plastic strain must be non-negative, got {plastic_strain}")
    if isinstance(law, PiecewiseLinearHardening):
        _, intercept, slope = _segment(law, plastic_strain)
        return intercept + slope * plastic_strain
    return ((law.initial_yield - law.ultimate) * math.exp(-law.rate * plastic_strain)
            + law.hardening_modulus * plastic_strain + law.ultimate)


def hardening_slope(law: HardeningLaw, plastic_strain: float) -> float:
    """dσ^Y/dε_p, taken from the right at piecewise breakpoints."""
    if isinstance(law, PiecewiseLinearHardening):
        return _segment(law, max(plastic_strain, 0.0))[2]
    return (law.rate * (law.ultimate - law.initial_yield) * math.exp(-law.rate * plastic_strain)
            + law.hardening_modulus)


def equivalent_stress(stress: np.ndarray) -> float:
    deviator = deviatoric_projector() @ stress
    return SQRT_3_2 * float(np.linalg.norm(deviator))


def _solve_plastic_multiplier(material: VonMisesMaterial, trial_equivalent: float, plastic_strain: float) -> float:
    law = material.hardening
    shear3 = 3.0 * material.shear_modulus

    def residual(increment: float) -> float:
        return trial_equivalent - shear3 * increment - yield_stress(law, plastic_strain + increment)

    # scalar Newton; the segment lookup switches branch as the iterate crosses a breakpoint
    increment = 0.0
    for _ in range(RETURN_MAX_ITERATIONS):
        value = residual(increment)
        if abs(value) <= RETURN_TOLERANCE * max(1.0, trial_equivalent):
            return increment
        slope = shear3 + hardening_slope(law, plastic_strain + increment)
        increment = max(increment + value / slope, 0.0)

    logger.debug("Radial return Newton stalled, switching to bracketing")
    upper = trial_equivalent / shear3
    try:
        return brentq(residual, 0.0, upper, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
    except (ValueError, RuntimeError) as exc:
        raise ReturnMappingError(f"Return map failed for '{material.name}': {exc}",
                                 residual=residual(increment))


def _evaluate_elastic(material: ElasticMaterial, state: PlasticState, d_strain: np.ndarray) -> BaseResponse:
    stress = state.stress + material.stiffness @ d_strain
    new_state = PlasticState(stress, state.strain + d_strain, state.plastic_strain.copy(),
                             state.effective_plastic_strain)
    return BaseResponse(stress, material.compliance, np.zeros(6), new_state)


def _evaluate_von_mises(material: VonMisesMaterial, state: PlasticState, d_strain: np.ndarray) -> BaseResponse:
    stiffness = material.stiffness
    trial = state.stress + stiffness @ d_strain
    deviator = deviatoric_projector() @ trial
    trial_equivalent = SQRT_3_2 * float(np.linalg.norm(deviator))
    yield_now = yield_stress(material.hardening, state.effective_plastic_strain)
    new_strain = state.strain + d_strain

    if trial_equivalent - yield_now <= 0.0:
        new_state = PlasticState(trial, new_strain, state.plastic_strain.copy(), state.effective_plastic_strain)
        return BaseResponse(trial, material.compliance, np.zeros(6), new_state)

    shear = material.shear_modulus
    increment = _solve_plastic_multiplier(material, trial_equivalent, state.effective_plastic_strain)
    flow = deviator / np.linalg.norm(deviator)
    stress = trial - 2.0 * shear * SQRT_3_2 * increment * flow
    plastic_strain = state.effective_plastic_strain + increment
    new_state = PlasticState(
        stress,
        new_strain,
        state.plastic_strain + SQRT_3_2 * increment * flow,
        plastic_strain,
    )

    slope = hardening_slope(material.hardening, plastic_strain)
    theta = 1.0 - 3.0 * shear * increment / trial_equivalent
    tangent = (3.0 * material.bulk_modulus * np.outer(IDENTITY_VEC, IDENTITY_VEC) / 3.0
               + 2.0 * shear * theta * deviatoric_projector()
               + 6.0 * shear ** 2 * (increment / trial_equivalent - 1.0 / (3.0 * shear + slope))
               * np.outer(flow, flow))
    compliance = np.linalg.inv(tangent)
    compliance = 0.5 * (compliance + compliance.T)
    residual = d_strain - compliance @ (stress - state.stress)
    return BaseResponse(stress, compliance, residual, new_state, plastic=True)


def evaluate_base(material: Material, state: PlasticState, d_strain: np.ndarray, dt: float) -> BaseResponse:
    """
    Update a base material for a strain increment from its committed state.

    Args:
        material: Phase material.
        state: Committed state at the start of the step.
        d_strain: Total strain increment of the base material (Mandel).
        dt: Time increment in ms (rate-independent models ignore it).

    Returns:
        BaseResponse with stress, compliance D^base, residual δε^base and
        the trial state.
    """
    d_strain = np.asarray(d_strain, dtype=float)
    if isinstance(material, ElasticMaterial):
        return _evaluate_elastic(material, state, d_strain)
    return _evaluate_von_mises(material, state, d_strain)

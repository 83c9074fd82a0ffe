"""
Implicit failure analysis of one material point.

A step runs the network fixed-point iteration for a fixed crack
configuration, then looks for new crack surfaces and re-enters the
iteration after every activation. Internal variables are committed only
when the whole step converges; the adaptive driver halves failing steps.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from app.core.config import SolverSettings
from app.core.exceptions import ConfigurationError, ConvergenceError, RefinementExhaustedError
from app.core.tensors import sym_dyad_operator
from app.models.cohesive import CohesiveParams, TractionResult
from app.models.geometry import ScaleTensor
from app.models.materials import BaseResponse, ElasticMaterial, Material, PlasticState
from app.models.network import BlockResponse, NetworkParams
from app.models.solver import (
    CellDiagnostics,
    CrackSurface,
    Diagnostics,
    MacroBC,
    MicroCell,
    NetworkState,
    StepResult,
)
from app.services.activation_service import try_activate
from app.services.cohesive_service import enrich_cell_response, evaluate_cohesive, free_energy
from app.services.material_service import evaluate_base
from app.services.network_service import MaterialNetwork
from app.services.scale_geometry import propagate_scales

logger = logging.getLogger(__name__)

INCREMENT_FLOOR = 1e-300


@dataclass
class TrialSolution:
    """Converged (or failed) fixed-point iterate for one crack configuration."""
    converged: bool
    iterations: int
    d_strain: np.ndarray = field(default_factory=lambda: np.zeros(6))
    d_stress: np.ndarray = field(default_factory=lambda: np.zeros(6))
    stiffness: np.ndarray = field(default_factory=lambda: np.zeros((6, 6)))
    base: Dict[int, BaseResponse] = field(default_factory=dict)
    tractions: List[TractionResult] = field(default_factory=list)
    base_increments: Dict[int, np.ndarray] = field(default_factory=dict)
    opening_increments: List[np.ndarray] = field(default_factory=list)
    work_residual: float = 0.0


class FailureSolver:
    """
    Material-point solver built on a trained network.

    Args:
        params: Network parameters.
        materials: Phase id -> material.
        cohesive: Phase id -> cohesive law; phases without one never crack.
        macro_scale: Scale tensor of the macroscale cell.
        settings: Numerical controls.
    """

    def __init__(
        self,
        params: NetworkParams,
        materials: Mapping[int, Material],
        cohesive: Mapping[int, CohesiveParams],
        macro_scale: ScaleTensor,
        settings: Optional[SolverSettings] = None,
    ):
        self.settings = settings or SolverSettings()
        self.network = MaterialNetwork(params)
        self.cells: List[MicroCell] = []
        for geometry in propagate_scales(params, macro_scale):
            if geometry.phase not in materials:
                raise ConfigurationError(f"No material defined for phase {geometry.phase}")
            law = cohesive.get(geometry.phase)
            if law is not None:
                law = replace(law, penalty_stiffness=self.settings.penalty_stiffness,
                              floor_stiffness=self.settings.floor_stiffness)
            self.cells.append(MicroCell(geometry, materials[geometry.phase], law))
        self._linear = all(isinstance(cell.material, ElasticMaterial) for cell in self.cells)

    def initial_state(self) -> NetworkState:
        """Unloaded state with an empty crack list."""
        return NetworkState(base_states={cell.index: PlasticState() for cell in self.cells})

    # --- fixed-point iteration ---

    def _initial_guess(self, state: NetworkState, cracks: Sequence[CrackSurface], dt: float):
        ratio = dt / state.last_dt if state.last_dt > 0.0 else 0.0
        base = {
            cell.index: ratio * state.last_base_increments.get(cell.index, np.zeros(6))
            for cell in self.cells
        }
        openings = []
        for position in range(len(cracks)):
            if position < len(state.last_opening_increments):
                openings.append(ratio * state.last_opening_increments[position])
            else:
                openings.append(np.zeros(3))
        return base, openings

    def _evaluate_leaves(self, state, cracks, base_increments, opening_increments, dt):
        base = {
            cell.index: evaluate_base(cell.material, state.base_states[cell.index], base_increments[cell.index], dt)
            for cell in self.cells
        }
        tractions = [
            evaluate_cohesive(crack.params, crack.state, opening_increments[position], dt)
            for position, crack in enumerate(cracks)
        ]
        return base, tractions

    def _solve_macro(self, response: BlockResponse, bc: MacroBC, start_stress: np.ndarray):
        strain_mask = bc.strain_controlled
        stress_mask = bc.stress_controlled
        d_strain = np.zeros(6)
        d_strain[strain_mask] = bc.values[strain_mask]
        stiffness, residual = response.stiffness, response.residual
        if stress_mask.any():
            target = bc.values[stress_mask] - start_stress[stress_mask]
            rhs = target - stiffness[np.ix_(stress_mask, strain_mask)] @ d_strain[strain_mask] - residual[stress_mask]
            d_strain[stress_mask] = np.linalg.solve(stiffness[np.ix_(stress_mask, stress_mask)], rhs)
        return d_strain, stiffness @ d_strain + residual

    def newton_solve(
        self,
        state: NetworkState,
        bc: MacroBC,
        cracks: Optional[Sequence[CrackSurface]] = None,
        guess: Optional[Tuple[Dict[int, np.ndarray], List[np.ndarray]]] = None,
    ) -> TrialSolution:
        """
        Fixed-point iteration for a fixed crack configuration.

        Leaves are evaluated at the current increments, their linearized
        responses are homogenized, the macro increment is resolved against
        the boundary conditions and back-propagated to update the leaf
        increments. Converged when the relative change of all base strain
        increments and of all opening increments falls below the tolerance.

        Args:
            state: Committed state at the start of the step.
            bc: Macroscale control of this step.
            cracks: Crack configuration (defaults to the committed list).
            guess: Initial base and opening increments.

        Returns:
            TrialSolution; ``converged`` is False on iteration-cap breach or
            numerical failure.
        """
        cracks = list(state.cracks if cracks is None else cracks)
        base_inc, open_inc = guess if guess is not None else self._initial_guess(state, cracks, bc.dt)
        base_inc = {key: np.array(value, dtype=float) for key, value in base_inc.items()}
        open_inc = [np.array(value, dtype=float) for value in open_inc]
        operators = [sym_dyad_operator(crack.normal) for crack in cracks]
        by_cell: Dict[int, List[int]] = {}
        for position, crack in enumerate(cracks):
            by_cell.setdefault(crack.cell, []).append(position)
        exact = self._linear and not cracks
        tol = self.settings.newton_tolerance

        for iteration in range(1, self.settings.max_iterations + 1):
            try:
                base, tractions = self._evaluate_leaves(state, cracks, base_inc, open_inc, bc.dt)
                responses = {}
                for cell in self.cells:
                    layers = [
                        (cracks[p].reciprocal_length, cracks[p].normal, tractions[p].compliance, tractions[p].residual)
                        for p in by_cell.get(cell.index, [])
                    ]
                    stiffness, residual = enrich_cell_response(
                        base[cell.index].compliance, base[cell.index].residual, layers)
                    responses[cell.index] = BlockResponse(stiffness, residual)
                forward = self.network.forward_pass(responses)
                d_strain, d_stress = self._solve_macro(forward.response, bc, state.macro_stress)
                leaves = self.network.backward_pass(forward, d_strain, d_stress)
            except (ConvergenceError, np.linalg.LinAlgError) as exc:
                logger.debug("Fixed-point iteration %d failed: %s", iteration, exc)
                return TrialSolution(converged=False, iterations=iteration)

            new_base = {
                index: base[index].compliance @ leaves[index][1] + base[index].residual
                for index in base_inc
            }
            new_open = [
                tractions[p].compliance @ (operators[p].T @ leaves[crack.cell][1]) + tractions[p].residual
                for p, crack in enumerate(cracks)
            ]
            change = max(_relative_change(list(base_inc.values()), list(new_base.values())),
                         _relative_change(open_inc, new_open))
            logger.debug("Iteration %d: relative change %.3e", iteration, change)
            base_inc, open_inc = new_base, new_open

            if exact or change < tol:
                base, tractions = self._evaluate_leaves(state, cracks, base_inc, open_inc, bc.dt)
                return TrialSolution(
                    converged=True,
                    iterations=iteration,
                    d_strain=d_strain,
                    d_stress=d_stress,
                    stiffness=forward.response.stiffness,
                    base=base,
                    tractions=tractions,
                    base_increments=base_inc,
                    opening_increments=open_inc,
                    work_residual=self._work_residual(d_strain, d_stress, leaves),
                )

        logger.debug("Fixed-point iteration hit the cap of %d", self.settings.max_iterations)
        return TrialSolution(converged=False, iterations=self.settings.max_iterations)

    def _work_residual(self, d_strain, d_stress, leaves) -> float:
        macro = float(d_stress @ d_strain)
        micro = sum(
            self.network.weights[self.network.params.leaf_node(index)] * float(strain @ stress)
            for index, (strain, stress) in leaves.items()
        )
        scale = max(abs(macro), abs(micro))
        return abs(macro - micro) / scale if scale > 0.0 else 0.0

    # --- steps ---

    def solve_step(self, state: NetworkState, bc: MacroBC) -> StepResult:
        """
        One macroscale step with crack activation.

        The state is updated in place only when the step converges.
        """
        cracks = [crack.copy() for crack in state.cracks]
        activated: List[CrackSurface] = []
        guess = None
        iterations = 0
        previous_stresses = {index: base.stress for index, base in state.base_states.items()}

        while True:
            trial = self.newton_solve(state, bc, cracks, guess)
            iterations += trial.iterations
            if not trial.converged:
                return StepResult(
                    d_stress=np.zeros(6), stiffness=np.zeros((6, 6)), converged=False,
                    strain=state.macro_strain.copy(), stress=state.macro_stress.copy(),
                    iterations=iterations,
                )
            stresses = {index: response.stress for index, response in trial.base.items()}
            new = try_activate(self.cells, stresses, previous_stresses, cracks, self.settings, state.step + 1)
            if not new:
                break
            openings = list(trial.opening_increments)
            for crack in new:
                stress_jump = stresses[crack.cell] - previous_stresses[crack.cell]
                traction_jump = sym_dyad_operator(crack.normal).T @ stress_jump
                openings.append(traction_jump / crack.params.penalty_stiffness)
            cracks.extend(new)
            activated.extend(new)
            guess = (trial.base_increments, openings)

        for index, response in trial.base.items():
            state.base_states[index] = response.state
        for crack, traction in zip(cracks, trial.tractions):
            crack.state = traction.state
        state.cracks = cracks
        state.macro_strain = state.macro_strain + trial.d_strain
        state.macro_stress = state.macro_stress + trial.d_stress
        state.time += bc.dt
        state.step += 1
        state.last_base_increments = trial.base_increments
        state.last_opening_increments = trial.opening_increments
        state.last_dt = bc.dt

        return StepResult(
            d_stress=trial.d_stress,
            stiffness=trial.stiffness,
            converged=True,
            strain=state.macro_strain.copy(),
            stress=state.macro_stress.copy(),
            iterations=iterations,
            activated=activated,
            work_residual=trial.work_residual,
            diagnostics=self.diagnostics(state),
        )

    def solve_step_adaptive(self, state: NetworkState, bc: MacroBC) -> StepResult:
        """
        Step with adaptive sub-stepping.

        ``index`` is the one-based sub-step being attempted out of ``count``.
        A success advances the index; a failure doubles ``count`` and sets
        ``index = 2 * index - 1``, which re-attempts the first half of the
        failed sub-step. The step completes when sub-step ``count`` succeeds.

        Raises:
            RefinementExhaustedError: After ``max_refinements`` doublings; the
                state is restored to its value at entry.
        """
        snapshot = state.copy()
        start_stress = state.macro_stress.copy()
        count, index, refinements = 1, 1, 0
        schedule = []
        activated: List[CrackSurface] = []
        iterations = 0
        work_residual = 0.0

        while True:
            result = self.solve_step(state, bc.substep(start_stress, index, count))
            schedule.append((index, count, result.converged))
            iterations += result.iterations
            if result.converged:
                activated.extend(result.activated)
                work_residual = max(work_residual, result.work_residual)
                if index == count:
                    break
                index += 1
                continue
            if refinements >= self.settings.max_refinements:
                state.restore(snapshot)
                logger.warning("Step %d exhausted %d refinements", snapshot.step + 1, refinements)
                raise RefinementExhaustedError(refinements, snapshot.step + 1)
            refinements += 1
            count *= 2
            index = 2 * index - 1
            logger.info("Refining step %d into %d sub-steps", snapshot.step + 1, count)

        result.d_stress = state.macro_stress - start_stress
        result.refinements = refinements
        result.substeps = count
        result.schedule = schedule
        result.activated = activated
        result.iterations = iterations
        result.work_residual = work_residual
        return result

    # --- diagnostics ---

    def diagnostics(self, state: NetworkState) -> Diagnostics:
        """Released energy Π, average effective plastic strain and per-cell G."""
        released = 0.0
        cells = []
        for cell in self.cells:
            layers = state.cracks_in(cell.index)
            energy = sum(free_energy(crack.params, crack.state) * crack.area for crack in layers)
            area = sum(crack.area for crack in layers)
            released += energy
            cells.append(CellDiagnostics(
                index=cell.index,
                phase=cell.phase,
                weight=cell.weight,
                effective_plastic_strain=state.base_states[cell.index].effective_plastic_strain,
                released_energy=energy / area if area > 0.0 else 0.0,
                crack_count=len(layers),
            ))
        average = sum(c.weight * c.effective_plastic_strain for c in cells)
        return Diagnostics(released_energy=released, average_plastic_strain=average, cells=cells)


def _relative_change(old: Sequence[np.ndarray], new: Sequence[np.ndarray]) -> float:
    if not new:
        return 0.0
    new_flat = np.concatenate([np.ravel(v) for v in new])
    old_flat = np.concatenate([np.ravel(v) for v in old])
    diff = float(np.linalg.norm(new_flat - old_flat))
    if diff == 0.0:
        return 0.0
    return diff / max(float(np.linalg.norm(new_flat)), INCREMENT_FLOOR)

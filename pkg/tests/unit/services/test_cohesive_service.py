# tests/unit/services/test_cohesive_service.py
import math

import numpy as np
import pytest
from scipy.integrate import quad

from app.core.exceptions import ValidationError
from app.core.tensors import sym_dyad_operator
from app.models.cohesive import CohesiveParams, CohesiveState
from app.services.cohesive_service import (
    backbone_damage,
    backbone_traction,
    effective_opening,
    effective_traction,
    enrich_cell_response,
    evaluate_cohesive,
    fracture_work,
    free_energy,
    viscous_damage,
)
from tests.conftest import random_spd

NORMAL = np.array([0.0, 0.0, 1.0])


@pytest.fixture
def params():
    return CohesiveParams(critical_traction=0.15, fracture_energy=6e-4, mode_ratio=1.0, relaxation_time=1e-4)


class TestCohesiveParams:

    def test_failure_opening(self, params):
        assert params.failure_opening == pytest.approx(0.008)
        assert params.critical_opening == pytest.approx(1.5e-9)

    def test_for_layer(self, params):
        layer = params.for_layer(100.0, 125.0, traction_scale=1.0 + 1e-6)
        assert layer.hardening_stiffness == pytest.approx(12500.0)
        assert layer.critical_traction == pytest.approx(0.15 * (1.0 + 1e-6))
        assert params.hardening_stiffness == 0.0

    @pytest.mark.parametrize("kwargs", [
        {"critical_traction": 0.0, "fracture_energy": 1e-3},
        {"critical_traction": 0.1, "fracture_energy": -1e-3},
        {"critical_traction": 0.1, "fracture_energy": 1e-3, "relaxation_time": 0.0},
        {"critical_traction": 0.1, "fracture_energy": 1e-3, "mode_ratio": 0.0},
        {"critical_traction": 1e3, "fracture_energy": 1e-12},
    ])
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(ValidationError):
            CohesiveParams(**kwargs)

    def test_non_unit_normal_rejected(self):
        with pytest.raises(ValidationError):
            CohesiveState(normal=[0.0, 0.0, 2.0])


class TestScalarMeasures:

    def test_tension_opening(self):
        assert effective_opening([3.0, 0.0, 4.0], NORMAL, 1.0) == pytest.approx(5.0)
        assert effective_opening([3.0, 0.0, 4.0], NORMAL, 2.0) == pytest.approx(math.hypot(4.0, 6.0))

    def test_compression_keeps_only_sliding(self):
        assert effective_opening([3.0, 0.0, -4.0], NORMAL, 2.0) == pytest.approx(6.0)
        assert effective_traction([3.0, 0.0, -4.0], NORMAL, 2.0) == pytest.approx(1.5)

    def test_tension_traction(self):
        assert effective_traction([0.0, 6.0, 8.0], NORMAL, 2.0) == pytest.approx(math.hypot(8.0, 3.0))


class TestBackbone:

    def test_envelope_integrates_to_fracture_energy(self, params):
        total, _ = quad(lambda d: backbone_traction(params, d), 0.0, params.failure_opening,
                        points=[params.critical_opening], limit=200)
        assert total == pytest.approx(params.fracture_energy, rel=1e-8)
        assert fracture_work(params, params.failure_opening) == pytest.approx(params.fracture_energy)

    def test_fracture_work_matches_quadrature(self, params):
        opening = 0.003
        partial, _ = quad(lambda d: backbone_traction(params, d), 0.0, opening,
                          points=[params.critical_opening], limit=200)
        assert fracture_work(params, opening) == pytest.approx(partial, rel=1e-8)

    def test_peak_and_failure(self, params):
        assert backbone_traction(params, params.critical_opening) == pytest.approx(0.15)
        assert backbone_traction(params, params.failure_opening) == 0.0
        assert backbone_traction(params, 1.0) == 0.0

    def test_damage(self, params):
        assert backbone_damage(params, params.critical_opening) == 1.0
        assert backbone_damage(params, params.failure_opening) == 0.0
        midway = 0.5 * (params.critical_opening + params.failure_opening)
        assert backbone_damage(params, midway) == pytest.approx(0.5)

    def test_viscous_damage_backward_euler(self):
        assert viscous_damage(1.0, 0.5, 1e-4, 1e-4) == pytest.approx(0.75)
        assert viscous_damage(1.0, 0.5, 1e-4, 1e3) == pytest.approx(0.5, rel=1e-6)
        assert viscous_damage(1.0, 0.5, 1e-4, 0.0) == 1.0


class TestFreeEnergy:

    def test_intact_layer_at_rest(self, params):
        state = CohesiveState.initial(params, NORMAL, np.zeros(3))
        assert free_energy(params, state) == pytest.approx(0.0, abs=1e-18)

    def test_fully_failed_layer_releases_fracture_energy(self, params):
        state = CohesiveState(NORMAL, opening=np.array([0.0, 0.0, 0.02]), max_opening=params.failure_opening)
        assert free_energy(params, state) == pytest.approx(params.fracture_energy)


class TestEvaluateCohesive:

    @pytest.fixture
    def intact(self, params):
        return CohesiveState.initial(params, NORMAL, np.zeros(3))

    def test_elastic_regime_uses_penalty(self, params, intact):
        opening = 0.5 * params.critical_opening * NORMAL
        result = evaluate_cohesive(params, intact, opening, 1e-3)
        assert not result.loading
        np.testing.assert_allclose(result.traction, params.penalty_stiffness * opening, rtol=1e-10)
        assert result.state.max_opening == params.critical_opening

    def test_compression_penalty(self, params, intact):
        result = evaluate_cohesive(params, intact, -1e-9 * NORMAL, 1e-3)
        np.testing.assert_allclose(result.traction, [0.0, 0.0, -0.1], rtol=1e-10)

    @pytest.mark.parametrize("dt, expected_damage", [(1e-4, 0.75), (1e3, 0.5), (1e-12, 1.0)])
    def test_viscous_ramp(self, params, intact, dt, expected_damage):
        midway = 0.5 * (params.critical_opening + params.failure_opening)
        result = evaluate_cohesive(params, intact, midway * NORMAL, dt)
        assert result.loading
        assert result.state.max_opening == pytest.approx(midway)
        assert result.state.viscous_damage == pytest.approx(expected_damage, rel=1e-6)
        assert result.effective_traction == pytest.approx(
            expected_damage * params.critical_traction + params.floor_stiffness * midway, rel=1e-6)

    def test_fast_relaxation_tracks_envelope(self, params):
        layer = params.for_layer(100.0, 1.0)
        state = CohesiveState.initial(layer, NORMAL, np.zeros(3))
        dt = 100.0 * layer.relaxation_time
        for opening in np.linspace(0.0, 1.25 * layer.failure_opening, 201)[1:]:
            result = evaluate_cohesive(layer, state, opening * NORMAL - state.opening, dt)
            assert result.loading
            envelope = backbone_traction(layer, result.effective_opening)
            assert abs(result.effective_traction - envelope) <= 0.01 * layer.critical_traction
            state = result.state
        assert state.max_opening == pytest.approx(1.25 * layer.failure_opening)

    def test_fully_failed_layer_keeps_floor_only(self, params, intact):
        result = evaluate_cohesive(params, intact, 2.0 * params.failure_opening * NORMAL, 1e9)
        assert result.effective_traction == pytest.approx(params.floor_stiffness * 2.0 * params.failure_opening,
                                                          rel=1e-6)

    def test_unloading_follows_secant(self, params, intact):
        loaded = evaluate_cohesive(params, intact, 0.004 * NORMAL, 1e3).state
        result = evaluate_cohesive(params, loaded, -0.002 * NORMAL, 1e3)
        assert not result.loading
        assert result.effective_traction == pytest.approx(0.5 * loaded.max_traction
                                                          + 0.002 * params.floor_stiffness, rel=1e-4)

    def test_tangent_matches_finite_differences(self, params):
        layer = params.for_layer(100.0, 10.0)
        state = CohesiveState.initial(layer, NORMAL, np.zeros(3))
        d_opening = np.array([0.001, 0.0005, 0.003])
        dt = 1e-4
        result = evaluate_cohesive(layer, state, d_opening, dt)
        assert result.loading
        step = 1e-9
        numeric = np.empty((3, 3))
        for j in range(3):
            bump = np.zeros(3)
            bump[j] = step
            plus = evaluate_cohesive(layer, state, d_opening + bump, dt).traction
            minus = evaluate_cohesive(layer, state, d_opening - bump, dt).traction
            numeric[:, j] = (plus - minus) / (2 * step)
        np.testing.assert_allclose(np.linalg.inv(result.compliance), numeric, rtol=1e-5,
                                   atol=1e-6 * np.abs(numeric).max())

    def test_affine_residual(self, params, intact):
        result = evaluate_cohesive(params, intact, np.array([0.001, 0.0, 0.002]), 1e-4)
        reproduced = result.compliance @ (result.traction - intact.traction) + result.residual
        np.testing.assert_allclose(reproduced, result.state.opening - intact.opening, atol=1e-15)


class TestEnrichCellResponse:

    def test_no_layers_inverts_base(self, rng):
        compliance = np.linalg.inv(random_spd(rng, 6))
        residual = rng.normal(size=6)
        stiffness, stress_residual = enrich_cell_response(compliance, residual, [])
        np.testing.assert_allclose(stiffness @ compliance, np.eye(6), atol=1e-10)
        np.testing.assert_allclose(stress_residual, -stiffness @ residual, atol=1e-12)

    def test_enriched_law_reproduces_cell_kinematics(self, rng):
        compliance = np.linalg.inv(random_spd(rng, 6))
        residual = 1e-3 * rng.normal(size=6)
        layers = []
        for _ in range(2):
            normal = rng.normal(size=3)
            normal /= np.linalg.norm(normal)
            layers.append((rng.uniform(1.0, 100.0), normal, np.linalg.inv(random_spd(rng, 3)),
                           1e-4 * rng.normal(size=3)))
        stiffness, stress_residual = enrich_cell_response(compliance, residual, layers)

        stress = rng.normal(size=6)
        strain = compliance @ stress + residual
        for reciprocal, normal, layer_compliance, layer_residual in layers:
            operator = sym_dyad_operator(normal)
            opening = layer_compliance @ (operator.T @ stress) + layer_residual
            strain = strain + reciprocal * operator @ opening

        np.testing.assert_allclose(stiffness @ strain + stress_residual, stress, atol=1e-9)
        assert np.linalg.eigvalsh(stiffness).min() > 0.0

# tests/unit/services/test_material_service.py
import numpy as np
import pytest

from app.core.exceptions import ReturnMappingError, ValidationError
from app.core.tensors import IDENTITY_VEC
from app.models.materials import (
    PRESETS,
    ElasticMaterial,
    ExponentialHardening,
    PiecewiseLinearHardening,
    PlasticState,
    VonMisesMaterial,
)
from app.services.material_service import (
    equivalent_stress,
    evaluate_base,
    hardening_slope,
    yield_stress,
)

EPOXY_LAW = ExponentialHardening(initial_yield=0.025, ultimate=0.115, hardening_modulus=0.01, rate=140.0)


class TestHardeningLaws:

    def test_piecewise_breakpoint(self):
        law = PRESETS["matrix"].hardening
        assert yield_stress(law, 0.01) == pytest.approx(0.2)
        assert yield_stress(law, 0.0) == pytest.approx(0.1)
        assert yield_stress(law, 0.05) == pytest.approx(0.28)
        assert hardening_slope(law, 0.005) == 10.0
        assert hardening_slope(law, 0.02) == 2.0

    def test_exponential_initial_and_asymptotic(self):
        assert yield_stress(EPOXY_LAW, 0.0) == pytest.approx(0.025)
        assert hardening_slope(EPOXY_LAW, 1.0) == pytest.approx(0.01, rel=1e-12)
        assert yield_stress(EPOXY_LAW, 1.0) == pytest.approx(0.125, rel=1e-12)

    def test_negative_plastic_strain_rejected(self):
        with pytest.raises(ValidationError):
            yield_stress(EPOXY_LAW, -1e-3)

    def test_discontinuous_piecewise_rejected(self):
        with pytest.raises(ValidationError):
            PiecewiseLinearHardening(((0.0, 0.1, 10.0), (0.01, 0.3, 2.0)))

    def test_first_segment_must_start_at_zero(self):
        with pytest.raises(ValidationError):
            PiecewiseLinearHardening(((0.001, 0.1, 10.0),))

    def test_saturation_below_yield_rejected(self):
        with pytest.raises(ValidationError):
            ExponentialHardening(initial_yield=0.2, ultimate=0.1, hardening_modulus=0.01, rate=1.0)


class TestElastic:

    def test_linear_update(self, rng):
        material = ElasticMaterial.isotropic("particle", 500.0, 0.3)
        previous = PlasticState(stress=rng.normal(size=6))
        d_strain = 1e-3 * rng.normal(size=6)
        response = evaluate_base(material, previous, d_strain, 1e-3)
        np.testing.assert_allclose(response.stress, previous.stress + material.stiffness @ d_strain)
        np.testing.assert_allclose(response.residual, 0.0)
        np.testing.assert_allclose(response.compliance @ material.stiffness, np.eye(6), atol=1e-12)
        assert not response.plastic

    def test_orthotropic_preset_is_spd(self):
        fiber = PRESETS["fiber"]
        assert np.linalg.eigvalsh(fiber.stiffness).min() > 0.0
        assert fiber.reference_modulus == pytest.approx(19.8)

    def test_inadmissible_orthotropic_constants(self):
        with pytest.raises(ValidationError):
            ElasticMaterial.orthotropic("bad", 1.0, 1.0, 1.0, 0.9, 0.9, 0.9, 1.0, 1.0, 1.0)


class TestVonMises:

    @pytest.fixture
    def matrix(self):
        return PRESETS["matrix"]

    def plastic_state(self, material) -> PlasticState:
        response = evaluate_base(material, PlasticState(), np.array([3e-3, -1e-3, -1e-3, 0.0, 0.0, 0.0]), 1e-3)
        assert response.plastic
        return response.state

    def test_hydrostatic_stays_elastic(self, matrix):
        response = evaluate_base(matrix, PlasticState(), 0.01 * IDENTITY_VEC, 1e-3)
        assert not response.plastic
        assert response.state.effective_plastic_strain == 0.0

    def test_yield_consistency(self, matrix, rng):
        state = PlasticState()
        for _ in range(20):
            response = evaluate_base(matrix, state, 1e-3 * rng.normal(size=6), 1e-3)
            state = response.state
            gap = equivalent_stress(state.stress) - yield_stress(matrix.hardening, state.effective_plastic_strain)
            assert gap <= 1e-8

    def test_plastic_strain_monotone_and_dissipation_non_negative(self, matrix, rng):
        state = PlasticState()
        for _ in range(20):
            response = evaluate_base(matrix, state, 1e-3 * rng.normal(size=6), 1e-3)
            assert response.state.effective_plastic_strain >= state.effective_plastic_strain
            d_plastic = response.state.plastic_strain - state.plastic_strain
            assert float(response.stress @ d_plastic) >= -1e-14
            state = response.state

    def test_consistent_tangent_matches_finite_differences(self, matrix):
        state = self.plastic_state(matrix)
        d_strain = np.array([1e-3, -2e-4, -3e-4, 4e-4, 0.0, 2e-4])
        response = evaluate_base(matrix, state, d_strain, 1e-3)
        assert response.plastic
        tangent = np.linalg.inv(response.compliance)
        step = 1e-8
        numeric = np.empty((6, 6))
        for j in range(6):
            bump = np.zeros(6)
            bump[j] = step
            plus = evaluate_base(matrix, state, d_strain + bump, 1e-3).stress
            minus = evaluate_base(matrix, state, d_strain - bump, 1e-3).stress
            numeric[:, j] = (plus - minus) / (2 * step)
        np.testing.assert_allclose(tangent, numeric, rtol=1e-4, atol=1e-4 * np.abs(numeric).max())

    def test_affine_residual_reproduces_increment(self, matrix):
        state = self.plastic_state(matrix)
        d_strain = np.array([1e-3, 0.0, 0.0, 0.0, 0.0, 0.0])
        response = evaluate_base(matrix, state, d_strain, 1e-3)
        np.testing.assert_allclose(
            response.compliance @ (response.stress - state.stress) + response.residual, d_strain, atol=1e-15)

    def test_exponential_law_return(self):
        epoxy = VonMisesMaterial("epoxy", 3.8, 0.387, EPOXY_LAW)
        response = evaluate_base(epoxy, PlasticState(), np.array([0.05, -0.02, -0.02, 0.0, 0.0, 0.0]), 1e-3)
        state = response.state
        assert state.effective_plastic_strain > 0.0
        assert equivalent_stress(state.stress) == pytest.approx(
            yield_stress(EPOXY_LAW, state.effective_plastic_strain), rel=1e-10)

    def test_return_map_failure_raises(self, matrix, mocker):
        mocker.patch("app.services.material_service.RETURN_MAX_ITERATIONS", 0)
        mocker.patch("app.services.material_service.brentq", side_effect=RuntimeError("no bracket"))
        with pytest.raises(ReturnMappingError):
            evaluate_base(matrix, PlasticState(), np.array([3e-3, -1e-3, -1e-3, 0.0, 0.0, 0.0]), 1e-3)

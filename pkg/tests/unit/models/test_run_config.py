# tests/unit/models/test_run_config.py
import math

import numpy as np
import pytest
from pydantic import ValidationError as SchemaError

from app.core.exceptions import ValidationError as DomainError
from app.models.materials import PRESETS, ElasticMaterial, ExponentialHardening, VonMisesMaterial
from app.models.run_config import (
    CohesiveConfig,
    LoadSegment,
    MaterialConfig,
    OracleConfig,
    RunConfig,
    ScaleConfig,
    TrainConfig,
)


def run_document(**overrides):
    document = {
        "parameter_file": "params.json",
        "materials": {"1": {"preset": "particle"}, "2": {"preset": "matrix"}},
        "cohesive": {"2": {"t_c": 0.15, "G_c": 6e-4}},
        "scale": {"h": 0.008},
        "load_path": [{"steps": 10, "duration": 1.0, "strain": {"11": 0.01}}],
    }
    document.update(overrides)
    return document


class TestMaterialConfig:

    def test_preset(self):
        assert MaterialConfig(preset="matrix").build(2) is PRESETS["matrix"]

    def test_isotropic(self):
        material = MaterialConfig(kind="elastic_isotropic", youngs_modulus=70.0, poisson_ratio=0.3).build(1)
        assert isinstance(material, ElasticMaterial)
        assert material.name == "phase-1"

    def test_von_mises_with_exponential_law(self):
        material = MaterialConfig(
            kind="von_mises", name="epoxy", youngs_modulus=3.8, poisson_ratio=0.387,
            hardening={"kind": "exponential", "initial_yield": 0.025, "ultimate": 0.115,
                       "hardening_modulus": 0.01, "rate": 140.0},
        ).build(2)
        assert isinstance(material, VonMisesMaterial)
        assert isinstance(material.hardening, ExponentialHardening)

    def test_orthotropic(self):
        constants = {"e1": 245.0, "e2": 19.8, "e3": 19.8, "nu12": 0.28, "nu13": 0.28, "nu23": 0.67,
                     "g12": 29.2, "g13": 29.2, "g23": 5.9}
        material = MaterialConfig(kind="elastic_orthotropic", constants=constants).build(1)
        assert material.reference_modulus == pytest.approx(19.8)

    @pytest.mark.parametrize("fields", [
        {},
        {"preset": "matrix", "kind": "elastic_isotropic", "youngs_modulus": 1.0, "poisson_ratio": 0.2},
        {"preset": "unobtainium"},
        {"kind": "elastic_isotropic", "youngs_modulus": 1.0},
        {"kind": "von_mises", "youngs_modulus": 1.0, "poisson_ratio": 0.2},
        {"kind": "elastic_orthotropic", "constants": {"e1": 1.0}},
        {"kind": "von_mises", "youngs_modulus": 1.0, "poisson_ratio": 0.2, "hardening": {"kind": "piecewise"}},
    ])
    def test_invalid(self, fields):
        with pytest.raises(SchemaError):
            MaterialConfig(**fields)


class TestScaleAndCohesive:

    def test_sphere(self):
        np.testing.assert_allclose(ScaleConfig(h=0.5).build().matrix, 16.0 * np.eye(3))

    def test_lengths(self):
        np.testing.assert_allclose(ScaleConfig(lengths=(1.0, 2.0, 2.0)).build().matrix, np.diag([4.0, 1.0, 1.0]))

    @pytest.mark.parametrize("fields", [{}, {"h": 1.0, "lengths": (1.0, 1.0, 1.0)}])
    def test_exactly_one_source(self, fields):
        with pytest.raises(SchemaError):
            ScaleConfig(**fields)

    def test_cohesive_defaults(self):
        params = CohesiveConfig(t_c=0.1, G_c=3e-4).build()
        assert params.mode_ratio == 1.0
        assert params.relaxation_time == 1e-4
        assert params.failure_opening == pytest.approx(0.006)


class TestLoadSegment:

    def test_strain_increments_and_stress_ramp(self):
        segment = LoadSegment(steps=4, duration=2.0, strain={"11": 0.01, "12": 0.002}, stress={"22": 0.2})
        start_stress = np.array([0.0, 0.1, 0.0, 0.0, 0.0, 0.0])
        bc = segment.step_bc(np.zeros(6), start_stress, 2)
        assert bc.dt == 0.5
        assert bc.strain_controlled.tolist() == [True, False, False, False, False, True]
        assert bc.values[0] == pytest.approx(0.0025)
        assert bc.values[5] == pytest.approx(math.sqrt(2.0) * 0.0005)
        assert bc.values[1] == pytest.approx(0.15)
        np.testing.assert_allclose(bc.values[[2, 3, 4]], 0.0)

    def test_strain_increment_measured_from_segment_start(self):
        segment = LoadSegment(steps=5, duration=1.0, strain={"11": 0.0})
        bc = segment.step_bc(np.array([0.01, 0, 0, 0, 0, 0]), np.zeros(6), 1)
        assert bc.values[0] == pytest.approx(-0.002)

    def test_step_outside_segment(self):
        with pytest.raises(DomainError):
            LoadSegment(steps=2, duration=1.0, strain={"11": 0.01}).step_bc(np.zeros(6), np.zeros(6), 3)

    @pytest.mark.parametrize("fields", [
        {"steps": 0, "duration": 1.0},
        {"steps": 1, "duration": 0.0},
        {"steps": 1, "duration": 1.0, "strain": {"21": 0.01}},
        {"steps": 1, "duration": 1.0, "strain": {"11": 0.01}, "stress": {"11": 0.0}},
    ])
    def test_invalid(self, fields):
        with pytest.raises(SchemaError):
            LoadSegment(**fields)


class TestRunConfig:

    def test_builds_materials_and_cohesive(self):
        config = RunConfig.model_validate(run_document())
        assert set(config.build_materials()) == {1, 2}
        assert config.build_cohesive()[2].critical_traction == 0.15
        assert config.solver.max_refinements == 10
        assert config.output.stress_strain == "stress_strain.csv"

    @pytest.mark.parametrize("overrides", [
        {"schema_version": 2},
        {"load_path": []},
        {"extra": True},
        {"solver": {"max_iterations": 0}},
    ])
    def test_invalid(self, overrides):
        with pytest.raises(SchemaError):
            RunConfig.model_validate(run_document(**overrides))


class TestTrainConfig:

    def test_defaults(self):
        config = TrainConfig(depth=4, oracle=OracleConfig(kind="laminate"))
        assert config.training.n_train == 400
        assert config.output.parameters == "parameters.json"

    def test_phases_per_leaf(self):
        with pytest.raises(SchemaError):
            TrainConfig(depth=3, oracle={"kind": "laminate"}, phases=[1, 2])
        with pytest.raises(SchemaError):
            TrainConfig(depth=2, oracle={"kind": "laminate"}, phases=[1, 3])

    def test_network_oracle_needs_file(self):
        with pytest.raises(SchemaError):
            OracleConfig(kind="network")

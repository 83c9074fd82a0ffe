# tests/unit/external/test_oracles.py
import math

import numpy as np
import pytest

from app.core.exceptions import ValidationError
from app.core.tensors import isotropic_stiffness, rotation6
from app.external.oracles import LaminateOracle, ReferenceNetworkOracle
from app.models.network import BlockResponse
from app.services.network_service import MaterialNetwork, homogenize_block
from tests.conftest import make_params, random_spd


class TestLaminateOracle:

    def test_unrotated_laminate(self, rng):
        first, second = random_spd(rng, 6), random_spd(rng, 6)
        label = LaminateOracle(0.3).homogenize(first, second)
        expected = homogenize_block(BlockResponse(first), BlockResponse(second), 0.3).stiffness
        np.testing.assert_allclose(label, expected, rtol=1e-12, atol=1e-12)

    def test_identical_phases(self):
        stiffness = isotropic_stiffness(10.0, 0.2)
        label = LaminateOracle(0.6, (0.4, 1.1, -0.3)).homogenize(stiffness, stiffness)
        np.testing.assert_allclose(label, stiffness, rtol=1e-10, atol=1e-10)

    def test_layer_normal_follows_angles(self):
        stiff, soft = isotropic_stiffness(100.0, 0.3), isotropic_stiffness(1.0, 0.3)
        # a quarter turn about the 2-axis moves the layer normal onto the 1-axis
        label = LaminateOracle(0.5, (0.0, math.pi / 2, 0.0)).homogenize(stiff, soft)
        plain = LaminateOracle(0.5).homogenize(stiff, soft)
        assert label[0, 0] == pytest.approx(plain[2, 2], rel=1e-10)
        assert label[2, 2] == pytest.approx(plain[0, 0], rel=1e-10)
        q6 = rotation6((0.0, math.pi / 2, 0.0))
        np.testing.assert_allclose(label, q6.T @ plain @ q6, rtol=1e-10, atol=1e-10)

    @pytest.mark.parametrize("fraction", [0.0, 1.0, -0.5])
    def test_fraction_outside_open_interval(self, fraction):
        with pytest.raises(ValidationError):
            LaminateOracle(fraction)


class TestReferenceNetworkOracle:

    def test_single_node_returns_first_phase(self, rng):
        first, second = random_spd(rng, 6), random_spd(rng, 6)
        label = ReferenceNetworkOracle(make_params(1, z=[1.0], phases=[1])).homogenize(first, second)
        np.testing.assert_allclose(label, first, rtol=1e-12)

    def test_reproduces_forward_pass(self, rng):
        params = make_params(4, z=rng.uniform(0.1, 1.0, 8), angles=rng.uniform(-math.pi, math.pi, (15, 3)))
        first, second = random_spd(rng, 6), random_spd(rng, 6)
        label = ReferenceNetworkOracle(params).homogenize(first, second)
        network = MaterialNetwork(params)
        by_phase = {1: first, 2: second}
        expected = network.forward_pass({
            leaf: BlockResponse(by_phase[int(params.phases[leaf])]) for leaf in network.active_leaves
        }).response.stiffness
        np.testing.assert_array_equal(label, expected)

    def test_rejects_other_phase_ids(self):
        with pytest.raises(ValidationError):
            ReferenceNetworkOracle(make_params(2, phases=[1, 3]))

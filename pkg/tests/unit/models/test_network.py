# tests/unit/models/test_network.py
import numpy as np
import pytest

from app.core.exceptions import ValidationError
from app.models.network import child_fraction, node_weights
from tests.conftest import make_params


class TestNodeWeights:

    def test_relu_and_block_sums(self):
        weights = node_weights([0.5, -0.2, 0.3, 0.4])
        np.testing.assert_allclose(weights[3:], np.array([0.5, 0.0, 0.3, 0.4]) / 1.2)
        assert weights[0] == pytest.approx(1.0)
        assert weights[1] == pytest.approx(5.0 / 12.0)
        assert weights[2] == pytest.approx(7.0 / 12.0)

    def test_all_nonpositive_rejected(self):
        with pytest.raises(ValidationError):
            node_weights([0.0, -1.0])


class TestChildFraction:

    def test_matches_first_child_share(self):
        weights = node_weights([0.5, -0.2, 0.3, 0.4])
        assert child_fraction(weights, 0) == pytest.approx(5.0 / 12.0)
        assert child_fraction(weights, 1) == pytest.approx(1.0)
        assert child_fraction(weights, 2) == pytest.approx(3.0 / 7.0)

    def test_uniform_activations_split_evenly(self):
        weights = make_params(4).node_weights()
        for node in range(7):
            assert child_fraction(weights, node) == pytest.approx(0.5)

    def test_first_child_volume_for_random_activations(self, rng):
        params = make_params(4, z=rng.uniform(0.1, 1.0, 8))
        weights = params.node_weights()
        leaves = params.leaf_weights()
        # node 1 spans leaves 0-3, its first child (node 3) leaves 0-1
        expected = leaves[:2].sum() / leaves[:4].sum()
        assert child_fraction(weights, 1) == pytest.approx(expected, rel=1e-12)

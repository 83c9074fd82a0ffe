# tests/integration/test_training_runs.py
"""
Offline training runs against analytical and network-generated labels.
"""
import pytest

from app.external.oracles import LaminateOracle, ReferenceNetworkOracle
from app.models.training import TrainingConfig
from app.services.training_service import TrainingService
from tests.conftest import make_params

pytestmark = pytest.mark.slow


def run(oracle, init, learning_rate, rng):
    config = TrainingConfig(n_train=50, n_test=10, epochs=30, batch_size=10, learning_rate=learning_rate,
                            divergence_window=30, seed=3)
    service = TrainingService(config)
    train_set, test_set = service.generate(oracle, rng)
    return service.train(train_set, test_set, init)


class TestDeeperStudent:

    def test_fits_labels_of_a_shallower_network(self, rng):
        oracle = ReferenceNetworkOracle(make_params(2, z=[0.3, 0.7]))
        init = make_params(4, z=[1.0 / 8.0] * 8)
        # four leaves per phase share each update, so the step is a quarter of the depth-2 one
        params, report = run(oracle, init, 0.025, rng)
        assert report.final_test_cost < 1e-4
        assert params.leaf_weights()[::2].sum() == pytest.approx(0.3, abs=0.02)

    def test_depth_six_reproduces_laminate_within_one_percent(self, rng):
        init = make_params(6, z=[1.0 / 32.0] * 32)
        params, report = run(LaminateOracle(0.3), init, 0.1 / 16.0, rng)
        # J is half the mean squared relative error
        assert (2.0 * report.final_test_cost) ** 0.5 < 0.01
        assert report.records[-1].train_cost < report.records[0].train_cost

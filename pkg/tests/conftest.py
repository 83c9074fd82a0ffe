import numpy as np
import pytest

from app.core.config import SolverSettings
from app.models.cohesive import CohesiveParams
from app.models.materials import PRESETS, ElasticMaterial
from app.models.network import NetworkParams


@pytest.fixture
def solver_settings() -> SolverSettings:
    return SolverSettings()


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator; every test gets a fresh stream."""
    return np.random.default_rng(20221018)


@pytest.fixture
def particle_matrix():
    """Phase 1 particle, phase 2 elastic-plastic matrix (particle-reinforced study)."""
    return {1: PRESETS["particle"], 2: PRESETS["matrix"]}


@pytest.fixture
def elastic_pair():
    return {
        1: ElasticMaterial.isotropic("stiff", 500.0, 0.3),
        2: ElasticMaterial.isotropic("soft", 100.0, 0.3),
    }


@pytest.fixture
def matrix_cohesive() -> CohesiveParams:
    """t_c = 0.15 GPa, G_c = 6e-4 GPa mm, β = 1, τ = 1e-4 ms."""
    return CohesiveParams(critical_traction=0.15, fracture_energy=6e-4, mode_ratio=1.0, relaxation_time=1e-4)


def random_spd(rng: np.random.Generator, size: int, shift: float = 1.0) -> np.ndarray:
    root = rng.normal(size=(size, size))
    return root @ root.T + shift * np.eye(size)


def make_params(depth: int, z=None, angles=None, phases=None) -> NetworkParams:
    n_leaves = 2 ** (depth - 1)
    n_nodes = 2 ** depth - 1
    z = np.ones(n_leaves) if z is None else np.asarray(z, dtype=float)
    angles = np.zeros((n_nodes, 3)) if angles is None else np.asarray(angles, dtype=float)
    phases = [1 + (k % 2) for k in range(n_leaves)] if phases is None else phases
    return NetworkParams(depth, z, angles, np.asarray(phases, dtype=int))


@pytest.fixture
def laminate_params() -> NetworkParams:
    """Depth-2 network: one block of phase 1 / phase 2 at f1 = 0.3."""
    return make_params(2, z=[0.3, 0.7])

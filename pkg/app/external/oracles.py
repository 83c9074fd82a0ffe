"""
Label oracles standing in for direct numerical simulation of the RVE.
"""
import logging
from typing import Protocol

import numpy as np

from app.core.exceptions import ValidationError
from app.core.tensors import rotation6
from app.models.network import BlockResponse, NetworkParams
from app.services.network_service import MaterialNetwork, homogenize_block

logger = logging.getLogger(__name__)


class LabelOracle(Protocol):
    def homogenize(self, first: np.ndarray, second: np.ndarray) -> np.ndarray:
        ...


class LaminateOracle:
    """Exact two-phase laminate with layer normal ``R^T e3`` for Euler angles ``angles``."""

    def __init__(self, fraction: float, angles=(0.0, 0.0, 0.0)):
        if not 0.0 < fraction < 1.0:
            raise ValidationError(f"Laminate fraction {fraction} outside (0, 1)")
        self.fraction = fraction
        self._rotation = rotation6(angles)

    def homogenize(self, first: np.ndarray, second: np.ndarray) -> np.ndarray:
        q6 = self._rotation
        local = homogenize_block(
            BlockResponse(q6 @ first @ q6.T),
            BlockResponse(q6 @ second @ q6.T),
            self.fraction,
        )
        return q6.T @ local.stiffness @ q6


class ReferenceNetworkOracle:
    """Frozen network whose leaves of phase 1 and 2 take the sampled stiffnesses."""

    def __init__(self, params: NetworkParams):
        if not set(params.phases.tolist()) <= {1, 2}:
            raise ValidationError("Reference network leaves must use phase ids 1 and 2")
        self.params = params
        self._network = MaterialNetwork(params)

    def homogenize(self, first: np.ndarray, second: np.ndarray) -> np.ndarray:
        by_phase = {1: first, 2: second}
        responses = {
            leaf: BlockResponse(by_phase[int(self.params.phases[leaf])])
            for leaf in self._network.active_leaves
        }
        return self._network.forward_pass(responses).response.stiffness

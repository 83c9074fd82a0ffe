"""
Material-network parameter models and tree bookkeeping.

The binary tree is stored flat in heap order: node 0 is the top node, the
children of node ``k`` are ``2k + 1`` and ``2k + 2``, and the ``2^(N-1)``
bottom-layer nodes occupy the tail of the array.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np

from app.core.exceptions import ValidationError
from app.core.tensors import euler_matrix

PARAMETER_FORMAT = "dmn-parameters"
PARAMETER_VERSION = 1


def num_leaves_for(depth: int) -> int:
    return 2 ** (depth - 1)


def num_nodes_for(depth: int) -> int:
    return 2 ** depth - 1


def node_weights(z: np.ndarray) -> np.ndarray:
    """
    Node weights from bottom-layer activations.

    Leaf weights are ``max(0, z)`` normalized to sum to one; every block
    weight is the sum of its children's.

    Args:
        z: Activations, one per bottom-layer node (length a power of two).

    Returns:
        Weights for all nodes in heap order, top weight equal to 1.

    Raises:
        ValidationError: If no activation is positive.
    """
    z = np.asarray(z, dtype=float)
    relu = np.maximum(z, 0.0)
    total = relu.sum()
    if total <= 0.0:
        raise ValidationError("At least one activation must be positive")
    n_leaves = z.size
    weights = np.zeros(2 * n_leaves - 1)
    weights[n_leaves - 1:] = relu / total
    for node in range(n_leaves - 2, -1, -1):
        weights[node] = weights[2 * node + 1] + weights[2 * node + 2]
    return weights


def child_fraction(weights: np.ndarray, node: int) -> float:
    """Volume fraction f1 of the first child of block ``node``."""
    return float(weights[2 * node + 1] / weights[node])


@dataclass
class NetworkParams:
    """Trainable parameters of a depth-N material network."""
    depth: int
    z: np.ndarray
    angles: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        if self.depth < 1:
            raise ValidationError("Network depth must be at least 1")
        self.z = np.asarray(self.z, dtype=float).reshape(-1)
        self.angles = np.asarray(self.angles, dtype=float).reshape(-1, 3)
        self.phases = np.asarray(self.phases, dtype=int).reshape(-1)
        if self.z.size != self.num_leaves:
            raise ValidationError(f"Expected {self.num_leaves} activations, got {self.z.size}")
        if self.angles.shape[0] != self.num_nodes:
            raise ValidationError(f"Expected {self.num_nodes} angle triples, got {self.angles.shape[0]}")
        if self.phases.size != self.num_leaves:
            raise ValidationError(f"Expected {self.num_leaves} phase ids, got {self.phases.size}")
        if not (np.all(np.isfinite(self.z)) and np.all(np.isfinite(self.angles))):
            raise ValidationError("Network parameters must be finite")

    # --- tree indexing ---

    @property
    def num_leaves(self) -> int:
        return num_leaves_for(self.depth)

    @property
    def num_nodes(self) -> int:
        return num_nodes_for(self.depth)

    @property
    def first_leaf(self) -> int:
        return self.num_leaves - 1

    def is_leaf(self, node: int) -> bool:
        return node >= self.first_leaf

    def leaf_position(self, node: int) -> int:
        return node - self.first_leaf

    def leaf_node(self, position: int) -> int:
        return position + self.first_leaf

    @staticmethod
    def children(node: int) -> Tuple[int, int]:
        return 2 * node + 1, 2 * node + 2

    # --- derived quantities ---

    def node_weights(self) -> np.ndarray:
        return node_weights(self.z)

    def leaf_weights(self) -> np.ndarray:
        return self.node_weights()[self.first_leaf:]

    def active_mask(self) -> np.ndarray:
        return self.node_weights() > 0.0

    @property
    def active_node_count(self) -> int:
        return int(np.count_nonzero(self.active_mask()))

    def rotations(self) -> List[np.ndarray]:
        """Local 3x3 rotation of every node relative to its parent frame."""
        return [euler_matrix(angle) for angle in self.angles]

    def global_orientations(self) -> List[np.ndarray]:
        """Accumulated orientation O of every node (node-frame = O @ global)."""
        local = self.rotations()
        orientations: List[np.ndarray] = [local[0]]
        for node in range(1, self.num_nodes):
            orientations.append(local[node] @ orientations[(node - 1) // 2])
        return orientations

    def normalized(self) -> "NetworkParams":
        """Copy with activations scaled so that sum(max(0, z)) = 1."""
        total = np.maximum(self.z, 0.0).sum()
        if total <= 0.0:
            raise ValidationError("At least one activation must be positive")
        return NetworkParams(self.depth, self.z / total, self.angles.copy(), self.phases.copy())

    def copy(self) -> "NetworkParams":
        return NetworkParams(self.depth, self.z.copy(), self.angles.copy(), self.phases.copy())

    def flatten(self) -> np.ndarray:
        """Parameter vector [z, angles] used by the optimizer."""
        return np.concatenate([self.z, self.angles.reshape(-1)])

    def with_vector(self, vector: np.ndarray) -> "NetworkParams":
        vector = np.asarray(vector, dtype=float)
        z = vector[:self.num_leaves]
        angles = vector[self.num_leaves:].reshape(self.num_nodes, 3)
        return NetworkParams(self.depth, z.copy(), angles.copy(), self.phases.copy())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format": PARAMETER_FORMAT,
            "version": PARAMETER_VERSION,
            "dimension": 3,
            "depth": self.depth,
            "z": self.z.tolist(),
            "angles": self.angles.tolist(),
            "phases": self.phases.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NetworkParams":
        return cls(
            depth=int(data["depth"]),
            z=np.array(data["z"], dtype=float),
            angles=np.array(data["angles"], dtype=float),
            phases=np.array(data["phases"], dtype=int),
        )


@dataclass
class Network2DParams:
    """Parameters of a planar network: activations and one in-plane angle per node."""
    depth: int
    z: np.ndarray
    theta: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        if self.depth < 1:
            raise ValidationError("Network depth must be at least 1")
        self.z = np.asarray(self.z, dtype=float).reshape(-1)
        self.theta = np.asarray(self.theta, dtype=float).reshape(-1)
        self.phases = np.asarray(self.phases, dtype=int).reshape(-1)
        if self.z.size != num_leaves_for(self.depth) or self.phases.size != num_leaves_for(self.depth):
            raise ValidationError("Activation and phase arrays must have one entry per bottom node")
        if self.theta.size != num_nodes_for(self.depth):
            raise ValidationError("Expected one rotation angle per node")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format": PARAMETER_FORMAT,
            "version": PARAMETER_VERSION,
            "dimension": 2,
            "depth": self.depth,
            "z": self.z.tolist(),
            "theta": self.theta.tolist(),
            "phases": self.phases.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Network2DParams":
        return cls(
            depth=int(data["depth"]),
            z=np.array(data["z"], dtype=float),
            theta=np.array(data["theta"], dtype=float),
            phases=np.array(data["phases"], dtype=int),
        )


@dataclass
class BlockResponse:
    """Linearized response ``Δσ = C Δε + δσ`` of a node."""
    stiffness: np.ndarray
    residual: np.ndarray = field(default_factory=lambda: np.zeros(6))

    def to_parent(self, q6: np.ndarray) -> "BlockResponse":
        """Express the response in the parent frame of a node with rotation ``q6``."""
        return BlockResponse(q6.T @ self.stiffness @ q6, q6.T @ self.residual)

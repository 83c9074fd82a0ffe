"""
Material-network homogenization: laminate building blocks, forward
propagation of stiffness and residual stress, backward propagation of
strain and stress, and the planar-to-spatial parameter transfer.

Inside a block the interface normal is e3. The in-plane strain components
(11, 22, 12) are continuous across the two children and the traction
components (33, 23, 13) are in equilibrium. The laminate is solved in the
mixed variables x = (ε_a, σ_b), y = (σ_a, ε_b), in which both children share
x and the block response is the volume average of the children's y.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from app.core.exceptions import SingularInterfaceError, StaleCacheError, ValidationError
from app.core.tensors import rotation6_from_matrix, symmetrize
from app.models.network import BlockResponse, Network2DParams, NetworkParams, child_fraction

logger = logging.getLogger(__name__)

# Mandel indices of the in-plane (kinematic) and traction components
KINEMATIC = np.array([0, 1, 5])
TRACTION = np.array([2, 3, 4])

SINGULAR_CONDITION = 1e14


def partial_inverse(matrix: np.ndarray, residual: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Exchange the roles of ε_b and σ_b in an affine relation ``σ = C ε + δ``.

    The result ``(M, m)`` satisfies ``y = M x + m`` with ``x = (ε_a, σ_b)``
    and ``y = (σ_a, ε_b)``, stored in the same index layout as ``C``. The
    map is an involution: applying it to ``(M, m)`` returns ``(C, δ)``.

    Raises:
        SingularInterfaceError: If the traction sub-block cannot be inverted.
    """
    if residual is None:
        residual = np.zeros(6)
    a, b = KINEMATIC, TRACTION
    c_bb = matrix[np.ix_(b, b)]
    if not np.all(np.isfinite(c_bb)) or np.linalg.cond(c_bb) > SINGULAR_CONDITION:
        raise SingularInterfaceError("Interface sub-block is singular")
    s = np.linalg.inv(c_bb)
    c_ab = matrix[np.ix_(a, b)]
    c_ba = matrix[np.ix_(b, a)]

    result = np.empty((6, 6))
    result[np.ix_(a, a)] = matrix[np.ix_(a, a)] - c_ab @ s @ c_ba
    result[np.ix_(a, b)] = c_ab @ s
    result[np.ix_(b, a)] = -s @ c_ba
    result[np.ix_(b, b)] = s

    shifted = np.empty(6)
    shifted[a] = residual[a] - c_ab @ s @ residual[b]
    shifted[b] = -s @ residual[b]
    return result, shifted


@dataclass
class LaminateSolution:
    """Mixed-form operators of one homogenized block, kept for de-homogenization."""
    fraction: float
    mixed: Tuple[np.ndarray, np.ndarray]
    offsets: Tuple[np.ndarray, np.ndarray]
    response: BlockResponse

    def split(self, strain: np.ndarray, stress: np.ndarray):
        """Child strains and stresses (block frame) for a block state."""
        x = np.empty(6)
        x[KINEMATIC] = strain[KINEMATIC]
        x[TRACTION] = stress[TRACTION]
        children = []
        for mixed, offset in zip(self.mixed, self.offsets):
            y = mixed @ x + offset
            child_strain = x.copy()
            child_strain[TRACTION] = y[TRACTION]
            child_stress = y.copy()
            child_stress[TRACTION] = x[TRACTION]
            children.append((child_strain, child_stress))
        return children


def solve_laminate(first: BlockResponse, second: BlockResponse, f1: float) -> LaminateSolution:
    if not 0.0 < f1 < 1.0:
        raise ValidationError(f"Child fraction {f1} outside (0, 1)")
    m1, o1 = partial_inverse(first.stiffness, first.residual)
    m2, o2 = partial_inverse(second.stiffness, second.residual)
    f2 = 1.0 - f1
    stiffness, residual = partial_inverse(f1 * m1 + f2 * m2, f1 * o1 + f2 * o2)
    return LaminateSolution(
        fraction=f1,
        mixed=(m1, m2),
        offsets=(o1, o2),
        response=BlockResponse(symmetrize(stiffness), residual),
    )


def homogenize_block(first: BlockResponse, second: BlockResponse, f1: float) -> BlockResponse:
    """
    Exact two-layer laminate response in the block-local frame.

    Args:
        first: Response of the first child, in the block frame.
        second: Response of the second child, in the block frame.
        f1: Volume fraction of the first child.

    Returns:
        Homogenized stiffness and residual stress.
    """
    return solve_laminate(first, second, f1).response


@dataclass
class ForwardResult:
    """Top response (global frame) plus the per-block cache of one forward pass."""
    response: BlockResponse
    revision: int
    blocks: Dict[int, LaminateSolution] = field(default_factory=dict)
    pass_through: Dict[int, int] = field(default_factory=dict)


class MaterialNetwork:
    """
    Online evaluator of a material network.

    Holds the fixed weights and rotations of one parameter set. Every forward
    pass bumps the revision counter, so a backward pass can only consume the
    cache of the most recent forward pass.
    """

    def __init__(self, params: NetworkParams):
        self.params = params
        self.weights = params.node_weights()
        self.active = self.weights > 0.0
        self.rotations6 = [rotation6_from_matrix(rotation) for rotation in params.rotations()]
        self._revision = 0
        self.operation_count = 0

    @property
    def revision(self) -> int:
        return self._revision

    @property
    def active_leaves(self):
        first = self.params.first_leaf
        return [node - first for node in range(first, self.params.num_nodes) if self.active[node]]

    def invalidate(self) -> None:
        self._revision += 1

    def leaf_frame_rotation(self, leaf: int) -> np.ndarray:
        """Mandel rotation from the global frame to the frame of a leaf."""
        node = self.params.leaf_node(leaf)
        q6 = self.rotations6[node]
        while node > 0:
            node = (node - 1) // 2
            q6 = q6 @ self.rotations6[node]
        return q6

    def forward_pass(self, leaf_responses: Mapping[int, BlockResponse]) -> ForwardResult:
        """
        Propagate leaf responses to the top node.

        Args:
            leaf_responses: Response of every active leaf, keyed by leaf
                position and expressed in the leaf's own frame.

        Returns:
            ForwardResult with (C^macro, δσ^macro) in the global frame.
        """
        params = self.params
        responses: Dict[int, BlockResponse] = {}
        result = ForwardResult(response=None, revision=0)

        for node in range(params.num_nodes - 1, -1, -1):
            if not self.active[node]:
                continue
            self.operation_count += 1
            if params.is_leaf(node):
                leaf = params.leaf_position(node)
                if leaf not in leaf_responses:
                    raise ValidationError(f"Missing response for active leaf {leaf}")
                responses[node] = leaf_responses[leaf]
                continue

            first, second = params.children(node)
            live = [child for child in (first, second) if self.active[child]]
            if len(live) == 1:
                result.pass_through[node] = live[0]
                responses[node] = responses[live[0]].to_parent(self.rotations6[live[0]])
                continue
            solution = solve_laminate(
                responses[first].to_parent(self.rotations6[first]),
                responses[second].to_parent(self.rotations6[second]),
                child_fraction(self.weights, node),
            )
            result.blocks[node] = solution
            responses[node] = solution.response

        self._revision += 1
        result.revision = self._revision
        result.response = responses[0].to_parent(self.rotations6[0])
        return result

    def backward_pass(
        self,
        forward: ForwardResult,
        d_strain: np.ndarray,
        d_stress: np.ndarray,
    ) -> Dict[int, Tuple[np.ndarray, np.ndarray]]:
        """
        De-homogenize a macro increment down to the leaves.

        Returns:
            Mapping leaf position -> (Δε, Δσ) in the leaf frame.

        Raises:
            StaleCacheError: If ``forward`` is not the latest forward pass.
        """
        if forward is None or forward.revision != self._revision:
            raise StaleCacheError(self._revision, None if forward is None else forward.revision)

        params = self.params
        states = {0: (self.rotations6[0] @ d_strain, self.rotations6[0] @ d_stress)}
        leaves: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}

        for node in range(params.num_nodes):
            if node not in states:
                continue
            self.operation_count += 1
            strain, stress = states[node]
            if params.is_leaf(node):
                leaves[params.leaf_position(node)] = (strain, stress)
            elif node in forward.pass_through:
                child = forward.pass_through[node]
                q6 = self.rotations6[child]
                states[child] = (q6 @ strain, q6 @ stress)
            elif node in forward.blocks:
                pairs = forward.blocks[node].split(strain, stress)
                for child, (child_strain, child_stress) in zip(params.children(node), pairs):
                    q6 = self.rotations6[child]
                    states[child] = (q6 @ child_strain, q6 @ child_stress)
        return leaves


def transfer_2d_to_3d(params2d: Network2DParams) -> NetworkParams:
    """
    Lift planar network parameters to a spatial network.

    Activations and phases are unchanged. Every node below the top takes
    (α, β, γ) = (θ, 0, 0); the top node takes (θ, π/2, 0), which turns all
    cutting planes parallel to the 3-axis.
    """
    angles = np.zeros((params2d.theta.size, 3))
    angles[:, 0] = params2d.theta
    angles[0, 1] = math.pi / 2.0
    logger.info("Transferred planar network of depth %d", params2d.depth)
    return NetworkParams(params2d.depth, params2d.z.copy(), angles, params2d.phases.copy())

"""
Offline training of material networks on linear-elastic homogenization data.

Predictions run the same laminate recursion as the online network, written
on plain stiffness matrices so that the reverse pass can reuse every
intermediate. Gradients are exact: each laminate is a composition of the
partial-inversion map, a convex combination and the inverse map, and each
of these is differentiated in closed form.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import ApplicationError, TrainingDivergedError, ValidationError
from app.core.tensors import (
    euler_matrix,
    euler_matrix_derivatives,
    is_positive_definite,
    orthotropic_compliance,
    rotation6_derivative,
    rotation6_from_matrix,
)
from app.external.oracles import LabelOracle
from app.models.network import NetworkParams, num_leaves_for, num_nodes_for
from app.models.training import EpochRecord, PhaseRanges, TrainingConfig, TrainingReport, TrainingSample
from app.services.network_service import KINEMATIC, TRACTION, partial_inverse

logger = logging.getLogger(__name__)

MAX_SAMPLING_ATTEMPTS = 1000


# --- data ---

def _log_uniform(rng: np.random.Generator, bounds: Tuple[float, float], size: int) -> np.ndarray:
    low, high = bounds
    return np.exp(rng.uniform(math.log(low), math.log(high), size))


def _sample_phase(rng: np.random.Generator, ranges: PhaseRanges) -> np.ndarray:
    for _ in range(MAX_SAMPLING_ATTEMPTS):
        moduli = _log_uniform(rng, ranges.moduli, 3)
        shear = _log_uniform(rng, ranges.shear, 3)
        poisson = _log_uniform(rng, ranges.poisson, 3)
        compliance = orthotropic_compliance(
            moduli[0], moduli[1], moduli[2],
            poisson[0], poisson[1], poisson[2],
            shear[0], shear[1], shear[2],
        )
        if is_positive_definite(compliance):
            return np.linalg.inv(compliance)
    raise ValidationError("Sampling ranges admit no thermodynamically admissible phase")


def sample_phases(rng: np.random.Generator, ranges: Sequence[PhaseRanges]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Draw one pair of orthotropic phase stiffnesses.

    Constants are log-uniform within the per-phase bounds; draws whose
    compliance is not positive definite are rejected and redrawn.
    """
    first, second = ranges
    return _sample_phase(rng, first), _sample_phase(rng, second)


def oracle_labels(pairs: Sequence[Tuple[np.ndarray, np.ndarray]], oracle: LabelOracle) -> List[TrainingSample]:
    """Label every phase pair with the oracle's homogenized stiffness."""
    samples = []
    for position, (first, second) in enumerate(pairs):
        try:
            label = oracle.homogenize(first, second)
        except (ApplicationError, np.linalg.LinAlgError) as exc:
            logger.warning("Skipping sample %d: oracle failed (%s)", position, exc)
            continue
        samples.append(TrainingSample((first, second), label))
    return samples


def initial_params(depth: int, rng: np.random.Generator, phases: Optional[Sequence[int]] = None) -> NetworkParams:
    """Angles uniform in [-π, π], activations uniform in (0, 1] then normalized."""
    n_leaves = num_leaves_for(depth)
    if phases is None:
        phases = [1 + (leaf % 2) for leaf in range(n_leaves)]
    angles = rng.uniform(-math.pi, math.pi, (num_nodes_for(depth), 3))
    z = 1.0 - rng.random(n_leaves)
    return NetworkParams(depth, z, angles, np.asarray(phases, dtype=int)).normalized()


# --- differentiable forward model ---

class _Structure:
    """Per-parameter-set quantities shared by all samples of a batch."""

    def __init__(self, params: NetworkParams):
        self.params = params
        self.sums = np.zeros(params.num_nodes)
        self.sums[params.first_leaf:] = np.maximum(params.z, 0.0)
        for node in range(params.first_leaf - 1, -1, -1):
            self.sums[node] = self.sums[2 * node + 1] + self.sums[2 * node + 2]
        if self.sums[0] <= 0.0:
            raise ValidationError("At least one activation must be positive")
        self.active = self.sums > 0.0

        self.q6 = []
        self.dq6 = []
        for angle in params.angles:
            rotation = euler_matrix(angle)
            self.q6.append(rotation6_from_matrix(rotation))
            self.dq6.append([rotation6_derivative(rotation, d) for d in euler_matrix_derivatives(angle)])

        self.leaf_range: Dict[int, Tuple[int, int]] = {}
        for node in range(params.num_nodes):
            low = high = node
            while not params.is_leaf(low):
                low, high = 2 * low + 1, 2 * high + 2
            self.leaf_range[node] = (params.leaf_position(low), params.leaf_position(high) + 1)


@dataclass
class _Block:
    children: Tuple[int, ...]
    rotated: Tuple[np.ndarray, ...]
    mixed: Tuple[np.ndarray, ...] = ()
    averaged: Optional[np.ndarray] = None
    fraction: float = 1.0


def _forward(structure: _Structure, sample: TrainingSample):
    params = structure.params
    phase_stiffness = {1: sample.phase_stiffness[0], 2: sample.phase_stiffness[1]}
    stiffness: Dict[int, np.ndarray] = {}
    blocks: Dict[int, _Block] = {}

    for node in range(params.num_nodes - 1, -1, -1):
        if not structure.active[node]:
            continue
        if params.is_leaf(node):
            stiffness[node] = phase_stiffness[int(params.phases[params.leaf_position(node)])]
            continue
        live = tuple(c for c in params.children(node) if structure.active[c])
        rotated = tuple(structure.q6[c].T @ stiffness[c] @ structure.q6[c] for c in live)
        if len(live) == 1:
            blocks[node] = _Block(live, rotated)
            stiffness[node] = rotated[0]
            continue
        fraction = structure.sums[live[0]] / structure.sums[node]
        mixed = tuple(partial_inverse(x)[0] for x in rotated)
        averaged = fraction * mixed[0] + (1.0 - fraction) * mixed[1]
        blocks[node] = _Block(live, rotated, mixed, averaged, fraction)
        stiffness[node] = partial_inverse(averaged)[0]

    top = structure.q6[0].T @ stiffness[0] @ structure.q6[0]
    return top, stiffness, blocks


def _partial_inverse_adjoint(matrix: np.ndarray, adjoint: np.ndarray) -> np.ndarray:
    """Pull an adjoint of ``partial_inverse(matrix)`` back onto ``matrix``."""
    a, b = KINEMATIC, TRACTION
    s = np.linalg.inv(matrix[np.ix_(b, b)])
    x_ab, x_ba = matrix[np.ix_(a, b)], matrix[np.ix_(b, a)]
    g_aa, g_ab = adjoint[np.ix_(a, a)], adjoint[np.ix_(a, b)]
    g_ba, g_bb = adjoint[np.ix_(b, a)], adjoint[np.ix_(b, b)]

    g_s = -x_ab.T @ g_aa @ x_ba.T + x_ab.T @ g_ab - g_ba @ x_ba.T + g_bb
    result = np.empty((6, 6))
    result[np.ix_(a, a)] = g_aa
    result[np.ix_(a, b)] = -g_aa @ (s @ x_ba).T + g_ab @ s.T
    result[np.ix_(b, a)] = -(x_ab @ s).T @ g_aa - s.T @ g_ba
    result[np.ix_(b, b)] = -s.T @ g_s @ s.T
    return result


def _relative_error(prediction: np.ndarray, label: np.ndarray) -> float:
    return float(np.sum((label - prediction) ** 2) / np.sum(label ** 2))


def predict(params: NetworkParams, sample: TrainingSample) -> np.ndarray:
    """Homogenized stiffness of the network for one phase pair."""
    return _forward(_Structure(params), sample)[0]


def cost(params: NetworkParams, batch: Sequence[TrainingSample]) -> float:
    """J = 1/(2 N_s) Σ ||C_label - C_pred||² / ||C_label||² (Frobenius)."""
    if not batch:
        return 0.0
    structure = _Structure(params)
    total = sum(_relative_error(_forward(structure, sample)[0], sample.label) for sample in batch)
    return total / (2.0 * len(batch))


def gradient(params: NetworkParams, batch: Sequence[TrainingSample]) -> np.ndarray:
    """
    Analytic dJ/d(z, angles), laid out like ``NetworkParams.flatten()``.

    Activations at or below zero receive a zero gradient.
    """
    structure = _Structure(params)
    grad_relu = np.zeros(params.num_leaves)
    grad_angles = np.zeros((params.num_nodes, 3))

    def rotate_back(node: int, own: np.ndarray, adjoint: np.ndarray) -> np.ndarray:
        # X = Q^T C Q
        q6 = structure.q6[node]
        grad_q = own @ q6 @ adjoint.T + own.T @ q6 @ adjoint
        for k in range(3):
            grad_angles[node, k] += float(np.sum(grad_q * structure.dq6[node][k]))
        return q6 @ adjoint @ q6.T

    for sample in batch:
        top, stiffness, blocks = _forward(structure, sample)
        norm_sq = float(np.sum(sample.label ** 2))
        adjoints = {0: rotate_back(0, stiffness[0], (top - sample.label) / (len(batch) * norm_sq))}

        for node in range(params.num_nodes):
            if node not in adjoints or node not in blocks:
                continue
            block = blocks[node]
            if len(block.children) == 1:
                child = block.children[0]
                adjoints[child] = rotate_back(child, stiffness[child], adjoints[node])
                continue
            grad_avg = _partial_inverse_adjoint(block.averaged, adjoints[node])
            weights = (block.fraction, 1.0 - block.fraction)
            for child, rotated, weight in zip(block.children, block.rotated, weights):
                grad_rotated = _partial_inverse_adjoint(rotated, weight * grad_avg)
                adjoints[child] = rotate_back(child, stiffness[child], grad_rotated)

            grad_fraction = float(np.sum(grad_avg * (block.mixed[0] - block.mixed[1])))
            first, second = block.children
            total = structure.sums[node]
            low, high = structure.leaf_range[first]
            grad_relu[low:high] += grad_fraction * structure.sums[second] / total ** 2
            low, high = structure.leaf_range[second]
            grad_relu[low:high] -= grad_fraction * structure.sums[first] / total ** 2

    grad_z = np.where(params.z > 0.0, grad_relu, 0.0)
    return np.concatenate([grad_z, grad_angles.reshape(-1)])


def compress(params: NetworkParams, threshold: float) -> Tuple[NetworkParams, int]:
    """
    Prune leaves whose normalized weight is below ``threshold``.

    Blocks left with a single active child act as pass-through nodes.

    Returns:
        Normalized compressed parameters and the number of pruned leaves.
    """
    weights = params.leaf_weights()
    keep = (weights >= threshold) & (weights > 0.0)
    if not keep.any():
        keep[np.argmax(weights)] = True
    pruned = int(np.count_nonzero((weights > 0.0) & ~keep))
    z = np.where(keep, np.maximum(params.z, 0.0), 0.0)
    compressed = NetworkParams(params.depth, z, params.angles.copy(), params.phases.copy()).normalized()
    return compressed, pruned


# --- training loop ---

class TrainingService:
    """Generates labeled data and fits network parameters by SGD."""

    def __init__(self, config: TrainingConfig):
        self.config = config

    def generate(self, oracle: LabelOracle, rng: np.random.Generator):
        """Sample ``n_train + n_test`` phase pairs, label them and split."""
        count = self.config.n_train + self.config.n_test
        pairs = [sample_phases(rng, self.config.ranges) for _ in range(count)]
        samples = oracle_labels(pairs, oracle)
        logger.info("Generated %d labeled samples (%d skipped)", len(samples), count - len(samples))
        return samples[:self.config.n_train], samples[self.config.n_train:]

    def train(
        self,
        train_set: Sequence[TrainingSample],
        test_set: Sequence[TrainingSample],
        init: NetworkParams,
    ) -> Tuple[NetworkParams, TrainingReport]:
        """
        Minimize the training cost from ``init``.

        Args:
            train_set: Labeled training samples.
            test_set: Labeled test samples.
            init: Starting parameters.

        Returns:
            Compressed, normalized parameters and the training report.

        Raises:
            TrainingDivergedError: If the training cost rises for
                ``divergence_window`` consecutive epochs or stops being finite.
        """
        config = self.config
        report = TrainingReport()
        if config.epochs == 0:
            return init.copy(), report

        rng = np.random.default_rng(config.seed)
        params = init.normalized()
        vector = params.flatten()
        history: List[float] = []
        rising = 0

        for epoch in range(config.epochs):
            rate = config.learning_rate_at(epoch)
            order = rng.permutation(len(train_set))
            for start in range(0, len(order), config.batch_size):
                batch = [train_set[i] for i in order[start:start + config.batch_size]]
                vector = vector - rate * gradient(params, batch)
                params = params.with_vector(vector)

            train_cost = cost(params, train_set)
            test_cost = cost(params, test_set)
            report.records.append(EpochRecord(epoch + 1, train_cost, test_cost, params.active_node_count))
            logger.info("Epoch %d: train J=%.6e, test J=%.6e, lr=%.3e", epoch + 1, train_cost, test_cost, rate)

            if not math.isfinite(train_cost):
                raise TrainingDivergedError(epoch + 1, history + [train_cost])
            rising = rising + 1 if history and train_cost > history[-1] else 0
            history.append(train_cost)
            if rising >= config.divergence_window:
                raise TrainingDivergedError(epoch + 1, history)

        report.cost_before_compression = cost(params, train_set)
        params, report.pruned_leaves = compress(params, config.compression_threshold)
        report.cost_after_compression = cost(params, train_set)
        logger.info(
            "Compression pruned %d leaves; train J %.6e -> %.6e",
            report.pruned_leaves, report.cost_before_compression, report.cost_after_compression,
        )
        return params, report

"""Flattened observation vectors for the policy network.

The observation concatenates two views of the cluster: per-node read counts
from the last step sorted in decreasing order (one row per node, padded to the
node capacity), followed by the full block placement matrix. Total length is
num_nodes * (node_capacity + num_blocks).
"""

from __future__ import annotations

import numpy as np

from .cluster import ClusterState


def observation_size(num_nodes: int, node_capacity: int, num_blocks: int) -> int:
    return num_nodes * (node_capacity + num_blocks)


def encode_node_matrix(state: ClusterState, node_capacity: int, load_scale: float = 1.0) -> np.ndarray:
    """Per-node sorted read counts, zero-padded to capacity, divided by
    ``load_scale`` so typical entries are O(1).

    Blocks a node does not hold have zero counts, so sorting the full count
    row descending and truncating to capacity equals sort-then-pad over the
    held blocks only.
    """
    counts = np.sort(state.last_read_counts, axis=1)[:, ::-1]
    matrix = counts[:, :node_capacity].astype(np.float64)
    if matrix.shape[1] < node_capacity:
        pad = node_capacity - matrix.shape[1]
        matrix = np.pad(matrix, ((0, 0), (0, pad)))
    if load_scale != 1.0:
        matrix /= load_scale
    return matrix


def encode_placement_matrix(state: ClusterState) -> np.ndarray:
    """The 0/1 placement matrix, one row per block."""
    return state.placement.astype(np.float64)


def encode_observation(state: ClusterState, node_capacity: int, load_scale: float = 1.0) -> np.ndarray:
    """Row-major flatten of the node matrix followed by the placement matrix."""
    node_part = encode_node_matrix(state, node_capacity, load_scale)
    placement_part = encode_placement_matrix(state)
    return np.concatenate([node_part.ravel(), placement_part.ravel()])

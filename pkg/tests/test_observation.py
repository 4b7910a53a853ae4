import numpy as np
import pytest

from blockbalance.cluster import ClusterConfig, ClusterState, init_cluster
from blockbalance.env import ReplicationEnv
from blockbalance.observation import (
    encode_node_matrix,
    encode_observation,
    encode_placement_matrix,
    observation_size,
)
from blockbalance.workload import WorkloadConfig


def state_with_counts(placement, counts):
    placement = np.asarray(placement, dtype=np.int8)
    return ClusterState(
        placement=placement,
        node_fill=placement.sum(axis=0).astype(np.int64),
        last_read_counts=np.asarray(counts, dtype=np.int64),
    )


@pytest.mark.parametrize(
    "num_nodes, num_blocks, expected",
    [(4, 128, 992), (4, 256, 1504), (6, 128, 1488), (6, 256, 2256), (8, 128, 1984), (8, 256, 3008)],
)
def test_observation_size_sweep(num_nodes, num_blocks, expected):
    assert observation_size(num_nodes, 120, num_blocks) == expected


def test_node_rows_sorted_and_padded():
    placement = np.zeros((6, 2), dtype=np.int8)
    counts = np.zeros((2, 6), dtype=np.int64)
    for block, count in [(0, 3), (1, 9), (2, 1)]:
        placement[block, 0] = 1
        counts[0, block] = count
    placement[3, 1] = 1
    state = state_with_counts(placement, counts)
    matrix = encode_node_matrix(state, node_capacity=5)
    assert matrix[0].tolist() == [9, 3, 1, 0, 0]
    assert matrix[1].tolist() == [0, 0, 0, 0, 0]


def test_fresh_state_encodes_to_zero_node_matrix():
    config = ClusterConfig(num_nodes=4, num_blocks=10, node_capacity=9)
    state = init_cluster(config, np.random.default_rng(0))
    matrix = encode_node_matrix(state, node_capacity=9)
    assert not matrix.any()


def test_placement_matrix_is_exact_copy():
    placement = np.array([[1, 0, 1, 0], [0, 1, 0, 0]], dtype=np.int8)
    state = state_with_counts(placement, np.zeros((4, 2)))
    encoded = encode_placement_matrix(state)
    assert encoded.tolist() == [[1, 0, 1, 0], [0, 1, 0, 0]]
    assert encoded.dtype == np.float64
    encoded[0, 0] = 5  # a copy, not a view
    assert state.placement[0, 0] == 1


def test_flatten_layout_node_segment_first():
    placement = np.array([[1, 0], [1, 1]], dtype=np.int8)
    counts = np.array([[4, 2], [0, 7]])
    state = state_with_counts(placement, counts)
    obs = encode_observation(state, node_capacity=3)
    np.testing.assert_array_equal(obs[:6], [4, 2, 0, 7, 0, 0])
    np.testing.assert_array_equal(obs[6:], [1, 0, 1, 1])
    assert obs.size == observation_size(2, 3, 2)


def test_load_scale_divides_counts_only():
    placement = np.array([[1, 0]], dtype=np.int8)
    state = state_with_counts(placement, np.array([[10], [0]]))
    obs = encode_observation(state, node_capacity=2, load_scale=5.0)
    np.testing.assert_allclose(obs[:4], [2.0, 0.0, 0.0, 0.0])
    np.testing.assert_array_equal(obs[4:], [1, 0])


def test_encoding_is_pure():
    config = ClusterConfig(num_nodes=3, num_blocks=5, node_capacity=5, initial_replication=2)
    state = init_cluster(config, np.random.default_rng(2))
    state.last_read_counts = np.random.default_rng(3).integers(0, 9, (3, 5)) * state.placement.T
    a = encode_observation(state, 5, 2.0)
    b = encode_observation(state, 5, 2.0)
    assert np.array_equal(a, b)


def test_node_segment_row_sums_equal_load_vector():
    config = ClusterConfig(num_nodes=4, num_blocks=12, node_capacity=9, initial_replication=2)
    env = ReplicationEnv(config, WorkloadConfig(num_blocks=12, poisson_mean=30), seed=4)
    result = env.step(0)
    matrix = encode_node_matrix(env.state, config.node_capacity)
    np.testing.assert_array_equal(matrix.sum(axis=1), result.load_vector)


def test_block_relabeling_leaves_node_rows_unchanged():
    rng = np.random.default_rng(8)
    config = ClusterConfig(num_nodes=3, num_blocks=6, node_capacity=6, initial_replication=2)
    state = init_cluster(config, rng)
    state.last_read_counts = rng.integers(0, 20, (3, 6)) * state.placement.T
    perm = rng.permutation(6)
    relabeled = ClusterState(
        placement=state.placement[perm],
        node_fill=state.node_fill.copy(),
        last_read_counts=state.last_read_counts[:, perm],
    )
    np.testing.assert_array_equal(
        encode_node_matrix(state, 6), encode_node_matrix(relabeled, 6)
    )
    np.testing.assert_array_equal(
        encode_placement_matrix(relabeled), encode_placement_matrix(state)[perm]
    )

import numpy as np
import pytest

from blockbalance.baselines import (
    GreedyBalancePolicy,
    RandomPolicy,
    StaticPolicy,
    greedy_balance_action,
    make_baseline,
    random_action,
    static_action,
)
from blockbalance.cluster import (
    Action,
    ActionKind,
    ClusterConfig,
    ClusterState,
    decode_action,
    num_action_indices,
)
from blockbalance.env import ReplicationEnv
from blockbalance.workload import WorkloadConfig


def make_env(seed=0, **kwargs):
    defaults = dict(num_nodes=4, num_blocks=12, node_capacity=9, initial_replication=2,
                    episode_length=24)
    defaults.update(kwargs)
    cluster = ClusterConfig(**defaults)
    return ReplicationEnv(cluster, WorkloadConfig(num_blocks=defaults["num_blocks"],
                                                  poisson_mean=30), seed=seed)


def state_of(placement, counts=None):
    placement = np.asarray(placement, dtype=np.int8)
    shape = (placement.shape[1], placement.shape[0])
    return ClusterState(
        placement=placement,
        node_fill=placement.sum(axis=0).astype(np.int64),
        last_read_counts=np.zeros(shape, np.int64) if counts is None else np.asarray(counts),
    )


def test_static_action_decodes_to_self_move():
    env = make_env()
    action = decode_action(static_action(env.state), 4)
    assert action == Action(ActionKind.MOVE, 0, 0)


def test_static_policy_never_changes_placement():
    env = make_env(seed=3)
    policy = StaticPolicy()
    initial = env.state.placement.copy()
    while not env.done:
        result = env.step(policy.act(env))
        assert not result.action_applied
    assert np.array_equal(env.state.placement, initial)


def test_random_action_is_uniform_over_full_range():
    env = make_env()
    rng = np.random.default_rng(0)
    n = 100_000
    counts = np.bincount(
        [random_action(env.state, rng) for _ in range(n)], minlength=48
    )
    assert counts.size == 48
    np.testing.assert_allclose(counts / n, 1 / 48, atol=0.005)


def test_random_policy_is_seeded():
    env = make_env()
    a = [RandomPolicy(seed=7).act(env) for _ in range(10)]
    b = [RandomPolicy(seed=7).act(env) for _ in range(10)]
    assert a == b


def test_random_policy_preserves_env_invariants():
    env = make_env(seed=11, episode_length=3000)
    policy = RandomPolicy(seed=1)
    config = env.cluster_config
    for _ in range(3000):
        env.step(policy.act(env))
    reps = env.state.placement.sum(axis=1)
    assert reps.min() >= 1
    assert reps.max() <= config.max_replication
    assert env.state.node_fill.max() <= config.node_capacity


def test_greedy_copies_hot_block_to_cold_node():
    config = ClusterConfig(num_nodes=2, num_blocks=2, node_capacity=4,
                           max_replication=2, initial_replication=1)
    # block 0 hot on node 0; node 1 holds only block 1
    state = state_of([[1, 0], [0, 1]], [[8, 0], [0, 2]])
    action = decode_action(greedy_balance_action(state, np.array([10, 2]), config), 2)
    assert action == Action(ActionKind.COPY, 0, 1)


def test_greedy_equal_loads_collapse_to_noop():
    config = ClusterConfig(num_nodes=2, num_blocks=2, node_capacity=4,
                           max_replication=2, initial_replication=1)
    state = state_of([[1, 0], [0, 1]])
    action = decode_action(greedy_balance_action(state, np.array([5, 5]), config), 2)
    assert action == Action(ActionKind.MOVE, 0, 0)


def test_greedy_blocked_transfers_fall_back_to_noop():
    config = ClusterConfig(num_nodes=2, num_blocks=2, node_capacity=4,
                           max_replication=2, initial_replication=1)
    # hottest block already everywhere: cannot copy or move it anywhere new
    state = state_of([[1, 1], [1, 0]], [[9, 1], [9, 0]])
    action = decode_action(greedy_balance_action(state, np.array([10, 9]), config), 2)
    assert action == Action(ActionKind.MOVE, 0, 0)


def test_greedy_moves_when_replication_maxed():
    config = ClusterConfig(num_nodes=3, num_blocks=2, node_capacity=4,
                           max_replication=2, initial_replication=1)
    # block 0 at max replication (nodes 0, 1); node 2 idle and open
    state = state_of([[1, 1, 0], [0, 1, 0]], [[9, 0], [2, 1], [0, 0]])
    action = decode_action(greedy_balance_action(state, np.array([9, 3, 0]), config), 3)
    assert action == Action(ActionKind.MOVE, 0, 2)


def test_greedy_emitted_transfers_are_applied():
    env = make_env(seed=5, episode_length=200)
    policy = GreedyBalancePolicy()
    noop = static_action(env.state)
    while not env.done:
        action = policy.act(env)
        result = env.step(action)
        if action != noop:
            assert result.action_applied


def test_all_baselines_emit_valid_indices():
    env = make_env(seed=2)
    policies = [make_baseline(name, seed=3) for name in ("static", "random", "greedy")]
    for _ in range(20):
        for policy in policies:
            assert 0 <= policy.act(env) < num_action_indices(4)
        env.step(0)


def test_make_baseline_rejects_unknown_name():
    with pytest.raises(ValueError):
        make_baseline("optimal")


def test_baselines_expose_estimator_params():
    assert RandomPolicy(seed=5).get_params() == {"seed": 5}
    assert StaticPolicy().get_params() == {}
    assert RandomPolicy().set_params(seed=9).seed == 9
    with pytest.raises(ValueError):
        StaticPolicy().set_params(bogus=1)

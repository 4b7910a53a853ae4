"""Non-learning comparison policies.

Static models the stock behavior of a fixed replication factor: it always
emits a guaranteed no-op, so placement never changes. Random samples the full
action space and leans on the environment's ignore rules. GreedyBalance is the
obvious expert for the variance objective: push the hottest block from the
busiest node toward the idlest one.
"""

from __future__ import annotations

import numpy as np

from ._validation import EstimatorParamsMixin, ensure_rng
from .cluster import (
    Action,
    ActionKind,
    ClusterConfig,
    ClusterState,
    encode_action,
    num_action_indices,
    select_block,
)
from .env import ReplicationEnv

BASELINE_NAMES = ("static", "random", "greedy")


def static_action(state: ClusterState) -> int:
    """A move with equal endpoints, which the environment always ignores."""
    return encode_action(Action(ActionKind.MOVE, 0, 0), state.num_nodes)


def random_action(state: ClusterState, rng: np.random.Generator) -> int:
    return int(rng.integers(0, num_action_indices(state.num_nodes)))


def greedy_balance_action(
    state: ClusterState, load_vector: np.ndarray, config: ClusterConfig
) -> int:
    """Copy (or failing that, move) the hottest block of the most loaded node
    to the least loaded node; no-op when both transfers are blocked.

    argmax/argmin break ties toward the smallest node index, so equal loads
    collapse to the ignored (move, 0, 0).
    """
    num_nodes = state.num_nodes
    hot = int(np.argmax(load_vector))
    cold = int(np.argmin(load_vector))
    block = select_block(state, hot)
    noop = encode_action(Action(ActionKind.MOVE, 0, 0), num_nodes)
    if block is None:
        return noop
    can_accept = (
        not state.placement[block, cold]
        and state.node_fill[cold] < config.node_capacity
    )
    if can_accept and state.placement[block].sum() < config.max_replication:
        return encode_action(Action(ActionKind.COPY, hot, cold), num_nodes)
    if can_accept and hot != cold:
        return encode_action(Action(ActionKind.MOVE, hot, cold), num_nodes)
    return noop


class StaticPolicy(EstimatorParamsMixin):
    def act(self, env: ReplicationEnv) -> int:
        return static_action(env.state)


class RandomPolicy(EstimatorParamsMixin):
    def __init__(self, seed=0):
        self.seed = seed
        self._rng = ensure_rng(seed)

    def act(self, env: ReplicationEnv) -> int:
        return random_action(env.state, self._rng)


class GreedyBalancePolicy(EstimatorParamsMixin):
    def act(self, env: ReplicationEnv) -> int:
        return greedy_balance_action(env.state, env.last_load, env.cluster_config)


def make_baseline(name: str, seed=0):
    if name == "static":
        return StaticPolicy()
    if name == "random":
        return RandomPolicy(seed=seed)
    if name == "greedy":
        return GreedyBalancePolicy()
    raise ValueError(f"unknown baseline {name!r}; expected one of {BASELINE_NAMES}")

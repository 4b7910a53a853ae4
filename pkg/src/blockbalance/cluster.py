"""Cluster state and step semantics for the block-replication simulator.

A cluster is a set of homogeneous nodes storing replicas of fixed-size
blocks. Each discrete step the controller issues one action (copy, remove,
or move a replica), then a batch of read requests arrives and is served by
the current placement. Invalid actions are silently ignored rather than
rejected, so any action index is always safe to apply.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from ._validation import check_at_least, check_index, check_positive


class ActionKind(IntEnum):
    COPY = 0
    REMOVE = 1
    MOVE = 2


@dataclass
class ClusterConfig:
    """Static shape and limits of the simulated cluster.

    ``tau`` scales the variance penalty into a training-friendly range; when
    left ``None`` the environment derives it from the workload's expected
    per-node load.
    """

    num_nodes: int
    num_blocks: int
    node_capacity: int = 120
    max_replication: int = 5
    initial_replication: int = 3
    tau: float | None = None
    episode_length: int = 256
    allow_erase: bool = True

    def __post_init__(self):
        check_at_least("num_nodes", self.num_nodes, 2)
        check_at_least("num_blocks", self.num_blocks, 1)
        check_positive("node_capacity", self.node_capacity)
        check_at_least("initial_replication", self.initial_replication, 1)
        # max_replication may exceed num_nodes (it just never binds then:
        # placement is binary, so one node holds at most one replica).
        if not self.initial_replication <= self.max_replication:
            raise ValueError(
                "need initial_replication <= max_replication, got "
                f"{self.initial_replication} > {self.max_replication}"
            )
        if self.initial_replication > self.num_nodes:
            raise ValueError(
                f"initial_replication {self.initial_replication} exceeds "
                f"num_nodes {self.num_nodes}"
            )
        if self.initial_replication * self.num_blocks > self.num_nodes * self.node_capacity:
            raise ValueError(
                f"initial placement does not fit: {self.num_blocks} blocks x "
                f"{self.initial_replication} replicas > {self.num_nodes} nodes x "
                f"{self.node_capacity} slots"
            )
        if self.tau is not None:
            check_positive("tau", self.tau)
        check_positive("episode_length", self.episode_length)


@dataclass
class Action:
    kind: ActionKind
    from_node: int
    to_node: int


@dataclass
class ClusterState:
    """Mutable placement plus the read counts observed in the last step.

    ``placement`` is a (num_blocks, num_nodes) 0/1 matrix; ``node_fill`` caches
    its column sums. ``last_read_counts`` is (num_nodes, num_blocks): entry
    (m, b) is how many requests for block b node m served last step.
    """

    placement: np.ndarray
    node_fill: np.ndarray
    last_read_counts: np.ndarray
    step_index: int = 0

    @property
    def num_blocks(self) -> int:
        return self.placement.shape[0]

    @property
    def num_nodes(self) -> int:
        return self.placement.shape[1]

    def load_vector(self) -> np.ndarray:
        """Per-node requests served during the most recent step."""
        return self.last_read_counts.sum(axis=1)


@dataclass
class StepResult:
    load_vector: np.ndarray
    reward: float
    action_applied: bool
    raw_read_counts: np.ndarray = field(repr=False)


def num_action_indices(num_nodes: int) -> int:
    """Size of the full action-index space: 3 kinds x from-node x to-node."""
    return 3 * num_nodes * num_nodes


def encode_action(action: Action, num_nodes: int) -> int:
    check_index("from_node", action.from_node, num_nodes)
    check_index("to_node", action.to_node, num_nodes)
    return int(action.kind) * num_nodes * num_nodes + action.from_node * num_nodes + action.to_node


def decode_action(index: int, num_nodes: int) -> Action:
    """Kind-major mixed-radix decoding; inverse of :func:`encode_action`."""
    check_index("action index", index, num_action_indices(num_nodes))
    kind, rest = divmod(int(index), num_nodes * num_nodes)
    from_node, to_node = divmod(rest, num_nodes)
    return Action(ActionKind(kind), from_node, to_node)


def restricted_action_size(num_nodes: int, allow_erase: bool) -> int:
    """Policy head size: 3*M^2 indices, or 2*M^2 when removals are disabled."""
    kinds = 3 if allow_erase else 2
    return kinds * num_nodes * num_nodes


def expand_action_index(head_index: int, num_nodes: int, allow_erase: bool) -> int:
    """Map a policy-head index onto the full action-index space.

    The erase-free head covers copy then move, so indices past the copy block
    skip over the remove block.
    """
    if allow_erase:
        return int(head_index)
    square = num_nodes * num_nodes
    check_index("head index", head_index, 2 * square)
    return int(head_index) if head_index < square else int(head_index) + square


def init_cluster(config: ClusterConfig, rng: np.random.Generator) -> ClusterState:
    """Place every block on ``initial_replication`` distinct random nodes.

    Uniform sampling over nodes with free slots can strand a block in tightly
    packed configurations, so after a few failed attempts placement falls back
    to the least-filled nodes (random among ties), which always succeeds for
    feasible configs.
    """
    num_blocks, num_nodes = config.num_blocks, config.num_nodes
    reps = config.initial_replication
    for _ in range(20):
        placement = np.zeros((num_blocks, num_nodes), dtype=np.int8)
        fill = np.zeros(num_nodes, dtype=np.int64)
        ok = True
        for b in range(num_blocks):
            open_nodes = np.flatnonzero(fill < config.node_capacity)
            if len(open_nodes) < reps:
                ok = False
                break
            chosen = rng.choice(open_nodes, size=reps, replace=False)
            placement[b, chosen] = 1
            fill[chosen] += 1
        if ok:
            break
    else:
        placement = np.zeros((num_blocks, num_nodes), dtype=np.int8)
        fill = np.zeros(num_nodes, dtype=np.int64)
        for b in range(num_blocks):
            order = rng.permutation(num_nodes)
            chosen = order[np.argsort(fill[order], kind="stable")[:reps]]
            placement[b, chosen] = 1
            fill[chosen] += 1

    counts = np.zeros((num_nodes, num_blocks), dtype=np.int64)
    return ClusterState(placement=placement, node_fill=fill, last_read_counts=counts)


def select_block(state: ClusterState, from_node: int) -> int | None:
    """Hottest block on ``from_node`` by last step's read counts.

    Ties break toward the smallest block id; an empty node yields ``None``.
    """
    check_index("from_node", from_node, state.num_nodes)
    held = np.flatnonzero(state.placement[:, from_node])
    if held.size == 0:
        return None
    return int(held[np.argmax(state.last_read_counts[from_node, held])])


def apply_action(state: ClusterState, action: Action, config: ClusterConfig) -> bool:
    """Mutate placement per the action; return False if it was ignored.

    Ignore conditions: erase disabled for removes, empty from-node, copy of a
    block already at max replication, copy/move onto a node that holds the
    block or is full, remove of the last replica, and move with equal
    endpoints. Ignored actions leave the state untouched.
    """
    kind = action.kind
    if kind == ActionKind.REMOVE and not config.allow_erase:
        return False
    src, dst = action.from_node, action.to_node
    block = select_block(state, src)
    if block is None:
        return False

    if kind == ActionKind.COPY:
        if (
            state.placement[block, dst]
            or state.node_fill[dst] >= config.node_capacity
            or state.placement[block].sum() >= config.max_replication
        ):
            return False
        state.placement[block, dst] = 1
        state.node_fill[dst] += 1
        return True

    if kind == ActionKind.REMOVE:
        if state.placement[block].sum() <= 1:
            return False
        state.placement[block, src] = 0
        state.node_fill[src] -= 1
        return True

    # move
    if (
        src == dst
        or state.placement[block, dst]
        or state.node_fill[dst] >= config.node_capacity
    ):
        return False
    state.placement[block, src] = 0
    state.placement[block, dst] = 1
    state.node_fill[src] -= 1
    state.node_fill[dst] += 1
    return True


def serve_requests(
    state: ClusterState, requests: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Assign each request to a uniformly random replica of its block.

    Returns the per-node load vector and the (num_nodes, num_blocks) read-count
    matrix. Raises for block ids outside the cluster.
    """
    num_blocks, num_nodes = state.placement.shape
    requests = np.asarray(requests, dtype=np.int64)
    if requests.size == 0:
        return (
            np.zeros(num_nodes, dtype=np.int64),
            np.zeros((num_nodes, num_blocks), dtype=np.int64),
        )
    try:
        requested = np.bincount(requests, minlength=num_blocks)
    except ValueError:
        raise ValueError("request for unknown block id") from None
    if requested.size > num_blocks:
        raise ValueError("request for unknown block id")

    # CSR view of holders: block_rows is sorted by block, so holder slices are
    # contiguous and indexable by a per-request random offset.
    block_rows, holder_cols = np.nonzero(state.placement)
    reps = np.bincount(block_rows, minlength=num_blocks)
    if ((reps == 0) & (requested > 0)).any():
        raise ValueError("requested block has no replicas")
    starts = np.zeros(num_blocks, dtype=np.int64)
    np.cumsum(reps[:-1], out=starts[1:])
    offsets = rng.integers(0, reps[requests])
    nodes = holder_cols[starts[requests] + offsets]

    flat = np.bincount(nodes * num_blocks + requests, minlength=num_nodes * num_blocks)
    raw_read_counts = flat.reshape(num_nodes, num_blocks)
    return raw_read_counts.sum(axis=1), raw_read_counts


def compute_reward(load_vector: np.ndarray, tau: float) -> float:
    """Negative scaled population variance of the per-node load."""
    loads = np.asarray(load_vector, dtype=np.float64)
    deviations = loads - loads.mean()
    return float(-tau * (deviations @ deviations) / loads.size)

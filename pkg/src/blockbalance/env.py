"""Single-owner simulation environment: one action, then one read batch, per step.

The controller acts on the read pattern it saw last step; requests for the
current step arrive only after the action is applied. Episodes run a fixed
number of steps, after which ``reset`` draws a fresh placement and fresh hot
sets. Placement, request serving, and workload sampling each use their own
seeded stream, so runs are reproducible and parallel instances independent.
"""

from __future__ import annotations

import numpy as np

from .cluster import (
    ClusterConfig,
    ClusterState,
    StepResult,
    apply_action,
    compute_reward,
    decode_action,
    init_cluster,
    num_action_indices,
    serve_requests,
)
from .observation import encode_observation, observation_size
from .workload import Workload, WorkloadConfig


class ReplicationEnv:
    """Replication simulator with a gym-flavored reset/step surface."""

    def __init__(self, cluster: ClusterConfig, workload: WorkloadConfig, seed=0):
        if cluster.num_blocks != workload.num_blocks:
            raise ValueError(
                f"cluster has {cluster.num_blocks} blocks but workload targets "
                f"{workload.num_blocks}"
            )
        self.cluster_config = cluster
        self.workload_config = workload
        if isinstance(seed, np.random.SeedSequence):
            seq = seed
        else:
            seq = np.random.SeedSequence(seed)
        placement_seq, serve_seq, workload_seq = seq.spawn(3)
        self._placement_rng = np.random.default_rng(placement_seq)
        self._serve_rng = np.random.default_rng(serve_seq)
        self.workload = Workload(workload, np.random.default_rng(workload_seq))
        self.tau = (
            cluster.tau
            if cluster.tau is not None
            else (cluster.num_nodes / workload.poisson_mean) ** 2
        )
        self._load_scale = workload.poisson_mean / cluster.num_nodes
        self.state: ClusterState = init_cluster(cluster, self._placement_rng)

    @property
    def num_actions(self) -> int:
        return num_action_indices(self.cluster_config.num_nodes)

    @property
    def observation_size(self) -> int:
        cfg = self.cluster_config
        return observation_size(cfg.num_nodes, cfg.node_capacity, cfg.num_blocks)

    @property
    def done(self) -> bool:
        return self.state.step_index >= self.cluster_config.episode_length

    @property
    def last_load(self) -> np.ndarray:
        return self.state.load_vector()

    def observe(self) -> np.ndarray:
        return encode_observation(
            self.state, self.cluster_config.node_capacity, self._load_scale
        )

    def rng_states(self) -> dict:
        """Snapshot of the generator states, for checkpoint audit trails."""
        return {
            "placement": self._placement_rng.bit_generator.state,
            "serve": self._serve_rng.bit_generator.state,
            "workload": self.workload.rng_state(),
        }

    def reset(self) -> np.ndarray:
        """Start a new episode: new placement, new hot sets, zeroed counts."""
        self.state = init_cluster(self.cluster_config, self._placement_rng)
        self.workload.reset()
        return self.observe()

    def step(self, action_index: int) -> StepResult:
        if self.done:
            raise RuntimeError("episode finished; call reset() before stepping")
        action = decode_action(action_index, self.cluster_config.num_nodes)
        applied = apply_action(self.state, action, self.cluster_config)

        requests = self.workload.sample_batch()
        load_vector, raw_read_counts = serve_requests(self.state, requests, self._serve_rng)
        reward = compute_reward(load_vector, self.tau)

        self.state.last_read_counts = raw_read_counts
        self.state.step_index += 1
        self.workload.advance()
        return StepResult(
            load_vector=load_vector,
            reward=reward,
            action_applied=applied,
            raw_read_counts=raw_read_counts,
        )

import dataclasses

import numpy as np
import pytest

from blockbalance.agent import ReplicationAgent
from blockbalance.checkpoint import CheckpointError, save_checkpoint, load_checkpoint
from blockbalance.cluster import ClusterConfig
from blockbalance.config import experiment_from_dict, experiment_to_dict
from blockbalance.evaluate import (
    SamplingAdapter,
    agent_from_checkpoint,
    compare_policies,
    evaluate_policy,
    resolve_entrant,
    workload_statistics,
)
from blockbalance.baselines import StaticPolicy
from blockbalance.env import ReplicationEnv
from blockbalance.policy import init_params
from blockbalance.workload import WorkloadConfig


CLUSTER = ClusterConfig(
    num_nodes=2, num_blocks=6, node_capacity=6, max_replication=2,
    initial_replication=1, episode_length=8,
)
WORKLOAD = WorkloadConfig(num_blocks=6, poisson_mean=15)


def test_static_report_shape_and_ignored_fraction():
    report = evaluate_policy(StaticPolicy(), CLUSTER, WORKLOAD, episodes=3, seed=1, name="static")
    assert report.policy == "static"
    assert report.episodes == 3
    assert report.steps == 24
    assert report.ignored_fraction == 1.0
    assert report.mean_reward <= 0
    assert report.mean_variance >= 0


def test_same_seed_reports_are_identical():
    a = evaluate_policy(StaticPolicy(), CLUSTER, WORKLOAD, episodes=2, seed=5)
    b = evaluate_policy(StaticPolicy(), CLUSTER, WORKLOAD, episodes=2, seed=5)
    assert a == dataclasses.replace(b, policy=a.policy)


def test_compare_requires_two_entrants():
    with pytest.raises(ValueError, match="two entrants"):
        compare_policies([("static", StaticPolicy())], CLUSTER, WORKLOAD, episodes=1, seed=0)


def test_compare_shares_request_streams():
    entrants = [("static_a", StaticPolicy()), ("static_b", StaticPolicy())]
    reports = compare_policies(entrants, CLUSTER, WORKLOAD, episodes=2, seed=3)
    assert reports[0].mean_variance == reports[1].mean_variance
    assert reports[0].mean_reward == reports[1].mean_reward


def experiment_dict(policy="rl_e"):
    config = experiment_from_dict(
        {
            "policy": policy,
            "cluster": {
                "num_nodes": 2, "num_blocks": 6, "node_capacity": 6,
                "max_replication": 2, "initial_replication": 1, "episode_length": 8,
            },
            "workload": {"poisson_mean": 15.0},
            "ppo": {"hidden_width": 8, "total_timesteps": 64, "rollout_horizon": 32,
                    "minibatch_size": 16},
        }
    )
    return experiment_to_dict(config)


def test_agent_from_checkpoint_restores_dimensions(tmp_path):
    config = experiment_dict()
    env = ReplicationEnv(CLUSTER, WORKLOAD, seed=0)
    params = init_params(0, env.observation_size, 12, hidden_width=8)
    path = tmp_path / "ck.bin"
    save_checkpoint(path, params, config)
    agent, loaded_config = agent_from_checkpoint(load_checkpoint(path))
    assert isinstance(agent, ReplicationAgent)
    assert agent.num_nodes_ == 2
    assert agent.allow_erase_
    assert loaded_config["policy"] == "rl_e"
    assert 0 <= agent.act(env) < 12


def test_agent_from_checkpoint_rejects_wrong_dims(tmp_path):
    config = experiment_dict()
    params = init_params(0, 10, 12, hidden_width=8)  # wrong input width
    path = tmp_path / "ck.bin"
    save_checkpoint(path, params, config)
    with pytest.raises(CheckpointError, match="do not match"):
        agent_from_checkpoint(load_checkpoint(path))


def test_agent_from_checkpoint_rejects_baseline_checkpoint(tmp_path):
    config = experiment_dict(policy="static")
    params = init_params(0, 24, 12, hidden_width=8)
    path = tmp_path / "ck.bin"
    save_checkpoint(path, params, config)
    with pytest.raises(CheckpointError, match="not an RL agent"):
        agent_from_checkpoint(load_checkpoint(path))


def test_resolve_entrant_baseline_and_sampling_wrap(tmp_path):
    name, policy = resolve_entrant("greedy", None, seed=0)
    assert name == "greedy"
    config = experiment_from_dict(experiment_dict())
    env = ReplicationEnv(CLUSTER, WORKLOAD, seed=0)
    params = init_params(0, env.observation_size, 12, hidden_width=8)
    path = tmp_path / "ck.bin"
    save_checkpoint(path, params, experiment_dict())
    name, policy = resolve_entrant(str(path), config, seed=0)
    assert name == f"rl_e:{path}"
    assert isinstance(policy, SamplingAdapter)
    _, argmax_policy = resolve_entrant(str(path), config, seed=0, argmax=True)
    assert isinstance(argmax_policy, ReplicationAgent)


def test_resolve_entrant_rejects_config_mismatch(tmp_path):
    other = experiment_from_dict(
        {
            "cluster": {"num_nodes": 2, "num_blocks": 6, "node_capacity": 6,
                        "max_replication": 2, "initial_replication": 1,
                        "episode_length": 8},
            "workload": {"poisson_mean": 99.0},
        }
    )
    params = init_params(0, 24, 12, hidden_width=8)
    path = tmp_path / "ck.bin"
    save_checkpoint(path, params, experiment_dict())
    with pytest.raises(CheckpointError, match="different \\[workload\\]"):
        resolve_entrant(str(path), other, seed=0)


def test_workload_statistics_without_rotation():
    stats = workload_statistics(
        WorkloadConfig(num_blocks=8, poisson_mean=25, rotation_period=None), steps=300, seed=1
    )
    assert stats.rotations == 0
    assert stats.total_requests == stats.block_counts.sum()
    assert np.isfinite(stats.chi2_statistic)
    assert stats.chi2_p_value > 0.001
    assert 20 < stats.batch_size_mean < 30


def test_workload_statistics_counts_rotations():
    stats = workload_statistics(
        WorkloadConfig(num_blocks=8, poisson_mean=25, rotation_period=50), steps=175, seed=1
    )
    assert stats.rotations == 3
    assert np.isnan(stats.chi2_p_value)

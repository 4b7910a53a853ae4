"""Block-replication load balancing: simulator, PPO agent, baselines, harness."""

from .agent import ReplicationAgent
from .baselines import GreedyBalancePolicy, RandomPolicy, StaticPolicy, make_baseline
from .cluster import (
    Action,
    ActionKind,
    ClusterConfig,
    ClusterState,
    StepResult,
    compute_reward,
    decode_action,
    encode_action,
)
from .config import ExperimentConfig, load_experiment_config
from .env import ReplicationEnv
from .evaluate import EvaluationReport, compare_policies, evaluate_policy
from .policy import PolicyParams, init_params
from .ppo import PPOConfig, TrainResult, train
from .workload import Workload, WorkloadConfig, zipf_weights

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ActionKind",
    "ClusterConfig",
    "ClusterState",
    "EvaluationReport",
    "ExperimentConfig",
    "GreedyBalancePolicy",
    "PPOConfig",
    "PolicyParams",
    "RandomPolicy",
    "ReplicationAgent",
    "ReplicationEnv",
    "StaticPolicy",
    "StepResult",
    "TrainResult",
    "Workload",
    "WorkloadConfig",
    "compare_policies",
    "compute_reward",
    "decode_action",
    "encode_action",
    "evaluate_policy",
    "init_params",
    "load_experiment_config",
    "make_baseline",
    "train",
    "zipf_weights",
]

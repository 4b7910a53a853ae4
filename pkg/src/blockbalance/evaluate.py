"""Frozen-policy evaluation, side-by-side comparison, and workload statistics.

Evaluations rebuild the environment from the same seed for every entrant, so
all policies in a comparison face identical request streams and identical
initial placements; differences in the reported variance are attributable to
the policies alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as scipy_stats

from .agent import ReplicationAgent
from .baselines import BASELINE_NAMES, make_baseline
from .checkpoint import Checkpoint, CheckpointError
from .cluster import ClusterConfig
from .env import ReplicationEnv
from .observation import observation_size
from .workload import Workload, WorkloadConfig

# Stream labels keep evaluation randomness disjoint from training randomness
# when both derive from one experiment seed.
EVAL_STREAM = 1


@dataclass
class EvaluationReport:
    policy: str
    episodes: int
    steps: int
    mean_variance: float
    std_variance: float
    mean_reward: float
    ignored_fraction: float


class SamplingAdapter:
    """Expose a stochastic act() for an agent evaluated with --stochastic."""

    def __init__(self, agent: ReplicationAgent):
        self.agent = agent

    def act(self, env):
        return self.agent.act(env, deterministic=False)


def evaluate_policy(
    policy,
    cluster: ClusterConfig,
    workload: WorkloadConfig,
    episodes: int = 20,
    seed: int = 0,
    name: str = "",
) -> EvaluationReport:
    """Run fixed-length episodes and report per-step load-variance statistics."""
    env = ReplicationEnv(cluster, workload, seed=np.random.SeedSequence([seed, EVAL_STREAM]))
    variances, rewards = [], []
    ignored = 0
    for _ in range(episodes):
        env.reset()
        while not env.done:
            result = env.step(policy.act(env))
            variances.append(float(np.var(result.load_vector)))
            rewards.append(result.reward)
            ignored += 0 if result.action_applied else 1
    variances = np.asarray(variances)
    return EvaluationReport(
        policy=name or type(policy).__name__,
        episodes=episodes,
        steps=variances.size,
        mean_variance=float(variances.mean()),
        std_variance=float(variances.std()),
        mean_reward=float(np.mean(rewards)),
        ignored_fraction=ignored / variances.size,
    )


def compare_policies(
    entrants: list[tuple[str, object]],
    cluster: ClusterConfig,
    workload: WorkloadConfig,
    episodes: int = 20,
    seed: int = 0,
) -> list[EvaluationReport]:
    """Evaluate every entrant on identical request streams (shared seed)."""
    if len(entrants) < 2:
        raise ValueError("compare needs at least two entrants")
    return [
        evaluate_policy(policy, cluster, workload, episodes=episodes, seed=seed, name=name)
        for name, policy in entrants
    ]


def agent_from_checkpoint(checkpoint: Checkpoint) -> tuple[ReplicationAgent, dict]:
    """Rebuild a fitted agent from a checkpoint, validating dimensions against
    the echoed configuration."""
    config = checkpoint.config
    try:
        cluster = config["cluster"]
        policy_kind = config["policy"]
        num_nodes = cluster["num_nodes"]
        allow_erase = cluster["allow_erase"]
        expected_input = observation_size(
            num_nodes, cluster["node_capacity"], cluster["num_blocks"]
        )
    except KeyError as exc:
        raise CheckpointError(f"checkpoint config missing key: {exc}") from exc
    if policy_kind not in ("rl_e", "rl_ne"):
        raise CheckpointError(f"checkpoint holds a {policy_kind!r} policy, not an RL agent")
    kinds = 3 if allow_erase else 2
    expected_actions = kinds * num_nodes * num_nodes
    params = checkpoint.params
    if params.input_dim != expected_input or params.num_actions != expected_actions:
        raise CheckpointError(
            f"checkpoint dimensions ({params.input_dim} inputs, {params.num_actions} "
            f"actions) do not match its config ({expected_input} inputs, "
            f"{expected_actions} actions)"
        )
    agent = ReplicationAgent(**{**config.get("ppo", {}), "seed": config.get("seed", 0)})
    agent._adopt(params, num_nodes, allow_erase)
    return agent, config


def resolve_entrant(spec: str, config, seed: int = 0, argmax: bool = False):
    """An entrant is a baseline name or a checkpoint path.

    RL entrants are evaluated under their own action distribution unless
    ``argmax`` asks for the mode: the sampled policy is the object training
    optimizes, and its mode alone understates it badly on this environment.
    """
    from .checkpoint import load_checkpoint
    from .config import experiment_to_dict

    if spec in BASELINE_NAMES:
        return spec, make_baseline(spec, seed=seed)
    checkpoint = load_checkpoint(spec)
    agent, ck_config = agent_from_checkpoint(checkpoint)
    if config is not None:
        ours = experiment_to_dict(config)
        for section in ("cluster", "workload"):
            if ck_config.get(section) != ours[section]:
                raise CheckpointError(
                    f"checkpoint {spec} was trained on a different [{section}] "
                    "config than this comparison"
                )
    policy = agent if argmax else SamplingAdapter(agent)
    return f"{ck_config.get('policy', 'rl')}:{spec}", policy


@dataclass
class WorkloadStats:
    steps: int
    total_requests: int
    batch_size_mean: float
    batch_size_counts: np.ndarray
    block_counts: np.ndarray
    expected_pmf: np.ndarray
    chi2_statistic: float
    chi2_p_value: float
    rotations: int


def workload_statistics(config: WorkloadConfig, steps: int, seed: int = 0) -> WorkloadStats:
    """Sample the request stream and test block frequencies against the
    analytic Zipf mixture.

    The chi-square comparison targets the hot sets active at the start, so it
    is only meaningful when no rotation happened during the sampled window
    (the p-value is NaN otherwise).
    """
    workload = Workload(config, np.random.default_rng(np.random.SeedSequence([seed, 2])))
    expected_pmf = workload.mixture_pmf()
    block_counts = np.zeros(config.num_blocks, dtype=np.int64)
    batch_sizes = np.zeros(steps, dtype=np.int64)
    rotations = 0
    for t in range(steps):
        batch = workload.sample_batch()
        batch_sizes[t] = batch.size
        block_counts += np.bincount(batch, minlength=config.num_blocks)
        before = workload.steps_since_rotation
        workload.advance()
        if workload.steps_since_rotation <= before:
            rotations += 1

    total = int(block_counts.sum())
    if rotations == 0 and total > 0:
        expected = expected_pmf * total
        chi2 = float(((block_counts - expected) ** 2 / expected).sum())
        p_value = float(scipy_stats.chi2.sf(chi2, df=config.num_blocks - 1))
    else:
        chi2, p_value = float("nan"), float("nan")
    return WorkloadStats(
        steps=steps,
        total_requests=total,
        batch_size_mean=float(batch_sizes.mean()) if steps else 0.0,
        batch_size_counts=np.bincount(batch_sizes) if steps else np.zeros(0, dtype=np.int64),
        block_counts=block_counts,
        expected_pmf=expected_pmf,
        chi2_statistic=chi2,
        chi2_p_value=p_value,
        rotations=rotations,
    )

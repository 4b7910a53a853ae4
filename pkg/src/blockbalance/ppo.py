"""Proximal policy optimization over the replication environment.

Training alternates rollout collection under the current policy with several
epochs of clipped-surrogate minibatch updates. Advantages come from
generalized advantage estimation and are normalized per batch; gradients are
globally norm-clipped and applied with adaptive-moment steps.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive
from .cluster import expand_action_index, restricted_action_size
from .env import ReplicationEnv
from .metrics import MetricsRow
from .policy import (
    PolicyParams,
    backward,
    entropy_from_log_probs,
    forward,
    forward_batch,
    init_params,
    sample_action,
)


class DivergenceError(RuntimeError):
    """Raised when a loss or gradient goes non-finite; carries the metrics
    collected before the aborted update."""

    def __init__(self, message, metrics=None):
        super().__init__(message)
        self.metrics = metrics or []


@dataclass
class PPOConfig:
    learning_rate: float = 0.001
    total_timesteps: int = 500_000
    rollout_horizon: int = 2048
    epochs_per_update: int = 4
    minibatch_size: int = 256
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_epsilon: float = 0.2
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    max_grad_norm: float = 0.5
    hidden_width: int = 128

    def __post_init__(self):
        check_positive("learning_rate", self.learning_rate)
        check_positive("total_timesteps", self.total_timesteps)
        check_positive("rollout_horizon", self.rollout_horizon)
        check_positive("epochs_per_update", self.epochs_per_update)
        check_positive("hidden_width", self.hidden_width)
        if not 0.0 < self.clip_epsilon < 1.0:
            raise ValueError(f"clip_epsilon must be in (0, 1), got {self.clip_epsilon}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if not 0.0 <= self.gae_lambda <= 1.0:
            raise ValueError(f"gae_lambda must be in [0, 1], got {self.gae_lambda}")
        if not 0 < self.minibatch_size <= self.rollout_horizon:
            raise ValueError(
                f"minibatch_size must be in (0, rollout_horizon], got "
                f"{self.minibatch_size} vs horizon {self.rollout_horizon}"
            )


@dataclass
class Transition:
    observation: np.ndarray
    action: int
    log_prob: float
    reward: float
    value: float
    done: bool


@dataclass
class RolloutBatch:
    observations: np.ndarray  # (horizon, input_dim)
    actions: np.ndarray  # (horizon,) policy-head indices
    log_probs: np.ndarray  # behavior log pi(a|s)
    rewards: np.ndarray
    values: np.ndarray
    dones: np.ndarray
    advantages: np.ndarray  # normalized
    returns: np.ndarray

    def __len__(self):
        return len(self.actions)


@dataclass
class UpdateStats:
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float


@dataclass
class TrainResult:
    params: PolicyParams
    metrics: list[MetricsRow]
    rng_states: dict = field(default_factory=dict)


def collect_rollout(
    env: ReplicationEnv,
    params: PolicyParams,
    horizon: int,
    rng: np.random.Generator,
    current_obs: np.ndarray | None = None,
):
    """Run ``horizon`` steps under the sampling policy.

    Episodes reset transparently at their boundary (recorded as done flags).
    Returns the stacked transitions, the bootstrap value for the final state,
    and the observation the next rollout should start from.
    """
    allow_erase = env.cluster_config.allow_erase
    num_nodes = env.cluster_config.num_nodes
    obs = env.observe() if current_obs is None else current_obs
    transitions: list[Transition] = []
    for _ in range(horizon):
        dist = forward(params, obs)
        head_index, log_prob = sample_action(dist, rng)
        result = env.step(expand_action_index(head_index, num_nodes, allow_erase))
        done = env.done
        transitions.append(
            Transition(obs, head_index, log_prob, result.reward, dist.value, done)
        )
        obs = env.reset() if done else env.observe()
    bootstrap_value = 0.0 if transitions[-1].done else forward(params, obs).value
    return transitions, bootstrap_value, obs


def compute_gae(rewards, values, dones, gamma, gae_lambda, bootstrap_value=0.0):
    """Generalized advantage estimation over one rollout.

    Residuals bootstrap from the next value unless the step ended an episode;
    returns are advantages plus values (both unnormalized).
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    not_done = 1.0 - np.asarray(dones, dtype=np.float64)
    horizon = len(rewards)
    next_values = np.append(values[1:], bootstrap_value)
    deltas = rewards + gamma * next_values * not_done - values
    advantages = np.empty(horizon)
    acc = 0.0
    for t in range(horizon - 1, -1, -1):
        acc = deltas[t] + gamma * gae_lambda * not_done[t] * acc
        advantages[t] = acc
    return advantages, advantages + values


def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    std = advantages.std()
    if std < 1e-12:
        return advantages - advantages.mean()
    return (advantages - advantages.mean()) / std


def build_batch(transitions, bootstrap_value, config: PPOConfig) -> RolloutBatch:
    rewards = np.array([t.reward for t in transitions])
    values = np.array([t.value for t in transitions])
    dones = np.array([t.done for t in transitions], dtype=bool)
    advantages, returns = compute_gae(
        rewards, values, dones, config.gamma, config.gae_lambda, bootstrap_value
    )
    return RolloutBatch(
        observations=np.stack([t.observation for t in transitions]),
        actions=np.array([t.action for t in transitions], dtype=np.int64),
        log_probs=np.array([t.log_prob for t in transitions]),
        rewards=rewards,
        values=values,
        dones=dones,
        advantages=normalize_advantages(advantages),
        returns=returns,
    )


def ppo_loss_and_grads(
    params: PolicyParams,
    observations: np.ndarray,
    actions: np.ndarray,
    old_log_probs: np.ndarray,
    advantages: np.ndarray,
    returns: np.ndarray,
    clip_epsilon: float,
    value_coef: float,
    entropy_coef: float,
):
    """Clipped-surrogate PPO loss and its exact parameter gradients.

    The minimum of the unclipped and clipped surrogate kills the gradient
    whenever the clipped branch is active, which is what makes the update a
    trust region: samples already pushed past the ratio box stop contributing.
    """
    n = len(actions)
    hidden, log_probs, values = forward_batch(params, observations)
    rows = np.arange(n)
    action_log_probs = log_probs[rows, actions]
    ratio = np.exp(action_log_probs - old_log_probs)
    unclipped = ratio * advantages
    clipped = np.clip(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon) * advantages
    policy_loss = -np.minimum(unclipped, clipped).mean()
    value_error = values - returns
    value_loss = float(np.mean(value_error**2))
    entropies = entropy_from_log_probs(log_probs)
    entropy_mean = float(entropies.mean())
    total = policy_loss + value_coef * value_loss - entropy_coef * entropy_mean
    if not np.isfinite(total):
        raise DivergenceError(f"non-finite loss: {total}")

    probs = np.exp(log_probs)
    # d(policy_loss)/d(log pi(a|s)): zero where the clipped branch is the min.
    gate = unclipped <= clipped
    g_action = np.where(gate, -advantages * ratio, 0.0) / n
    d_logits = -g_action[:, None] * probs
    d_logits[rows, actions] += g_action
    d_logits += (entropy_coef / n) * probs * (log_probs + entropies[:, None])
    d_values = (2.0 * value_coef / n) * value_error
    grads = backward(params, observations, hidden, d_logits, d_values)

    clip_fraction = float(np.mean(np.abs(ratio - 1.0) > clip_epsilon))
    return total, UpdateStats(float(policy_loss), value_loss, entropy_mean, clip_fraction), grads


def clip_gradients(grads: PolicyParams, max_norm: float) -> float:
    """Scale all gradients in place so their global L2 norm is <= max_norm."""
    total = np.sqrt(sum(float((a**2).sum()) for a in grads.arrays()))
    if total > max_norm and total > 0.0:
        scale = max_norm / total
        for arr in grads.arrays():
            arr *= scale
    return total


class AdamState:
    """Adaptive-moment accumulator mirroring the parameter tree."""

    def __init__(self, params: PolicyParams, beta1=0.9, beta2=0.999, eps=1e-8):
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.step = 0
        self.m = params.zeros_like()
        self.v = params.zeros_like()

    def update(self, params: PolicyParams, grads: PolicyParams, learning_rate: float):
        self.step += 1
        bias1 = 1.0 - self.beta1**self.step
        bias2 = 1.0 - self.beta2**self.step
        for p, g, m, v in zip(params.arrays(), grads.arrays(), self.m.arrays(), self.v.arrays()):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g**2
            p -= learning_rate * (m / bias1) / (np.sqrt(v / bias2) + self.eps)


def ppo_update(
    params: PolicyParams,
    batch: RolloutBatch,
    config: PPOConfig,
    rng: np.random.Generator,
    adam: AdamState,
) -> UpdateStats:
    """Several epochs of shuffled minibatch steps; params updated in place."""
    horizon = len(batch)
    stats: list[UpdateStats] = []
    for _ in range(config.epochs_per_update):
        order = rng.permutation(horizon)
        for start in range(0, horizon, config.minibatch_size):
            idx = order[start : start + config.minibatch_size]
            try:
                _, mb_stats, grads = ppo_loss_and_grads(
                    params,
                    batch.observations[idx],
                    batch.actions[idx],
                    batch.log_probs[idx],
                    batch.advantages[idx],
                    batch.returns[idx],
                    config.clip_epsilon,
                    config.value_coef,
                    config.entropy_coef,
                )
            except FloatingPointError as exc:
                raise DivergenceError(str(exc)) from exc
            clip_gradients(grads, config.max_grad_norm)
            adam.update(params, grads, config.learning_rate)
            stats.append(mb_stats)
    return UpdateStats(
        policy_loss=float(np.mean([s.policy_loss for s in stats])),
        value_loss=float(np.mean([s.value_loss for s in stats])),
        entropy=float(np.mean([s.entropy for s in stats])),
        clip_fraction=float(np.mean([s.clip_fraction for s in stats])),
    )


def train(env: ReplicationEnv, config: PPOConfig, seed: int = 0) -> TrainResult:
    """Full training run; one metrics row per update cycle.

    Divergence aborts the run but re-raises with the metrics gathered so far
    attached, so a post-mortem still has the learning curve.
    """
    num_updates = config.total_timesteps // config.rollout_horizon
    if num_updates == 0:
        raise ValueError(
            f"total_timesteps {config.total_timesteps} below one rollout horizon "
            f"{config.rollout_horizon}"
        )
    init_seq, sample_seq, shuffle_seq = np.random.SeedSequence(seed).spawn(3)
    head_size = restricted_action_size(
        env.cluster_config.num_nodes, env.cluster_config.allow_erase
    )
    params = init_params(init_seq, env.observation_size, head_size, config.hidden_width)
    sample_rng = np.random.default_rng(sample_seq)
    shuffle_rng = np.random.default_rng(shuffle_seq)
    adam = AdamState(params)

    rows: list[MetricsRow] = []
    obs = env.observe()
    started = time.perf_counter()
    try:
        for update in range(num_updates):
            transitions, bootstrap_value, obs = collect_rollout(
                env, params, config.rollout_horizon, sample_rng, obs
            )
            batch = build_batch(transitions, bootstrap_value, config)
            stats = ppo_update(params, batch, config, shuffle_rng, adam)
            mean_reward = float(batch.rewards.mean())
            rows.append(
                MetricsRow(
                    timestep=(update + 1) * config.rollout_horizon,
                    mean_reward=mean_reward,
                    mean_variance=-mean_reward / env.tau,
                    entropy=stats.entropy,
                    policy_loss=stats.policy_loss,
                    value_loss=stats.value_loss,
                    clip_fraction=stats.clip_fraction,
                    wall_seconds=time.perf_counter() - started,
                )
            )
    except DivergenceError as exc:
        exc.metrics = rows
        raise

    rng_states = {
        "action_sampler": sample_rng.bit_generator.state,
        "minibatch_shuffle": shuffle_rng.bit_generator.state,
    }
    return TrainResult(params=params, metrics=rows, rng_states=rng_states)

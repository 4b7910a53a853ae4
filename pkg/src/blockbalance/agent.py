"""Estimator-style wrapper around the PPO trainer.

``ReplicationAgent`` follows the fit/predict convention: hyperparameters are
constructor arguments stored verbatim (so get_params/set_params compose with
sweep tooling), ``fit`` trains on an environment, and ``predict`` maps
observation vectors to full action indices. Fitted state lives in
underscore-suffixed attributes.
"""

from __future__ import annotations

import numpy as np

from ._validation import EstimatorParamsMixin, ensure_rng
from .cluster import expand_action_index
from .env import ReplicationEnv
from .policy import forward, greedy_action, sample_action
from .ppo import PPOConfig, train


class ReplicationAgent(EstimatorParamsMixin):
    """PPO policy over replication actions.

    After ``fit``: ``params_`` holds the network weights, ``metrics_`` the
    per-update training curve, ``num_nodes_`` / ``allow_erase_`` the action
    space the policy was trained for.
    """

    def __init__(
        self,
        hidden_width=128,
        learning_rate=0.001,
        total_timesteps=500_000,
        rollout_horizon=2048,
        epochs_per_update=4,
        minibatch_size=256,
        gamma=0.99,
        gae_lambda=0.95,
        clip_epsilon=0.2,
        value_coef=0.5,
        entropy_coef=0.01,
        max_grad_norm=0.5,
        seed=0,
    ):
        self.hidden_width = hidden_width
        self.learning_rate = learning_rate
        self.total_timesteps = total_timesteps
        self.rollout_horizon = rollout_horizon
        self.epochs_per_update = epochs_per_update
        self.minibatch_size = minibatch_size
        self.gamma = gamma
        self.gae_lambda = gae_lambda
        self.clip_epsilon = clip_epsilon
        self.value_coef = value_coef
        self.entropy_coef = entropy_coef
        self.max_grad_norm = max_grad_norm
        self.seed = seed

    def _ppo_config(self) -> PPOConfig:
        return PPOConfig(
            learning_rate=self.learning_rate,
            total_timesteps=self.total_timesteps,
            rollout_horizon=self.rollout_horizon,
            epochs_per_update=self.epochs_per_update,
            minibatch_size=self.minibatch_size,
            gamma=self.gamma,
            gae_lambda=self.gae_lambda,
            clip_epsilon=self.clip_epsilon,
            value_coef=self.value_coef,
            entropy_coef=self.entropy_coef,
            max_grad_norm=self.max_grad_norm,
            hidden_width=self.hidden_width,
        )

    def fit(self, env: ReplicationEnv):
        """Train on the given environment instance (the env is consumed:
        its state and streams advance)."""
        result = train(env, self._ppo_config(), seed=self.seed)
        self._adopt(result.params, env.cluster_config.num_nodes, env.cluster_config.allow_erase)
        self.metrics_ = result.metrics
        self.rng_states_ = result.rng_states
        return self

    def _adopt(self, params, num_nodes, allow_erase):
        """Install trained weights; used by fit and by checkpoint loading."""
        self.params_ = params
        self.num_nodes_ = num_nodes
        self.allow_erase_ = allow_erase
        self._predict_rng = ensure_rng(np.random.SeedSequence(self.seed).spawn(1)[0])
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise RuntimeError("agent is not fitted; call fit() or load a checkpoint")

    def predict(self, observations, deterministic=True):
        """Action indices for one observation vector or a batch of them.

        Deterministic prediction takes the argmax action; stochastic draws
        from the policy distribution using the agent's own seeded stream.
        """
        self._check_fitted()
        observations = np.asarray(observations, dtype=np.float64)
        single = observations.ndim == 1
        batch = observations[None, :] if single else observations
        indices = np.empty(len(batch), dtype=np.int64)
        for i, obs in enumerate(batch):
            dist = forward(self.params_, obs)
            head = greedy_action(dist) if deterministic else sample_action(dist, self._predict_rng)[0]
            indices[i] = expand_action_index(head, self.num_nodes_, self.allow_erase_)
        return int(indices[0]) if single else indices

    def act(self, env: ReplicationEnv, deterministic=True) -> int:
        return self.predict(env.observe(), deterministic=deterministic)

    def score(self, env: ReplicationEnv, episodes=5) -> float:
        """Mean per-step reward under the greedy policy (higher is better)."""
        self._check_fitted()
        total, steps = 0.0, 0
        for _ in range(episodes):
            env.reset()
            while not env.done:
                result = env.step(self.act(env))
                total += result.reward
                steps += 1
        return total / steps

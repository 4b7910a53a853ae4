"""Policy/value network: one shared tanh hidden layer, analytic gradients.

The network is small enough that hand-derived backprop beats pulling in an
autodiff framework: a categorical head produces logits over action indices and
a scalar head estimates the state value. Gradient code takes upstream
gradients with respect to logits and value, so any scalar loss built from
those quantities can be differentiated exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import ensure_rng

PARAM_FIELDS = ("w1", "b1", "wp", "bp", "wv", "bv")


@dataclass
class PolicyParams:
    """All weights; ``bv`` is a zero-dim array so tree ops stay uniform."""

    w1: np.ndarray  # (hidden, input)
    b1: np.ndarray  # (hidden,)
    wp: np.ndarray  # (actions, hidden)
    bp: np.ndarray  # (actions,)
    wv: np.ndarray  # (hidden,)
    bv: np.ndarray  # ()

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_width(self) -> int:
        return self.w1.shape[0]

    @property
    def num_actions(self) -> int:
        return self.wp.shape[0]

    def arrays(self):
        return [getattr(self, name) for name in PARAM_FIELDS]

    def copy(self) -> "PolicyParams":
        return PolicyParams(*[a.copy() for a in self.arrays()])

    def zeros_like(self) -> "PolicyParams":
        return PolicyParams(*[np.zeros_like(a) for a in self.arrays()])


@dataclass
class ActionDistribution:
    logits: np.ndarray
    log_probs: np.ndarray
    value: float


def init_params(seed, input_dim: int, num_actions: int, hidden_width: int = 128) -> PolicyParams:
    """Zero-mean gaussian weights scaled by 1/sqrt(fan_in); zero biases."""
    rng = ensure_rng(seed)
    w1 = rng.normal(0.0, 1.0, size=(hidden_width, input_dim)) / np.sqrt(input_dim)
    wp = rng.normal(0.0, 1.0, size=(num_actions, hidden_width)) / np.sqrt(hidden_width)
    wv = rng.normal(0.0, 1.0, size=hidden_width) / np.sqrt(hidden_width)
    return PolicyParams(
        w1=w1,
        b1=np.zeros(hidden_width),
        wp=wp,
        bp=np.zeros(num_actions),
        wv=wv,
        bv=np.zeros(()),
    )


def log_softmax(logits: np.ndarray) -> np.ndarray:
    """Stable log-softmax along the last axis (max-subtracted)."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def forward(params: PolicyParams, observation: np.ndarray) -> ActionDistribution:
    """Distribution and value estimate for a single observation."""
    observation = np.asarray(observation, dtype=np.float64)
    if observation.shape != (params.input_dim,):
        raise ValueError(
            f"observation shape {observation.shape} does not match input dim "
            f"({params.input_dim},)"
        )
    hidden = np.tanh(params.w1 @ observation + params.b1)
    logits = params.wp @ hidden + params.bp
    value = float(params.wv @ hidden + params.bv)
    return ActionDistribution(logits=logits, log_probs=log_softmax(logits), value=value)


def forward_batch(params: PolicyParams, observations: np.ndarray):
    """Batched forward pass; returns (hidden, log_probs, values) with the
    hidden activations kept for :func:`backward`."""
    observations = np.asarray(observations, dtype=np.float64)
    if observations.ndim != 2 or observations.shape[1] != params.input_dim:
        raise ValueError(
            f"expected observations of shape (n, {params.input_dim}), got "
            f"{observations.shape}"
        )
    hidden = np.tanh(observations @ params.w1.T + params.b1)
    logits = hidden @ params.wp.T + params.bp
    values = hidden @ params.wv + params.bv
    return hidden, log_softmax(logits), values


def backward(
    params: PolicyParams,
    observations: np.ndarray,
    hidden: np.ndarray,
    d_logits: np.ndarray,
    d_values: np.ndarray,
) -> PolicyParams:
    """Exact parameter gradients given upstream gradients w.r.t. the heads.

    ``observations`` and ``hidden`` must come from the forward pass being
    differentiated. Raises FloatingPointError on non-finite gradients, the
    symptom of a diverged update.
    """
    grad_wp = d_logits.T @ hidden
    grad_bp = d_logits.sum(axis=0)
    grad_wv = hidden.T @ d_values
    grad_bv = np.asarray(d_values.sum())
    d_hidden = d_logits @ params.wp + d_values[:, None] * params.wv[None, :]
    d_pre = d_hidden * (1.0 - hidden**2)
    grad_w1 = d_pre.T @ observations
    grad_b1 = d_pre.sum(axis=0)
    grads = PolicyParams(grad_w1, grad_b1, grad_wp, grad_bp, grad_wv, grad_bv)
    for arr in grads.arrays():
        if not np.isfinite(arr).all():
            raise FloatingPointError("non-finite gradient encountered")
    return grads


def sample_action(dist: ActionDistribution, rng: np.random.Generator) -> tuple[int, float]:
    """Categorical draw; returns the index and its behavior log-probability."""
    probs = np.exp(dist.log_probs)
    index = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
    index = min(index, probs.size - 1)
    return index, float(dist.log_probs[index])


def greedy_action(dist: ActionDistribution) -> int:
    return int(np.argmax(dist.logits))


def entropy(dist: ActionDistribution) -> float:
    return float(entropy_from_log_probs(dist.log_probs))


def entropy_from_log_probs(log_probs: np.ndarray) -> np.ndarray:
    """-sum p log p along the last axis; underflowed probabilities contribute 0."""
    probs = np.exp(log_probs)
    return -(probs * log_probs).sum(axis=-1)

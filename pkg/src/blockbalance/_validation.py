"""Input validation helpers and the minimal estimator parameter protocol."""

from __future__ import annotations

import inspect

import numpy as np


def check_positive(name, value):
    if not value > 0:
        raise ValueError(f"{name} must be > 0, got {value!r}")
    return value


def check_nonnegative(name, value):
    if not value >= 0:
        raise ValueError(f"{name} must be >= 0, got {value!r}")
    return value


def check_at_least(name, value, lower):
    if not value >= lower:
        raise ValueError(f"{name} must be >= {lower}, got {value!r}")
    return value


def check_in_range(name, value, lower, upper):
    """Inclusive bounds on both sides."""
    if not lower <= value <= upper:
        raise ValueError(f"{name} must be in [{lower}, {upper}], got {value!r}")
    return value


def check_index(name, value, size):
    if not 0 <= value < size:
        raise ValueError(f"{name} must be in [0, {size}), got {value!r}")
    return int(value)


def ensure_rng(seed) -> np.random.Generator:
    """Coerce a seed, SeedSequence, or Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class EstimatorParamsMixin:
    """get_params/set_params over the constructor signature, sklearn style.

    Hyperparameters must be stored verbatim under their constructor names so
    the estimator composes with parameter sweeps and cloning.
    """

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [
            name
            for name, p in sig.parameters.items()
            if name != "self" and p.kind not in (p.VAR_POSITIONAL, p.VAR_KEYWORD)
        ]

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ValueError(
                    f"invalid parameter {name!r} for {type(self).__name__}; "
                    f"valid parameters: {sorted(valid)}"
                )
            setattr(self, name, value)
        return self

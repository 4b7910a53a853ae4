"""Shared test oracles."""

import numpy as np

from blockbalance.policy import PolicyParams


def finite_difference(loss_fn, params, h=1e-5):
    """Central-difference gradient of a scalar loss over every parameter."""
    grads = params.zeros_like()
    for p_arr, g_arr in zip(params.arrays(), grads.arrays()):
        for idx in np.ndindex(p_arr.shape):
            original = p_arr[idx]
            p_arr[idx] = original + h
            up = loss_fn(params)
            p_arr[idx] = original - h
            down = loss_fn(params)
            p_arr[idx] = original
            g_arr[idx] = (up - down) / (2 * h)
    return grads


def max_relative_error(analytic: PolicyParams, numeric: PolicyParams) -> float:
    worst = 0.0
    for a, f in zip(analytic.arrays(), numeric.arrays()):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(f)), 1e-6)
        worst = max(worst, float((np.abs(a - f) / denom).max()))
    return worst


def variance_two_pass(loads):
    """Textbook two-pass population variance, independent of any numpy path."""
    mean = sum(loads) / len(loads)
    return sum((x - mean) ** 2 for x in loads) / len(loads)

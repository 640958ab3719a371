"""Finite-difference verification of analytic gradients.

The loss callable must run a deterministic forward/backward over the
network and return the scalar loss, leaving gradients accumulated on the
parameters. Central differences then probe every parameter entry.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .network import Network

MAX_CHECKABLE_PARAMS = 10_000


def grad_check(
    net: Network,
    loss_fn: Callable[[Network], float],
    epsilon: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-difference gradients."""
    if net.num_params() >= MAX_CHECKABLE_PARAMS:
        raise ValueError(
            f"grad_check is limited to networks under {MAX_CHECKABLE_PARAMS} "
            f"parameters, got {net.num_params()}"
        )
    net.zero_grad()
    loss = float(loss_fn(net))
    if not np.isfinite(loss):
        raise FloatingPointError("loss is not finite")
    analytic = [p.grad.copy() for p in net.parameters()]

    worst = 0.0
    for p, g in zip(net.parameters(), analytic):
        flat_values = p.values.reshape(-1)
        flat_grad = g.reshape(-1)
        for j in range(flat_values.size):
            original = flat_values[j]
            flat_values[j] = original + epsilon
            net.zero_grad()
            plus = float(loss_fn(net))
            flat_values[j] = original - epsilon
            net.zero_grad()
            minus = float(loss_fn(net))
            flat_values[j] = original
            if not (np.isfinite(plus) and np.isfinite(minus)):
                raise FloatingPointError("loss is not finite during finite differencing")
            numeric = (plus - minus) / (2.0 * epsilon)
            denom = max(abs(flat_grad[j]), abs(numeric), 1e-8)
            worst = max(worst, abs(flat_grad[j] - numeric) / denom)
    net.zero_grad()
    return worst

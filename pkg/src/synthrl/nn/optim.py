"""Adaptive-moment optimizer state and update, plus global-norm clipping."""

from __future__ import annotations

import numpy as np

from .network import FrozenNetworkError, Network
from .tensor import ParamTensor


class OptimizerState:
    """Per-parameter first/second moment arrays and a shared step count."""

    def __init__(self, params: list[ParamTensor]):
        self.step_count = 0
        self.first_moment = [np.zeros_like(p.values) for p in params]
        self.second_moment = [np.zeros_like(p.values) for p in params]


class Adam:
    def __init__(
        self,
        net: Network,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.net = net
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state = OptimizerState(net.parameters())

    def step(self, learning_rate: float | None = None) -> None:
        if self.net.frozen:
            raise FrozenNetworkError("optimizer step on a frozen network")
        lr = self.learning_rate if learning_rate is None else learning_rate
        adam_step(
            self.net.parameters(), self.state, lr, self.beta1, self.beta2, self.eps
        )

    def zero_grad(self) -> None:
        self.net.zero_grad()


def adam_step(
    params: list[ParamTensor],
    state: OptimizerState,
    learning_rate: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One bias-corrected moment update over every parameter tensor."""
    for p in params:
        if not np.isfinite(p.grad).all():
            raise FloatingPointError(f"non-finite gradient in parameter '{p.name}'")
    state.step_count += 1
    t = state.step_count
    c1 = 1.0 - beta1**t
    c2 = 1.0 - beta2**t
    for p, m, v in zip(params, state.first_moment, state.second_moment):
        m *= beta1
        m += (1.0 - beta1) * p.grad
        v *= beta2
        v += (1.0 - beta2) * p.grad * p.grad
        p.values -= learning_rate * (m / c1) / (np.sqrt(v / c2) + eps)
        p.assert_finite("after optimizer step")


def global_grad_norm(params: list[ParamTensor]) -> float:
    total = 0.0
    for p in params:
        total += float(np.sum(p.grad * p.grad))
    return float(np.sqrt(total))


def clip_grad_norm(params: list[ParamTensor], max_norm: float) -> float:
    """Scale all gradients so the global norm is at most ``max_norm``."""
    norm = global_grad_norm(params)
    if max_norm > 0.0 and norm > max_norm:
        scale = max_norm / (norm + 1e-12)
        for p in params:
            p.grad *= scale
    return norm

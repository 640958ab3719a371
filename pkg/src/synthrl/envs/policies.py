"""Tiered behavior policies used to build offline datasets.

Tiers mirror common offline-RL dataset qualities: `random` draws uniform
actions, `expert` runs the scripted controller, `medium` is the expert
corrupted by Gaussian noise plus a fraction of fully random episodes, and
`replay-mix` concatenates all three.
"""

from __future__ import annotations

import numpy as np

from .core import EnvSpec, Environment
from . import pendulum as _pendulum
from . import reacher as _reacher

TIERS = ("random", "medium", "expert", "replay-mix")

MEDIUM_NOISE_FRACTION = 0.3  # sigma = fraction * (high - low)
MEDIUM_RANDOM_EPISODE_PROB = 0.2


def scripted_expert(env: Environment):
    """The deterministic controller for a built-in environment."""
    if env.spec.name == "pendulum":
        return lambda state: np.array([_pendulum.expert_torque(state)])
    if env.spec.name == "reacher":
        return lambda state: _reacher.expert_force(state)
    raise ValueError(f"no scripted expert for environment '{env.spec.name}'")


class BehaviorPolicy:
    """Per-episode action source; `begin_episode` re-rolls episode choices."""

    def __init__(self, env: Environment, tier: str):
        if tier not in ("random", "medium", "expert"):
            raise ValueError(f"unknown behavior tier '{tier}'")
        self.spec: EnvSpec = env.spec
        self.tier = tier
        self._expert = scripted_expert(env) if tier != "random" else None
        self._episode_is_random = False

    def begin_episode(self, rng: np.random.Generator) -> None:
        if self.tier == "medium":
            self._episode_is_random = rng.random() < MEDIUM_RANDOM_EPISODE_PROB

    def action(self, state: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        low, high = self.spec.action_low, self.spec.action_high
        if self.tier == "random" or (self.tier == "medium" and self._episode_is_random):
            return rng.uniform(low, high)
        a = self._expert(state)
        if self.tier == "medium":
            sigma = MEDIUM_NOISE_FRACTION * (high - low)
            a = a + rng.normal(0.0, sigma)
        return np.clip(a, low, high)

"""Normalized-score metric and its reference returns.

Scores follow the usual convention: 0 is the mean return of a uniform
random policy, 100 the mean return of the scripted expert, both measured
over 100 seeded episodes of the real environment.
"""

from __future__ import annotations

import numpy as np

from ..seeding import rng_for
from .core import Environment
from .policies import scripted_expert

REFERENCE_EPISODES = 100
REFERENCE_SEED = 0x5C02E5


def normalized_score(mean_return: float, random_ref: float, expert_ref: float) -> float:
    if not expert_ref > random_ref:
        raise ValueError(
            f"degenerate references: expert {expert_ref} must exceed random {random_ref}"
        )
    return 100.0 * (mean_return - random_ref) / (expert_ref - random_ref)


def rollout_return(env: Environment, policy, rng: np.random.Generator) -> float:
    state = env.reset(rng)
    total = 0.0
    for _ in range(env.spec.max_episode_steps):
        action = policy(state)
        state, reward = env.step(state, action)
        total += reward
    return total


def measure_references(env: Environment, n_episodes: int = REFERENCE_EPISODES) -> dict:
    """Measured (random_ref, expert_ref) for an environment, seeded."""
    expert = scripted_expert(env)

    random_returns = []
    for ep in range(n_episodes):
        rng = rng_for(REFERENCE_SEED, env.spec.name, "random", ep)
        low, high = env.spec.action_low, env.spec.action_high
        random_returns.append(
            rollout_return(env, lambda s: rng.uniform(low, high), rng)
        )

    expert_returns = []
    for ep in range(n_episodes):
        rng = rng_for(REFERENCE_SEED, env.spec.name, "expert", ep)
        expert_returns.append(rollout_return(env, expert, rng))

    return {
        "env": env.spec.name,
        "episodes": n_episodes,
        "random_ref": float(np.mean(random_returns)),
        "expert_ref": float(np.mean(expert_returns)),
    }

"""Planar point-mass reacher with drag; fully actuated 2-D companion task.

State is [x, y, vx, vy]; the goal is the origin. Force commands in
[-1, 1]^2 accelerate the mass, drag dissipates, positions are confined to
a box so states stay bounded under any action sequence.
"""

from __future__ import annotations

import numpy as np

from .core import EnvSpec, Environment

DT = 0.05
DRAG = 0.8
FORCE_GAIN = 2.0
BOX = 2.0
VEL_MAX = 4.0
MAX_STEPS = 120


def reacher_spec() -> EnvSpec:
    return EnvSpec(
        name="reacher",
        state_dim=4,
        action_dim=2,
        action_low=np.array([-1.0, -1.0]),
        action_high=np.array([1.0, 1.0]),
        max_episode_steps=MAX_STEPS,
        dt=DT,
    )


def reacher_step(state: np.ndarray, action: np.ndarray):
    state = np.asarray(state, dtype=np.float64)
    action = np.asarray(action, dtype=np.float64).reshape(2)
    if not (np.isfinite(state).all() and np.isfinite(action).all()):
        raise ValueError("non-finite input to reacher_step")
    if np.any(np.abs(action) > 1.0 + 1e-9):
        raise ValueError("force outside [-1, 1] bounds")

    pos, vel = state[:2], state[2:]
    reward = -(float(pos @ pos) + 0.001 * float(action @ action))

    vel_next = vel + DT * (FORCE_GAIN * action - DRAG * vel)
    vel_next = np.clip(vel_next, -VEL_MAX, VEL_MAX)
    pos_next = np.clip(pos + DT * vel_next, -BOX, BOX)
    return np.concatenate([pos_next, vel_next]), reward


class Reacher(Environment):
    def __init__(self):
        self.spec = reacher_spec()

    def reset(self, rng: np.random.Generator, state: np.ndarray | None = None) -> np.ndarray:
        if state is not None:
            return np.asarray(state, dtype=np.float64).copy()
        pos = rng.uniform(-1.5, 1.5, size=2)
        return np.concatenate([pos, np.zeros(2)])

    def step(self, state: np.ndarray, action: np.ndarray):
        return reacher_step(state, action)


def expert_force(state: np.ndarray) -> np.ndarray:
    """PD law toward the origin."""
    pos, vel = state[:2], state[2:]
    return np.clip(-1.8 * pos - 0.9 * vel, -1.0, 1.0)

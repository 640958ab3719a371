"""Environment abstraction and the transition/trajectory record types."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class EnvSpec:
    name: str
    state_dim: int
    action_dim: int
    action_low: np.ndarray
    action_high: np.ndarray
    max_episode_steps: int
    dt: float

    def __post_init__(self):
        low = np.asarray(self.action_low, dtype=np.float64)
        high = np.asarray(self.action_high, dtype=np.float64)
        object.__setattr__(self, "action_low", low)
        object.__setattr__(self, "action_high", high)
        if self.state_dim <= 0 or self.action_dim <= 0:
            raise ValueError("state_dim and action_dim must be positive")
        if low.shape != (self.action_dim,) or high.shape != (self.action_dim,):
            raise ValueError("action bounds must match action_dim")
        if not np.all(low < high):
            raise ValueError("action_low must be elementwise below action_high")
        if self.max_episode_steps < 1:
            raise ValueError("max_episode_steps must be at least 1")

    def clip_action(self, action: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(action, dtype=np.float64), self.action_low, self.action_high)


@dataclass
class Transition:
    """One (s, a, r, s', done) record; the atom of datasets and buffers."""

    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray
    done: bool

    def validate(self, spec: EnvSpec) -> None:
        for name, arr, dim in (
            ("state", self.state, spec.state_dim),
            ("next_state", self.next_state, spec.state_dim),
            ("action", self.action, spec.action_dim),
        ):
            arr = np.asarray(arr)
            if arr.shape != (dim,):
                raise ValueError(f"{name} has shape {arr.shape}, expected ({dim},)")
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} contains non-finite entries")
        if not np.isfinite(self.reward):
            raise ValueError("reward is not finite")
        if np.any(self.action < spec.action_low - 1e-9) or np.any(
            self.action > spec.action_high + 1e-9
        ):
            raise ValueError("action outside bounds")


@dataclass
class Trajectory:
    """An ordered transition chain from one episode."""

    transitions: list[Transition]
    behavior_tier: str
    seed: int
    traj_id: int = 0

    def __len__(self) -> int:
        return len(self.transitions)

    def states(self) -> np.ndarray:
        """All visited states, length len(self)+1 (chain plus final state)."""
        rows = [t.state for t in self.transitions]
        rows.append(self.transitions[-1].next_state)
        return np.asarray(rows)

    def actions(self) -> np.ndarray:
        return np.asarray([t.action for t in self.transitions])

    def rewards(self) -> np.ndarray:
        return np.asarray([t.reward for t in self.transitions])

    def total_return(self) -> float:
        return float(sum(t.reward for t in self.transitions))

    def validate_chain(self) -> None:
        for i in range(len(self.transitions) - 1):
            if not np.array_equal(
                self.transitions[i].next_state, self.transitions[i + 1].state
            ):
                raise ValueError(f"trajectory broken between steps {i} and {i + 1}")
            if self.transitions[i].done:
                raise ValueError(f"done set before the final step (step {i})")


class Environment:
    """Pure-function environment: `step` has no hidden state."""

    spec: EnvSpec

    def reset(self, rng: np.random.Generator, state: np.ndarray | None = None) -> np.ndarray:
        raise NotImplementedError

    def step(self, state: np.ndarray, action: np.ndarray):
        raise NotImplementedError

"""Dataset normalization: standardized states, min-max rewards in [0, 1]."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STD_FLOOR = 1e-6


@dataclass
class NormStats:
    state_mean: np.ndarray
    state_std: np.ndarray
    reward_min: float
    reward_max: float

    def __post_init__(self):
        self.state_mean = np.asarray(self.state_mean, dtype=np.float64)
        self.state_std = np.asarray(self.state_std, dtype=np.float64)
        if np.any(self.state_std <= 0.0):
            raise ValueError("state_std must be positive elementwise")
        if not self.reward_max > self.reward_min:
            raise ValueError("reward_max must exceed reward_min")

    # -- states ---------------------------------------------------------

    def norm_state(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.state_mean) / self.state_std

    def denorm_state(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=np.float64) * self.state_std + self.state_mean

    # -- rewards ----------------------------------------------------------

    def norm_reward(self, r):
        return (np.asarray(r, dtype=np.float64) - self.reward_min) / (
            self.reward_max - self.reward_min
        )

    def denorm_reward(self, r):
        return np.asarray(r, dtype=np.float64) * (self.reward_max - self.reward_min) + self.reward_min

    def to_dict(self) -> dict:
        return {
            "state_mean": self.state_mean.tolist(),
            "state_std": self.state_std.tolist(),
            "reward_min": self.reward_min,
            "reward_max": self.reward_max,
        }

    @staticmethod
    def from_dict(d: dict) -> "NormStats":
        return NormStats(
            state_mean=np.asarray(d["state_mean"]),
            state_std=np.asarray(d["state_std"]),
            reward_min=float(d["reward_min"]),
            reward_max=float(d["reward_max"]),
        )


def fit_norm_stats(states: np.ndarray, rewards: np.ndarray) -> NormStats:
    """Fit stats over a full dataset; rejects degenerate reward columns."""
    states = np.asarray(states, dtype=np.float64)
    rewards = np.asarray(rewards, dtype=np.float64)
    if states.size == 0 or rewards.size == 0:
        raise ValueError("cannot fit normalization stats on an empty dataset")
    rmin, rmax = float(rewards.min()), float(rewards.max())
    if rmax <= rmin:
        raise ValueError(
            f"constant reward column (min == max == {rmin}); reward range undefined"
        )
    std = np.maximum(states.std(axis=0), STD_FLOOR)
    return NormStats(
        state_mean=states.mean(axis=0),
        state_std=std,
        reward_min=rmin,
        reward_max=rmax,
    )


def norm_action(action: np.ndarray, low: np.ndarray, high: np.ndarray) -> np.ndarray:
    """Map env-bounded actions onto [-1, 1]."""
    return 2.0 * (np.asarray(action, dtype=np.float64) - low) / (high - low) - 1.0


def denorm_action(action: np.ndarray, low: np.ndarray, high: np.ndarray) -> np.ndarray:
    return (np.asarray(action, dtype=np.float64) + 1.0) / 2.0 * (high - low) + low

"""Sliding-window extraction from trajectory datasets.

A window anchors at a state index i and packages the n states ending at
i, the action taken there, and the following tau states and rewards as
targets. Windows never cross trajectory boundaries; trajectories shorter
than n + tau (counted in states) are front-padded by repeating their
first state and flagged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..envs.core import Trajectory
from ..envs.datasets import Dataset
from ..envs.normalize import NormStats, norm_action


@dataclass
class WindowSet:
    histories: np.ndarray  # (N, n, state_dim)
    actions: np.ndarray  # (N, action_dim)
    target_states: np.ndarray  # (N, tau, state_dim)
    target_rewards: np.ndarray  # (N, tau)
    provenance: list[tuple[int, int]]  # (traj_id, anchor state index)
    padded: np.ndarray  # (N,) bool

    def __len__(self) -> int:
        return self.histories.shape[0]

    def subset(self, idx: np.ndarray) -> "WindowSet":
        return WindowSet(
            histories=self.histories[idx],
            actions=self.actions[idx],
            target_states=self.target_states[idx],
            target_rewards=self.target_rewards[idx],
            provenance=[self.provenance[i] for i in np.atleast_1d(idx)],
            padded=self.padded[idx],
        )


def windows_from_trajectory(traj: Trajectory, window_n: int, horizon_tau: int):
    """Yield (anchor, history, action, target_states, target_rewards, padded)."""
    states = traj.states()  # (T+1, s)
    actions = traj.actions()
    rewards = traj.rewards()
    n_transitions = len(traj)
    last_anchor = n_transitions - horizon_tau
    if last_anchor < 0:
        return
    full_length = states.shape[0] >= window_n + horizon_tau
    first_anchor = window_n - 1 if full_length else 0
    for i in range(first_anchor, last_anchor + 1):
        lo = i - window_n + 1
        if lo >= 0:
            history = states[lo : i + 1]
            padded = False
        else:
            pad = np.repeat(states[0][None, :], -lo, axis=0)
            history = np.concatenate([pad, states[: i + 1]], axis=0)
            padded = True
        yield (
            i,
            history,
            actions[i],
            states[i + 1 : i + 1 + horizon_tau],
            rewards[i : i + horizon_tau],
            padded,
        )


def build_windows(
    dataset: Dataset,
    window_n: int,
    horizon_tau: int,
    stats: NormStats | None = None,
) -> WindowSet:
    """Extract every admissible window; normalized when stats are given."""
    ordered = sorted(dataset.trajectories, key=lambda t: (len(t), t.traj_id))
    histories, acts, t_states, t_rewards, provenance, padded_flags = [], [], [], [], [], []
    for traj in ordered:
        for anchor, hist, action, ts, tr, padded in windows_from_trajectory(
            traj, window_n, horizon_tau
        ):
            histories.append(hist)
            acts.append(action)
            t_states.append(ts)
            t_rewards.append(tr)
            provenance.append((traj.traj_id, anchor))
            padded_flags.append(padded)
    if not histories:
        raise ValueError(
            f"no trajectory is long enough for windows (need {horizon_tau} transitions)"
        )
    out = WindowSet(
        histories=np.asarray(histories, dtype=np.float64),
        actions=np.asarray(acts, dtype=np.float64),
        target_states=np.asarray(t_states, dtype=np.float64),
        target_rewards=np.asarray(t_rewards, dtype=np.float64),
        provenance=provenance,
        padded=np.asarray(padded_flags, dtype=bool),
    )
    if stats is not None:
        out.histories = stats.norm_state(out.histories)
        out.target_states = stats.norm_state(out.target_states)
        out.target_rewards = np.asarray(stats.norm_reward(out.target_rewards))
        out.actions = norm_action(out.actions, dataset.spec.action_low, dataset.spec.action_high)
    return out

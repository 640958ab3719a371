"""Offline dataset generation and the on-disk JSONL + manifest format.

Files come in pairs: `<name>.transitions.jsonl` holds one transition per
line with the fields (traj, step, state, action, reward, next_state,
done) in that order; `<name>.manifest.json` records the environment,
tier, counts, seed, format version, a sha256 checksum of the transitions
file, and an optional normalization-stats reference. Generation is
bit-deterministic per (env, tier, n, seed).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..seeding import derive_seed, rng_for
from .core import Environment, EnvSpec, Trajectory, Transition
from .pendulum import Pendulum
from .policies import TIERS, BehaviorPolicy
from .reacher import Reacher

FORMAT_VERSION = 1


def make_env(name: str) -> Environment:
    if name == "pendulum":
        return Pendulum()
    if name == "reacher":
        return Reacher()
    raise ValueError(f"unknown environment '{name}'")


@dataclass
class DatasetManifest:
    env: str
    tier: str
    n_transitions: int
    n_trajectories: int
    seed: int
    checksum: str
    norm_stats_ref: str | None = None
    format_version: int = FORMAT_VERSION

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "env": self.env,
            "tier": self.tier,
            "transitions": self.n_transitions,
            "trajectories": self.n_trajectories,
            "seed": self.seed,
            "checksum": self.checksum,
            "norm_stats": self.norm_stats_ref,
            "fields": ["traj", "step", "state", "action", "reward", "next_state", "done"],
        }


@dataclass
class Dataset:
    spec: EnvSpec
    tier: str
    seed: int
    trajectories: list[Trajectory] = field(default_factory=list)

    @property
    def n_transitions(self) -> int:
        return sum(len(t) for t in self.trajectories)

    def all_states(self) -> np.ndarray:
        return np.concatenate([[tr.state for tr in t.transitions] for t in self.trajectories])

    def all_actions(self) -> np.ndarray:
        return np.concatenate([[tr.action for tr in t.transitions] for t in self.trajectories])

    def all_rewards(self) -> np.ndarray:
        return np.concatenate([[tr.reward for tr in t.transitions] for t in self.trajectories])

    def flat_transitions(self) -> list[Transition]:
        return [tr for t in self.trajectories for tr in t.transitions]


def _rollout_trajectory(
    env: Environment, policy: BehaviorPolicy, traj_seed: int, max_steps: int, traj_id: int, tier: str
) -> Trajectory:
    rng = rng_for(traj_seed)
    policy.begin_episode(rng)
    state = env.reset(rng)
    transitions = []
    for step in range(max_steps):
        action = policy.action(state, rng)
        next_state, reward = env.step(state, action)
        transitions.append(
            Transition(
                state=state.copy(),
                action=np.asarray(action, dtype=np.float64).copy(),
                reward=float(reward),
                next_state=next_state.copy(),
                done=step == max_steps - 1,
            )
        )
        state = next_state
    return Trajectory(transitions=transitions, behavior_tier=tier, seed=traj_seed, traj_id=traj_id)


def _generate_single_tier(env: Environment, tier: str, n_transitions: int, seed: int) -> list[Trajectory]:
    policy = BehaviorPolicy(env, tier)
    max_steps = env.spec.max_episode_steps
    trajectories = []
    produced = 0
    traj_index = 0
    while produced < n_transitions:
        remaining = n_transitions - produced
        steps = min(max_steps, remaining)
        traj_seed = derive_seed(seed, "traj", traj_index)
        traj = _rollout_trajectory(env, policy, traj_seed, steps, traj_index, tier)
        if steps < max_steps:
            traj.transitions[-1].done = False  # truncated tail, not a real episode end
        trajectories.append(traj)
        produced += len(traj)
        traj_index += 1
    return trajectories


def generate_dataset(env: Environment, tier: str, n_transitions: int, seed: int) -> Dataset:
    """Roll out the tier's behavior policy until exactly n transitions exist."""
    if n_transitions < 1:
        raise ValueError("n_transitions must be at least 1")
    if tier not in TIERS:
        raise ValueError(f"unknown tier '{tier}', expected one of {TIERS}")

    if tier == "replay-mix":
        per = n_transitions // 3
        counts = [per, per, n_transitions - 2 * per]
        trajectories = []
        for sub_tier, count in zip(("random", "medium", "expert"), counts):
            if count == 0:
                continue
            subset = _generate_single_tier(
                env, sub_tier, count, derive_seed(seed, "mix", sub_tier)
            )
            trajectories.extend(subset)
        for i, traj in enumerate(trajectories):
            traj.traj_id = i
    else:
        trajectories = _generate_single_tier(env, tier, n_transitions, seed)

    dataset = Dataset(spec=env.spec, tier=tier, seed=seed, trajectories=trajectories)
    assert dataset.n_transitions == n_transitions
    return dataset


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _transition_line(traj_id: int, step: int, tr: Transition) -> str:
    record = {
        "traj": traj_id,
        "step": step,
        "state": [float(v) for v in tr.state],
        "action": [float(v) for v in tr.action],
        "reward": float(tr.reward),
        "next_state": [float(v) for v in tr.next_state],
        "done": bool(tr.done),
    }
    return json.dumps(record, separators=(",", ":"))


def save_dataset(dataset: Dataset, directory: str | Path, name: str, norm_stats_ref: str | None = None) -> DatasetManifest:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = []
    for traj in dataset.trajectories:
        for step, tr in enumerate(traj.transitions):
            lines.append(_transition_line(traj.traj_id, step, tr))
    payload = ("\n".join(lines) + "\n").encode("utf-8")
    (directory / f"{name}.transitions.jsonl").write_bytes(payload)

    manifest = DatasetManifest(
        env=dataset.spec.name,
        tier=dataset.tier,
        n_transitions=dataset.n_transitions,
        n_trajectories=len(dataset.trajectories),
        seed=dataset.seed,
        checksum=hashlib.sha256(payload).hexdigest(),
        norm_stats_ref=norm_stats_ref,
    )
    (directory / f"{name}.manifest.json").write_text(
        json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest


def load_dataset(directory: str | Path, name: str, verify: bool = True) -> tuple[Dataset, DatasetManifest]:
    directory = Path(directory)
    manifest_raw = json.loads((directory / f"{name}.manifest.json").read_text(encoding="utf-8"))
    if manifest_raw.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported dataset format version {manifest_raw.get('format_version')}")
    payload = (directory / f"{name}.transitions.jsonl").read_bytes()
    checksum = hashlib.sha256(payload).hexdigest()
    if verify and checksum != manifest_raw["checksum"]:
        raise ValueError(f"dataset '{name}': transitions checksum mismatch")

    env = make_env(manifest_raw["env"])
    by_traj: dict[int, list] = {}
    for line in payload.decode("utf-8").splitlines():
        if not line:
            continue
        rec = json.loads(line)
        by_traj.setdefault(rec["traj"], []).append(rec)

    trajectories = []
    for traj_id in sorted(by_traj):
        records = sorted(by_traj[traj_id], key=lambda r: r["step"])
        transitions = [
            Transition(
                state=np.asarray(r["state"], dtype=np.float64),
                action=np.asarray(r["action"], dtype=np.float64),
                reward=float(r["reward"]),
                next_state=np.asarray(r["next_state"], dtype=np.float64),
                done=bool(r["done"]),
            )
            for r in records
        ]
        trajectories.append(
            Trajectory(
                transitions=transitions,
                behavior_tier=manifest_raw["tier"],
                seed=manifest_raw["seed"],
                traj_id=traj_id,
            )
        )
    manifest = DatasetManifest(
        env=manifest_raw["env"],
        tier=manifest_raw["tier"],
        n_transitions=manifest_raw["transitions"],
        n_trajectories=manifest_raw["trajectories"],
        seed=manifest_raw["seed"],
        checksum=manifest_raw["checksum"],
        norm_stats_ref=manifest_raw.get("norm_stats"),
    )
    dataset = Dataset(spec=env.spec, tier=manifest.tier, seed=manifest.seed, trajectories=trajectories)
    if dataset.n_transitions != manifest.n_transitions:
        raise ValueError(
            f"dataset '{name}': manifest claims {manifest.n_transitions} transitions, "
            f"file holds {dataset.n_transitions}"
        )
    return dataset, manifest

"""The simulator package: history encoder, gated refiner, reward head.

Prediction works in normalized space. Each rollout step re-encodes the
current window together with the action, projects the context into the
refiner's hidden state, advances the gated cell once from the newest
state, and emits a residual state update plus a reward for the
(state, action, next state) triple. The predicted state is appended to
the window (oldest dropped) and the cycle repeats, so a horizon-tau
prediction is exactly tau chained single-step predictions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, asdict

import numpy as np

from ..envs.normalize import NormStats
from ..nn import (
    Activation,
    Network,
    RecurrentState,
    activation,
    affine,
    dropout,
    gated,
    long_memory,
    make_dropout_masks,
    mc_forward,
)
from ..nn.network import FrozenNetworkError
from ..seeding import derive_seed

NET_NAMES = ("encoder", "ctx_proj", "refiner", "state_head", "reward_head")


@dataclass
class WorldModelConfig:
    window_n: int = 10
    encoder_layers: int = 2  # paper-scale runs use 10
    encoder_hidden: int = 32  # paper-scale 128
    refiner_hidden: int = 64  # paper-scale 512
    reward_hidden: int = 32
    horizon_tau: int = 5
    dropout_rate: float = 0.1
    patience: int = 3
    max_epochs: int = 12
    teacher_forcing_epochs: int | None = None  # default: max_epochs // 2
    batch_size: int = 256
    learning_rate: float = 1e-3
    reward_loss_weight: float = 1.0
    grad_clip: float = 1.0
    holdout_fraction: float = 0.1

    def __post_init__(self):
        if self.window_n < 1:
            raise ValueError("window_n must be at least 1")
        if self.horizon_tau < 1:
            raise ValueError("horizon_tau must be at least 1")
        if not 0.0 < self.dropout_rate < 1.0:
            raise ValueError(
                "dropout_rate must lie strictly in (0, 1); stochastic-dropout "
                "uncertainty estimates need a nonzero rate"
            )

    def forcing_epochs(self) -> int:
        if self.teacher_forcing_epochs is not None:
            return self.teacher_forcing_epochs
        return self.max_epochs // 2

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "WorldModelConfig":
        return WorldModelConfig(**d)


@dataclass
class StepCache:
    enc_caches: list
    proj_cache: dict
    refiner_cache: dict
    head_cache: dict
    reward_cache: dict
    window_refs: list[int]  # per slot: -1 = constant history, else prediction index
    s_last_ref: int


def build_networks(config: WorldModelConfig, state_dim: int, action_dim: int, seed: int) -> dict[str, Network]:
    in_dim = state_dim + action_dim
    h, hg = config.encoder_hidden, config.refiner_hidden
    enc_specs = [long_memory(in_dim, h)]
    for _ in range(config.encoder_layers - 1):
        enc_specs.append(long_memory(h, h))
    return {
        "encoder": Network(enc_specs, derive_seed(seed, "encoder")),
        "ctx_proj": Network(
            [affine(h, hg), activation(hg, Activation.TANH)], derive_seed(seed, "ctx_proj")
        ),
        "refiner": Network([gated(in_dim, hg)], derive_seed(seed, "refiner")),
        "state_head": Network(
            [dropout(hg, config.dropout_rate), affine(hg, state_dim)],
            derive_seed(seed, "state_head"),
        ),
        "reward_head": Network(
            [
                affine(2 * state_dim + action_dim, config.reward_hidden),
                activation(config.reward_hidden, Activation.RELU),
                dropout(config.reward_hidden, config.dropout_rate),
                affine(config.reward_hidden, 1),
            ],
            derive_seed(seed, "reward_head"),
        ),
    }


class WorldModelPackage:
    def __init__(
        self,
        config: WorldModelConfig,
        state_dim: int,
        action_dim: int,
        seed: int,
        stats: NormStats | None = None,
        nets: dict[str, Network] | None = None,
    ):
        self.config = config
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.seed = seed
        self.stats = stats
        self.nets = nets if nets is not None else build_networks(config, state_dim, action_dim, seed)
        self.frozen = False
        self.report: dict = {}
        self._warned_unfrozen = False

    # -- bookkeeping -------------------------------------------------------

    def networks(self) -> list[Network]:
        return [self.nets[name] for name in NET_NAMES]

    def parameters(self):
        return [p for net in self.networks() for p in net.parameters()]

    def checksums(self) -> dict[str, str]:
        return {name: self.nets[name].checksum() for name in NET_NAMES}

    def freeze(self) -> "WorldModelPackage":
        """Idempotent; afterwards every parameter-mutating call is rejected."""
        for net in self.networks():
            net.freeze()
        self.frozen = True
        return self

    def _check_mutable(self):
        if self.frozen:
            raise FrozenNetworkError("world-model package is frozen")

    # -- forward machinery ---------------------------------------------------

    def _step(
        self,
        window: np.ndarray,
        action: np.ndarray,
        training: bool = False,
        head_masks=None,
        reward_masks=None,
        want_cache: bool = False,
        window_refs: list[int] | None = None,
        s_last_ref: int = -1,
    ):
        n = self.config.window_n
        enc = self.nets["encoder"]
        states = None
        enc_caches = []
        ctx = None
        for t in range(n):
            x = np.concatenate([window[:, t, :], action], axis=1)
            if want_cache:
                ctx, states, cache = enc.forward(x, states=states, want_cache=True)
                enc_caches.append(cache)
            else:
                ctx, states = enc.forward(x, states=states)
        if want_cache:
            h0, _, proj_cache = self.nets["ctx_proj"].forward(ctx, want_cache=True)
        else:
            h0, _ = self.nets["ctx_proj"].forward(ctx)
        s_last = window[:, -1, :]
        rx = np.concatenate([s_last, action], axis=1)
        ref_state = [RecurrentState(h0)]
        if want_cache:
            h1, _, refiner_cache = self.nets["refiner"].forward(rx, states=ref_state, want_cache=True)
            delta, _, head_cache = self.nets["state_head"].forward(
                h1, masks=head_masks, training=training, want_cache=True
            )
        else:
            h1, _ = self.nets["refiner"].forward(rx, states=ref_state)
            delta, _ = self.nets["state_head"].forward(h1, masks=head_masks, training=training)
        s_next = s_last + delta
        r_in = np.concatenate([s_last, action, s_next], axis=1)
        if want_cache:
            r_out, _, reward_cache = self.nets["reward_head"].forward(
                r_in, masks=reward_masks, training=training, want_cache=True
            )
            cache = StepCache(
                enc_caches=enc_caches,
                proj_cache=proj_cache,
                refiner_cache=refiner_cache,
                head_cache=head_cache,
                reward_cache=reward_cache,
                window_refs=list(window_refs) if window_refs is not None else [-1] * n,
                s_last_ref=s_last_ref,
            )
            return s_next, r_out[:, 0], cache
        r_out, _ = self.nets["reward_head"].forward(r_in, masks=reward_masks, training=training)
        return s_next, r_out[:, 0], None

    def rollout(
        self,
        histories: np.ndarray,
        actions: np.ndarray,
        horizon: int,
        training: bool = False,
        teacher_states: np.ndarray | None = None,
        mask_seed: int | None = None,
        want_cache: bool = False,
    ):
        """Auto-regressive batched rollout.

        ``teacher_states`` (B, horizon, s) switches feedback to ground
        truth (teacher forcing). Returns (pred_states (B, H, s),
        pred_rewards (B, H), caches or None).
        """
        window = np.asarray(histories, dtype=np.float64)
        actions = np.asarray(actions, dtype=np.float64)
        B = window.shape[0]
        refs = [-1] * self.config.window_n
        preds, rewards, caches = [], [], []
        for j in range(horizon):
            head_masks = reward_masks = None
            if training and mask_seed is not None:
                head_masks = make_dropout_masks(
                    self.nets["state_head"], derive_seed(mask_seed, "head", j), B
                )
                reward_masks = make_dropout_masks(
                    self.nets["reward_head"], derive_seed(mask_seed, "reward", j), B
                )
            s_last_ref = refs[-1]
            s_next, r, cache = self._step(
                window,
                actions,
                training=training,
                head_masks=head_masks,
                reward_masks=reward_masks,
                want_cache=want_cache,
                window_refs=refs,
                s_last_ref=s_last_ref,
            )
            preds.append(s_next)
            rewards.append(r)
            if want_cache:
                caches.append(cache)
            if teacher_states is not None:
                feedback = teacher_states[:, j, :]
                refs = refs[1:] + [-1]
            else:
                feedback = s_next
                refs = refs[1:] + [j]
            window = np.concatenate([window[:, 1:, :], feedback[:, None, :]], axis=1)
        pred_states = np.stack(preds, axis=1)
        pred_rewards = np.stack(rewards, axis=1)
        return pred_states, pred_rewards, (caches if want_cache else None)

    def rollout_backward(self, caches: list[StepCache], d_states: np.ndarray, d_rewards: np.ndarray):
        """Accumulate parameter gradients for a cached rollout.

        ``d_states`` (B, H, s) and ``d_rewards`` (B, H) are the loss
        gradients at each predicted state/reward. Handles the feedback
        paths: a predicted state re-enters later steps through the window,
        the refiner input, the residual connection and the reward input.
        """
        horizon = len(caches)
        s = self.state_dim
        d_pred_acc = [d_states[:, j, :].copy() for j in range(horizon)]
        for j in range(horizon - 1, -1, -1):
            cache = caches[j]
            d_r = d_rewards[:, j][:, None]
            d_rin, _ = self.nets["reward_head"].backward(cache.reward_cache, d_r)
            d_s_last = d_rin[:, :s].copy()
            d_s_next = d_pred_acc[j] + d_rin[:, s + self.action_dim :]

            # residual update: s_next = s_last + delta
            d_s_last += d_s_next
            d_h1, _ = self.nets["state_head"].backward(cache.head_cache, d_s_next)

            d_rx, prev_sg = self.nets["refiner"].backward(cache.refiner_cache, d_h1)
            d_s_last += d_rx[:, :s]
            d_h0 = prev_sg[0].hidden
            d_ctx, _ = self.nets["ctx_proj"].backward(cache.proj_cache, d_h0)

            dy = d_ctx
            sg = None
            enc = self.nets["encoder"]
            for t in range(self.config.window_n - 1, -1, -1):
                dx, sg = enc.backward(cache.enc_caches[t], dy, state_grads=sg)
                dy = np.zeros_like(dy)
                ref = cache.window_refs[t]
                if ref >= 0:
                    d_pred_acc[ref] += dx[:, :s]
            if cache.s_last_ref >= 0:
                d_pred_acc[cache.s_last_ref] += d_s_last

    # -- public prediction API -------------------------------------------------

    def predict(self, history: np.ndarray, action: np.ndarray, horizon: int | None = None):
        """Normalized-space rollout for one window; returns (states, rewards).

        Deterministic (no dropout). Emits a warning when the package has
        not been trained and frozen.
        """
        if not self.frozen and not self._warned_unfrozen:
            warnings.warn("predicting with an unfrozen (untrained) world model", stacklevel=2)
            self._warned_unfrozen = True
        history = np.asarray(history, dtype=np.float64)
        if history.shape != (self.config.window_n, self.state_dim):
            raise ValueError(
                f"history must have shape ({self.config.window_n}, {self.state_dim}), "
                f"got {history.shape}"
            )
        action = np.asarray(action, dtype=np.float64).reshape(-1)
        if action.shape != (self.action_dim,):
            raise ValueError(f"action must have shape ({self.action_dim},), got {action.shape}")
        horizon = self.config.horizon_tau if horizon is None else horizon
        states, rewards, _ = self.rollout(history[None], action[None], horizon)
        return states[0], rewards[0]

    def predict_next_batch(self, histories: np.ndarray, actions: np.ndarray) -> np.ndarray:
        """First predicted next state for a batch of windows (eval mode)."""
        s_next, _, _ = self._step(
            np.asarray(histories, dtype=np.float64), np.asarray(actions, dtype=np.float64)
        )
        return s_next

    def predict_next(self, history: np.ndarray, action: np.ndarray) -> np.ndarray:
        return self.predict_next_batch(history[None], np.asarray(action, dtype=np.float64)[None])[0]

    def mc_predict_next(
        self,
        history: np.ndarray,
        action: np.ndarray,
        k: int,
        base_seed: int,
        identical_masks: bool = False,
    ) -> np.ndarray:
        """k dropout-randomized next-state predictions, shape (k, state_dim).

        The deterministic trunk (encoder, projection, refiner) runs once;
        the dropout-bearing state head is sampled k times via mc_forward.
        """
        history = np.asarray(history, dtype=np.float64)
        action = np.asarray(action, dtype=np.float64).reshape(-1)
        window = history[None]
        act = action[None]
        enc = self.nets["encoder"]
        states = None
        ctx = None
        for t in range(self.config.window_n):
            x = np.concatenate([window[:, t, :], act], axis=1)
            ctx, states = enc.forward(x, states=states)
        h0, _ = self.nets["ctx_proj"].forward(ctx)
        s_last = window[:, -1, :]
        h1, _ = self.nets["refiner"].forward(
            np.concatenate([s_last, act], axis=1), states=[RecurrentState(h0)]
        )
        deltas = mc_forward(
            self.nets["state_head"], h1, k, base_seed, identical_masks=identical_masks
        )
        return np.stack([s_last[0] + d[0] for d in deltas], axis=0)

    # -- persistence ---------------------------------------------------------

    def meta(self) -> dict:
        return {
            "kind": "world-model",
            "config": self.config.to_dict(),
            "state_dim": self.state_dim,
            "action_dim": self.action_dim,
            "seed": self.seed,
            "frozen": self.frozen,
            "report": self.report,
            "norm_stats": self.stats.to_dict() if self.stats is not None else None,
        }

    @staticmethod
    def from_checkpoint(nets: dict[str, Network], meta: dict) -> "WorldModelPackage":
        config = WorldModelConfig.from_dict(meta["config"])
        stats = NormStats.from_dict(meta["norm_stats"]) if meta.get("norm_stats") else None
        pkg = WorldModelPackage(
            config,
            state_dim=int(meta["state_dim"]),
            action_dim=int(meta["action_dim"]),
            seed=int(meta["seed"]),
            stats=stats,
            nets=nets,
        )
        pkg.report = meta.get("report", {})
        if meta.get("frozen"):
            pkg.freeze()
        return pkg

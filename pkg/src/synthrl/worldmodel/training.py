"""Stage-1 training loop: window-batch SGD with R-squared gating.

Training minimizes summed state MSE + reward MSE over the prediction
horizon. The first half of the epoch budget uses teacher forcing, the
rest is fully auto-regressive. After every epoch the held-out windows
(split by whole trajectories) are scored auto-regressively; training
stops once validation loss has not improved for `patience` epochs, the
best weights are restored and the package is frozen.
"""

from __future__ import annotations

import warnings

import numpy as np

from ..envs.datasets import Dataset
from ..envs.normalize import NormStats, fit_norm_stats
from ..nn.optim import OptimizerState, adam_step, clip_grad_norm
from ..seeding import derive_seed, rng_for
from .model import WorldModelConfig, WorldModelPackage
from .windows import WindowSet, build_windows


def r_squared(predictions: np.ndarray, targets: np.ndarray) -> float:
    """Coefficient of determination, per output dimension then averaged.

    Dimensions with constant targets are excluded with a warning; if all
    are constant the result is nan.
    """
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape:
        raise ValueError(f"shape mismatch: {predictions.shape} vs {targets.shape}")
    if predictions.ndim == 1:
        predictions = predictions[:, None]
        targets = targets[:, None]
    ss_res = np.sum((predictions - targets) ** 2, axis=0)
    ss_tot = np.sum((targets - targets.mean(axis=0)) ** 2, axis=0)
    usable = ss_tot > 0.0
    if not usable.all():
        warnings.warn(
            f"excluding {int((~usable).sum())} constant target dimension(s) from R^2",
            stacklevel=2,
        )
    if not usable.any():
        return float("nan")
    return float(np.mean(1.0 - ss_res[usable] / ss_tot[usable]))


def split_by_trajectory(dataset: Dataset, holdout_fraction: float, seed: int):
    """Whole-trajectory 90/10 split; both sides keep at least one trajectory."""
    ids = np.arange(len(dataset.trajectories))
    rng = rng_for(seed, "holdout-split")
    rng.shuffle(ids)
    n_holdout = max(1, int(round(holdout_fraction * len(ids))))
    if n_holdout >= len(ids):
        raise ValueError("dataset too small to hold out trajectories")
    holdout_ids = set(ids[:n_holdout].tolist())
    train = [t for i, t in enumerate(dataset.trajectories) if i not in holdout_ids]
    held = [t for i, t in enumerate(dataset.trajectories) if i in holdout_ids]
    train_ds = Dataset(spec=dataset.spec, tier=dataset.tier, seed=dataset.seed, trajectories=train)
    held_ds = Dataset(spec=dataset.spec, tier=dataset.tier, seed=dataset.seed, trajectories=held)
    return train_ds, held_ds


def _batch_loss_and_grads(
    pkg: WorldModelPackage,
    windows: WindowSet,
    idx: np.ndarray,
    reward_weight: float,
    teacher_forcing: bool,
    mask_seed: int | None,
) -> float:
    hist = windows.histories[idx]
    acts = windows.actions[idx]
    target_states = windows.target_states[idx]
    target_rewards = windows.target_rewards[idx]
    B = hist.shape[0]
    horizon = target_states.shape[1]

    pred_states, pred_rewards, caches = pkg.rollout(
        hist,
        acts,
        horizon,
        training=mask_seed is not None,
        teacher_states=target_states if teacher_forcing else None,
        mask_seed=mask_seed,
        want_cache=True,
    )
    ds = pred_states - target_states
    dr = pred_rewards - target_rewards
    state_loss = float(np.sum(np.mean(ds**2, axis=(0, 2))))
    reward_loss = float(np.sum(np.mean(dr**2, axis=0)))
    loss = state_loss + reward_weight * reward_loss

    d_states = 2.0 * ds / (B * pkg.state_dim)
    d_rewards = reward_weight * 2.0 * dr / B
    pkg.rollout_backward(caches, d_states, d_rewards)
    return loss


def evaluate_windows(pkg: WorldModelPackage, windows: WindowSet, reward_weight: float, batch_size: int = 512):
    """Auto-regressive validation loss and R^2 for states and rewards."""
    horizon = windows.target_states.shape[1]
    preds_s, preds_r = [], []
    for start in range(0, len(windows), batch_size):
        idx = np.arange(start, min(start + batch_size, len(windows)))
        ps, pr, _ = pkg.rollout(windows.histories[idx], windows.actions[idx], horizon)
        preds_s.append(ps)
        preds_r.append(pr)
    pred_states = np.concatenate(preds_s, axis=0)
    pred_rewards = np.concatenate(preds_r, axis=0)
    ds = pred_states - windows.target_states
    dr = pred_rewards - windows.target_rewards
    loss = float(np.sum(np.mean(ds**2, axis=(0, 2)))) + reward_weight * float(
        np.sum(np.mean(dr**2, axis=0))
    )
    s_dim = pred_states.shape[2]
    r2_state = r_squared(
        pred_states.reshape(-1, s_dim), windows.target_states.reshape(-1, s_dim)
    )
    r2_reward = r_squared(pred_rewards.reshape(-1), windows.target_rewards.reshape(-1))
    return loss, r2_state, r2_reward


def train_world_model(
    dataset: Dataset,
    config: WorldModelConfig,
    seed: int,
    stats: NormStats | None = None,
) -> WorldModelPackage:
    if stats is None:
        stats = fit_norm_stats(dataset.all_states(), dataset.all_rewards())

    train_ds, held_ds = split_by_trajectory(dataset, config.holdout_fraction, seed)
    train_windows = build_windows(train_ds, config.window_n, config.horizon_tau, stats)
    val_windows = build_windows(held_ds, config.window_n, config.horizon_tau, stats)

    pkg = WorldModelPackage(
        config,
        state_dim=dataset.spec.state_dim,
        action_dim=dataset.spec.action_dim,
        seed=derive_seed(seed, "world-model-init"),
        stats=stats,
    )
    params = pkg.parameters()
    opt_state = OptimizerState(params)

    best_loss = float("inf")
    best_values = None
    best_epoch = -1
    best_r2 = (float("nan"), float("nan"))
    epochs_since_improvement = 0
    history = []

    for epoch in range(config.max_epochs):
        teacher_forcing = epoch < config.forcing_epochs()
        order = np.arange(len(train_windows))
        rng_for(seed, "epoch-shuffle", epoch).shuffle(order)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, len(order), config.batch_size):
            idx = order[start : start + config.batch_size]
            for p in params:
                p.zero_grad()
            mask_seed = derive_seed(seed, "dropout", epoch, start)
            loss = _batch_loss_and_grads(
                pkg, train_windows, idx, config.reward_loss_weight, teacher_forcing, mask_seed
            )
            if not np.isfinite(loss):
                raise RuntimeError(
                    f"world-model training diverged (non-finite loss) at epoch {epoch}"
                )
            clip_grad_norm(params, config.grad_clip)
            adam_step(params, opt_state, config.learning_rate)
            epoch_loss += loss
            n_batches += 1

        val_loss, r2_state, r2_reward = evaluate_windows(
            pkg, val_windows, config.reward_loss_weight
        )
        if not np.isfinite(val_loss):
            raise RuntimeError(
                f"world-model validation diverged (non-finite loss) at epoch {epoch}"
            )
        history.append(
            {
                "epoch": epoch,
                "train_loss": epoch_loss / max(n_batches, 1),
                "val_loss": val_loss,
                "r2_state": r2_state,
                "r2_reward": r2_reward,
                "teacher_forcing": teacher_forcing,
            }
        )
        if val_loss < best_loss - 1e-12:
            best_loss = val_loss
            best_values = [p.values.copy() for p in params]
            best_epoch = epoch
            best_r2 = (r2_state, r2_reward)
            epochs_since_improvement = 0
        else:
            epochs_since_improvement += 1
            if epochs_since_improvement >= config.patience:
                break

    if best_values is not None:
        for p, v in zip(params, best_values):
            p.values[...] = v

    pkg.report = {
        "epochs_run": len(history),
        "best_epoch": best_epoch,
        "best_val_loss": best_loss,
        "r2_state": best_r2[0],
        "r2_reward": best_r2[1],
        "history": history,
        "train_windows": len(train_windows),
        "val_windows": len(val_windows),
    }
    pkg.freeze()
    return pkg

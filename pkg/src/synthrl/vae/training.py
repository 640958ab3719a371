"""VAE training with early stopping on a held-out split."""

from __future__ import annotations

import warnings

import numpy as np

from ..envs.datasets import Dataset
from ..envs.normalize import NormStats, norm_action
from ..nn.optim import OptimizerState, adam_step, clip_grad_norm
from ..seeding import derive_seed, rng_for
from .model import ManifoldScorer, VAEConfig, kl_terms, recon_terms


def state_action_pairs(dataset: Dataset, stats: NormStats) -> np.ndarray:
    """Normalized (state, action) rows for every transition."""
    states = stats.norm_state(dataset.all_states())
    actions = norm_action(
        dataset.all_actions(), dataset.spec.action_low, dataset.spec.action_high
    )
    return np.concatenate([states, actions], axis=1)


def sample_ood_pairs(
    pairs: np.ndarray, n: int, seed: int, margin: float = 0.5
) -> np.ndarray:
    """Uniform probes over the data bounding box expanded by ``margin``."""
    lo = pairs.min(axis=0)
    hi = pairs.max(axis=0)
    span = hi - lo
    rng = rng_for(seed, "ood-probe")
    return rng.uniform(lo - margin * span, hi + margin * span, size=(n, pairs.shape[1]))


def _mean_u(scorer: ManifoldScorer, pairs: np.ndarray, batch: int = 1024) -> float:
    total = 0.0
    for start in range(0, pairs.shape[0], batch):
        rows = pairs[start : start + batch]
        recon, mu, logvar = scorer.forward(rows)
        total += float(
            np.sum(recon_terms(recon, rows) + scorer.config.kl_weight * kl_terms(mu, logvar))
        )
    return total / pairs.shape[0]


def train_vae(pairs: np.ndarray, config: VAEConfig, seed: int, action_dim: int) -> ManifoldScorer:
    """Minimize the mean manifold loss over normalized (s, a) rows.

    A 10% validation split drives early stopping; the best weights are
    restored and the scorer frozen.
    """
    pairs = np.asarray(pairs, dtype=np.float64)
    if pairs.ndim != 2 or pairs.shape[0] == 0:
        raise ValueError("training pairs must be a non-empty 2-D array")
    if config.latent_dim is not None and config.latent_dim != 2 * action_dim:
        warnings.warn(
            f"latent_dim override {config.latent_dim} (default would be {2 * action_dim})",
            stacklevel=2,
        )

    n = pairs.shape[0]
    order = np.arange(n)
    rng_for(seed, "vae-split").shuffle(order)
    n_val = max(1, int(round(config.holdout_fraction * n)))
    val = pairs[order[:n_val]]
    train = pairs[order[n_val:]]
    if train.shape[0] == 0:
        raise ValueError("dataset too small for a validation split")

    scorer = ManifoldScorer(
        config,
        input_dim=pairs.shape[1],
        action_dim=action_dim,
        seed=derive_seed(seed, "vae-init"),
    )
    params = scorer.parameters()
    opt_state = OptimizerState(params)
    w = config.kl_weight

    best_loss = float("inf")
    best_values = None
    best_epoch = -1
    stale = 0
    history = []
    for epoch in range(config.epochs):
        idx = np.arange(train.shape[0])
        rng_for(seed, "vae-shuffle", epoch).shuffle(idx)
        noise_rng = rng_for(seed, "vae-noise", epoch)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, idx.size, config.batch_size):
            rows = train[idx[start : start + config.batch_size]]
            B = rows.shape[0]
            eps = noise_rng.standard_normal((B, scorer.latent_dim))
            for p in params:
                p.zero_grad()
            recon, mu, logvar, cache = scorer.forward(rows, eps=eps, want_cache=True)
            loss = float(
                np.mean(recon_terms(recon, rows)) + w * float(np.mean(kl_terms(mu, logvar)))
            )
            if not np.isfinite(loss):
                raise RuntimeError(f"VAE training diverged (non-finite loss) at epoch {epoch}")
            d_recon = 2.0 * (recon - rows) / (B * rows.shape[1])
            d_mu_kl = w * mu / B
            d_lv_kl = w * 0.5 * (np.exp(logvar) - 1.0) / B
            scorer.backward(cache, d_recon, d_mu_extra=d_mu_kl, d_logvar_extra=d_lv_kl)
            clip_grad_norm(params, config.grad_clip)
            adam_step(params, opt_state, config.learning_rate)
            epoch_loss += loss
            n_batches += 1

        val_u = _mean_u(scorer, val)
        if not np.isfinite(val_u):
            raise RuntimeError(f"VAE validation diverged at epoch {epoch}")
        history.append(
            {"epoch": epoch, "train_loss": epoch_loss / max(1, n_batches), "val_u": val_u}
        )
        if val_u < best_loss - 1e-12:
            best_loss = val_u
            best_values = [p.values.copy() for p in params]
            best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break

    if best_values is not None:
        for p, v in zip(params, best_values):
            p.values[...] = v
    scorer.report = {
        "epochs_run": len(history),
        "best_epoch": best_epoch,
        "best_val_u": best_loss,
        "history": history,
        "train_rows": int(train.shape[0]),
        "val_rows": int(val.shape[0]),
    }
    scorer.freeze()
    return scorer

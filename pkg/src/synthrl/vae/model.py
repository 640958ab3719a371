"""Variational autoencoder over (state, action) pairs.

The encoder compresses a normalized state-action vector into a diagonal
Gaussian over a latent of twice the action dimension; the decoder
reconstructs the input, with one symmetric skip connection from the
encoder's mid activation to the decoder's mid activation. The training
loss is the usual reconstruction-plus-KL bound; the same quantity,
evaluated deterministically, doubles as the manifold-distance score u
(higher = farther from the data manifold).
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from ..nn import Activation, Network, activation, affine
from ..nn.network import FrozenNetworkError
from ..seeding import derive_seed, rng_for

NET_NAMES = ("enc_trunk", "mu_head", "logvar_head", "dec_in", "dec_out")


@dataclass
class VAEConfig:
    hidden_width: int = 96  # paper-scale runs use 750
    latent_dim: int | None = None  # default: 2 * action_dim
    kl_weight: float = 1.0
    epochs: int = 40
    batch_size: int = 256
    learning_rate: float = 1e-3
    patience: int = 5
    grad_clip: float = 1.0
    holdout_fraction: float = 0.1

    def resolve_latent(self, action_dim: int) -> int:
        if self.latent_dim is None:
            return 2 * action_dim
        return self.latent_dim

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "VAEConfig":
        return VAEConfig(**d)


@dataclass
class ELBOScore:
    """Reconstruction error, closed-form KL, and their weighted sum u."""

    recon_loss: float
    kl_loss: float
    kl_weight: float = 1.0

    @property
    def u(self) -> float:
        return self.recon_loss + self.kl_weight * self.kl_loss


def kl_terms(mu: np.ndarray, logvar: np.ndarray) -> np.ndarray:
    """Per-sample KL(N(mu, e^logvar) || N(0, I)), summed over latent dims."""
    mu = np.atleast_2d(mu)
    logvar = np.atleast_2d(logvar)
    return 0.5 * np.sum(mu * mu + np.exp(logvar) - 1.0 - logvar, axis=1)


def recon_terms(reconstruction: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Per-sample mean squared reconstruction error."""
    reconstruction = np.atleast_2d(reconstruction)
    target = np.atleast_2d(target)
    return np.mean((reconstruction - target) ** 2, axis=1)


def elbo_loss(
    reconstruction: np.ndarray,
    target: np.ndarray,
    mu: np.ndarray,
    logvar: np.ndarray,
    kl_weight: float = 1.0,
) -> ELBOScore:
    if np.shape(reconstruction) != np.shape(target):
        raise ValueError("reconstruction and target shapes differ")
    recon = float(np.mean(recon_terms(reconstruction, target)))
    kl = float(np.mean(kl_terms(mu, logvar)))
    return ELBOScore(recon_loss=recon, kl_loss=kl, kl_weight=kl_weight)


def build_vae_networks(input_dim: int, hidden: int, latent: int, seed: int) -> dict[str, Network]:
    mid = max(hidden // 2, latent)
    return {
        "enc_trunk": Network(
            [
                affine(input_dim, hidden),
                activation(hidden, Activation.RELU),
                affine(hidden, mid),
                activation(mid, Activation.RELU),
            ],
            derive_seed(seed, "enc_trunk"),
        ),
        "mu_head": Network([affine(mid, latent)], derive_seed(seed, "mu_head")),
        "logvar_head": Network([affine(mid, latent)], derive_seed(seed, "logvar_head")),
        "dec_in": Network(
            [affine(latent, mid), activation(mid, Activation.RELU)], derive_seed(seed, "dec_in")
        ),
        "dec_out": Network(
            [
                affine(mid, hidden),
                activation(hidden, Activation.RELU),
                affine(hidden, input_dim),
            ],
            derive_seed(seed, "dec_out"),
        ),
    }


class ManifoldScorer:
    """The trained VAE exposed as a deterministic manifold-loss oracle."""

    def __init__(
        self,
        config: VAEConfig,
        input_dim: int,
        action_dim: int,
        seed: int,
        nets: dict[str, Network] | None = None,
    ):
        self.config = config
        self.input_dim = input_dim
        self.action_dim = action_dim
        self.latent_dim = config.resolve_latent(action_dim)
        self.seed = seed
        self.nets = (
            nets
            if nets is not None
            else build_vae_networks(input_dim, config.hidden_width, self.latent_dim, seed)
        )
        self.frozen = False
        self.report: dict = {}

    def networks(self) -> list[Network]:
        return [self.nets[n] for n in NET_NAMES]

    def parameters(self):
        return [p for net in self.networks() for p in net.parameters()]

    def checksums(self) -> dict[str, str]:
        return {n: self.nets[n].checksum() for n in NET_NAMES}

    def freeze(self) -> "ManifoldScorer":
        for net in self.networks():
            net.freeze()
        self.frozen = True
        return self

    # -- forward / backward -------------------------------------------------

    def forward(self, x: np.ndarray, eps: np.ndarray | None = None, want_cache: bool = False):
        """Encode, reparameterize (eps defaults to zero), decode with skip.

        Returns (reconstruction, mu, logvar) plus a cache when requested.
        """
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        m_e, _, c_enc = self.nets["enc_trunk"].forward(x, want_cache=True)
        mu, _, c_mu = self.nets["mu_head"].forward(m_e, want_cache=True)
        logvar, _, c_lv = self.nets["logvar_head"].forward(m_e, want_cache=True)
        if not np.isfinite(logvar).all():
            raise FloatingPointError("non-finite logvar in VAE encoder")
        sigma = np.exp(0.5 * logvar)
        if eps is None:
            eps = np.zeros_like(mu)
        z = mu + sigma * eps
        m_d, _, c_dec_in = self.nets["dec_in"].forward(z, want_cache=True)
        m_s = m_d + m_e  # symmetric skip connection
        recon, _, c_dec_out = self.nets["dec_out"].forward(m_s, want_cache=True)
        if not want_cache:
            return recon, mu, logvar
        cache = {
            "enc": c_enc,
            "mu": c_mu,
            "lv": c_lv,
            "dec_in": c_dec_in,
            "dec_out": c_dec_out,
            "sigma": sigma,
            "eps": eps,
        }
        return recon, mu, logvar, cache

    def backward(self, cache, d_recon, d_mu_extra=None, d_logvar_extra=None):
        """Accumulate gradients for one cached forward pass."""
        d_m_s, _ = self.nets["dec_out"].backward(cache["dec_out"], d_recon)
        d_z, _ = self.nets["dec_in"].backward(cache["dec_in"], d_m_s)
        d_m_e = d_m_s.copy()
        d_mu = d_z.copy()
        d_logvar = d_z * cache["eps"] * 0.5 * cache["sigma"]
        if d_mu_extra is not None:
            d_mu += d_mu_extra
        if d_logvar_extra is not None:
            d_logvar += d_logvar_extra
        g_mu, _ = self.nets["mu_head"].backward(cache["mu"], d_mu)
        g_lv, _ = self.nets["logvar_head"].backward(cache["lv"], d_logvar)
        d_m_e += g_mu + g_lv
        dx, _ = self.nets["enc_trunk"].backward(cache["enc"], d_m_e)
        return dx

    # -- public scoring API -----------------------------------------------

    def vae_forward(self, s: np.ndarray, a: np.ndarray, seed: int | None = None):
        """(reconstruction, mu, logvar) for one normalized pair; seeded noise."""
        x = np.concatenate([np.asarray(s, dtype=np.float64), np.asarray(a, dtype=np.float64)])
        if x.shape != (self.input_dim,):
            raise ValueError(f"expected concatenated pair of width {self.input_dim}")
        eps = None
        if seed is not None:
            eps = rng_for(seed).standard_normal((1, self.latent_dim))
        recon, mu, logvar = self.forward(x[None], eps=eps)
        return recon[0], mu[0], logvar[0]

    def score_batch(self, pairs: np.ndarray) -> np.ndarray:
        """Deterministic (zero-noise) manifold-loss u per row."""
        if not self.frozen:
            raise FrozenNetworkError("scorer must be trained and frozen before scoring")
        pairs = np.atleast_2d(np.asarray(pairs, dtype=np.float64))
        recon, mu, logvar = self.forward(pairs)
        return recon_terms(recon, pairs) + self.config.kl_weight * kl_terms(mu, logvar)

    def score(self, s: np.ndarray, a: np.ndarray) -> float:
        x = np.concatenate([np.asarray(s, dtype=np.float64), np.asarray(a, dtype=np.float64)])
        return float(self.score_batch(x[None])[0])

    # -- persistence -------------------------------------------------------

    def meta(self) -> dict:
        return {
            "kind": "vae-manifold",
            "config": self.config.to_dict(),
            "input_dim": self.input_dim,
            "action_dim": self.action_dim,
            "seed": self.seed,
            "frozen": self.frozen,
            "report": self.report,
        }

    @staticmethod
    def from_checkpoint(nets: dict[str, Network], meta: dict) -> "ManifoldScorer":
        scorer = ManifoldScorer(
            VAEConfig.from_dict(meta["config"]),
            input_dim=int(meta["input_dim"]),
            action_dim=int(meta["action_dim"]),
            seed=int(meta["seed"]),
            nets=nets,
        )
        scorer.report = meta.get("report", {})
        if meta.get("frozen"):
            scorer.freeze()
        return scorer

from .model import (
    ELBOScore,
    ManifoldScorer,
    VAEConfig,
    build_vae_networks,
    elbo_loss,
    kl_terms,
    recon_terms,
)
from .training import sample_ood_pairs, state_action_pairs, train_vae

__all__ = [
    "ELBOScore",
    "ManifoldScorer",
    "VAEConfig",
    "build_vae_networks",
    "elbo_loss",
    "kl_terms",
    "recon_terms",
    "sample_ood_pairs",
    "state_action_pairs",
    "train_vae",
]

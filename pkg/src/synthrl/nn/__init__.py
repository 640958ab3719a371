from .layers import (
    Activation,
    DropoutMask,
    LayerKind,
    LayerSpec,
    RecurrentState,
    activation,
    affine,
    dropout,
    gated,
    long_memory,
)
from .network import (
    DimensionMismatch,
    FrozenNetworkError,
    Network,
    make_dropout_masks,
    mask_seed_for,
    mc_forward,
)
from .gradcheck import grad_check
from .optim import Adam, OptimizerState, adam_step, clip_grad_norm, global_grad_norm
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint

__all__ = [
    "Activation",
    "Adam",
    "CheckpointError",
    "DimensionMismatch",
    "DropoutMask",
    "FrozenNetworkError",
    "LayerKind",
    "LayerSpec",
    "Network",
    "OptimizerState",
    "RecurrentState",
    "activation",
    "adam_step",
    "affine",
    "clip_grad_norm",
    "dropout",
    "gated",
    "global_grad_norm",
    "grad_check",
    "load_checkpoint",
    "long_memory",
    "make_dropout_masks",
    "mask_seed_for",
    "mc_forward",
    "save_checkpoint",
]

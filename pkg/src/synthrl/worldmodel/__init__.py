from .model import WorldModelConfig, WorldModelPackage, build_networks
from .training import evaluate_windows, r_squared, split_by_trajectory, train_world_model
from .windows import WindowSet, build_windows, windows_from_trajectory

__all__ = [
    "WindowSet",
    "WorldModelConfig",
    "WorldModelPackage",
    "build_networks",
    "build_windows",
    "evaluate_windows",
    "r_squared",
    "split_by_trajectory",
    "train_world_model",
    "windows_from_trajectory",
]

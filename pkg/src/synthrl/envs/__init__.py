from .core import EnvSpec, Environment, Trajectory, Transition
from .datasets import Dataset, DatasetManifest, generate_dataset, load_dataset, make_env, save_dataset
from .normalize import NormStats, denorm_action, fit_norm_stats, norm_action
from .pendulum import Pendulum, pendulum_step
from .policies import TIERS, BehaviorPolicy, scripted_expert
from .reacher import Reacher, reacher_step
from .scoring import measure_references, normalized_score, rollout_return

__all__ = [
    "BehaviorPolicy",
    "Dataset",
    "DatasetManifest",
    "EnvSpec",
    "Environment",
    "NormStats",
    "Pendulum",
    "Reacher",
    "TIERS",
    "Trajectory",
    "Transition",
    "denorm_action",
    "fit_norm_stats",
    "generate_dataset",
    "load_dataset",
    "make_env",
    "measure_references",
    "norm_action",
    "normalized_score",
    "pendulum_step",
    "reacher_step",
    "rollout_return",
    "save_dataset",
    "scripted_expert",
]

"""synthrl: model-based offline RL with uncertainty-filtered synthetic data."""

__version__ = "0.1.0"

"""Event-driven warehouse task allocation: simulator, baselines and a PPO-trained
attention policy."""

from .env import Observation, RewardScheme, WarehouseEnv, run_episode
from .layout import Cell, GaussianRegion, GridLayout
from .network import PolicyParams

__all__ = [
    "Cell",
    "GaussianRegion",
    "GridLayout",
    "Observation",
    "PolicyParams",
    "RewardScheme",
    "WarehouseEnv",
    "run_episode",
]

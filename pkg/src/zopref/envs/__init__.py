from .gridworld import (
    ACTIONS,
    ACTION_NAMES,
    GridWorld,
    GridWorldConfig,
    GridWorldMarkov,
    gridworld_chi,
    gridworld_reward,
    target_distance,
)
from .predator_prey import (
    PredatorPrey,
    PredatorPreyConfig,
    nearest_prey_distance,
    predator_prey_reward,
)

__all__ = [
    "ACTIONS",
    "ACTION_NAMES",
    "GridWorld",
    "GridWorldConfig",
    "GridWorldMarkov",
    "gridworld_chi",
    "gridworld_reward",
    "target_distance",
    "PredatorPrey",
    "PredatorPreyConfig",
    "nearest_prey_distance",
    "predator_prey_reward",
]

"""Networked multi-agent policy learning from simulated preference feedback.

The library has three layers: factored MDP environments rolled out under
per-agent tabular softmax policies; a zeroth-order learner that updates
from trimmed evaluator votes over trajectory pairs; and exact small-MDP
oracles used to validate the learner's gradient targets and error bounds.
"""

from .config import ConfigError, PRESETS, RunConfig, build, load_config, preset
from .envs import GridWorld, GridWorldConfig, PredatorPrey, PredatorPreyConfig
from .graph import AgentGraph, chain, complete, star
from .learner import LearnerConfig, TrainResult, baseline_gradient_ascent, train
from .mdp import FactoredMdp, TableMdp, enumerate_joint, sample_initial, step
from .policy import TabularPolicy
from .preference import Link, bradley_terry, linear, make_link

__version__ = "0.1.0"

__all__ = [
    "AgentGraph",
    "chain",
    "star",
    "complete",
    "FactoredMdp",
    "TableMdp",
    "GridWorld",
    "GridWorldConfig",
    "PredatorPrey",
    "PredatorPreyConfig",
    "enumerate_joint",
    "sample_initial",
    "step",
    "TabularPolicy",
    "Link",
    "bradley_terry",
    "linear",
    "make_link",
    "LearnerConfig",
    "TrainResult",
    "train",
    "baseline_gradient_ascent",
    "ConfigError",
    "RunConfig",
    "PRESETS",
    "preset",
    "load_config",
    "build",
    "__version__",
]

"""Run configuration: YAML schema, validation, presets, and environment build.

A run file has four sections plus a seed list:

    environment:   kind (gridworld | predator_prey) + that environment's fields
    graph:         kind (chain | star | complete | edges) [+ edges pairs]
    learner:       algorithm knobs (iterations, trials, evaluators, ...)
    output:        directory, checkpoint_interval, metric_cadence
    seeds:         [0, 1, 2, 3, 4]

Unknown keys anywhere are rejected with the dotted path of the offender,
so config typos fail before any compute starts. Presets are plain config
dictionaries and go through the identical validation path as files.
"""

from __future__ import annotations

import copy
import dataclasses
from dataclasses import dataclass, field

import yaml

from .envs.gridworld import GridWorld, GridWorldConfig
from .envs.predator_prey import PredatorPrey, PredatorPreyConfig
from .graph import AgentGraph, chain, complete, star
from .learner import LearnerConfig


class ConfigError(ValueError):
    """Invalid or unknown configuration content; message carries the path."""


_ENV_KINDS = {
    "gridworld": (GridWorld, GridWorldConfig),
    "predator_prey": (PredatorPrey, PredatorPreyConfig),
}
_GRAPH_KINDS = ("chain", "star", "complete", "edges")

# algorithm knobs that may appear under learner:. eval_cadence is owned by
# output.metric_cadence so the same knob cannot be set in two places.
_LEARNER_KEYS = (
    "iterations", "trials", "evaluators", "horizon", "kappa", "mu", "alpha",
    "link", "link_scale", "oracle_feedback", "common_random_numbers",
    "grad_clip", "eval_rollouts", "eval_tail", "eval_cap",
)


@dataclass
class OutputConfig:
    directory: str = "runs/out"
    checkpoint_interval: int = 0  # 0 writes only the final checkpoint
    metric_cadence: int = 1

    def __post_init__(self):
        if self.checkpoint_interval < 0:
            raise ConfigError("output.checkpoint_interval must be >= 0")
        if self.metric_cadence < 1:
            raise ConfigError("output.metric_cadence must be >= 1")


@dataclass
class RunConfig:
    environment: dict
    graph: dict = field(default_factory=lambda: {"kind": "chain"})
    learner: dict = field(default_factory=dict)
    output: OutputConfig = field(default_factory=OutputConfig)
    seeds: list[int] = field(default_factory=lambda: [0])


def _require_mapping(node, path: str) -> dict:
    if not isinstance(node, dict):
        raise ConfigError(f"{path} must be a mapping, got {type(node).__name__}")
    return node


def _check_keys(node: dict, allowed, path: str) -> None:
    for key in node:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}.{key}")


def _as_pairs(value, path: str):
    try:
        return tuple((int(a), int(b)) for a, b in value)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{path} must be a list of [x, y] pairs") from err


def validate(raw: dict) -> RunConfig:
    """Validate a raw config mapping into a RunConfig; raises ConfigError."""
    raw = _require_mapping(raw, "config")
    _check_keys(raw, ("environment", "graph", "learner", "output", "seeds"),
                "config")

    env = _require_mapping(raw.get("environment", {}), "environment")
    kind = env.get("kind")
    if kind not in _ENV_KINDS:
        raise ConfigError(
            f"environment.kind must be one of {sorted(_ENV_KINDS)}, got {kind!r}")
    cfg_cls = _ENV_KINDS[kind][1]
    env_fields = {f.name for f in dataclasses.fields(cfg_cls)}
    _check_keys(env, env_fields | {"kind"}, "environment")

    graph = _require_mapping(raw.get("graph", {"kind": "chain"}), "graph")
    _check_keys(graph, ("kind", "edges"), "graph")
    gkind = graph.get("kind", "chain")
    if gkind not in _GRAPH_KINDS:
        raise ConfigError(
            f"graph.kind must be one of {list(_GRAPH_KINDS)}, got {gkind!r}")
    if gkind == "edges" and "edges" not in graph:
        raise ConfigError("graph.kind 'edges' requires graph.edges")
    if gkind != "edges" and "edges" in graph:
        raise ConfigError(f"graph.edges is only valid with graph.kind 'edges'")

    learner = _require_mapping(raw.get("learner", {}), "learner")
    _check_keys(learner, _LEARNER_KEYS, "learner")

    out = _require_mapping(raw.get("output", {}), "output")
    _check_keys(out, ("directory", "checkpoint_interval", "metric_cadence"),
                "output")
    output = OutputConfig(**out)

    seeds = raw.get("seeds", [0])
    if (not isinstance(seeds, list) or not seeds
            or not all(isinstance(s, int) and not isinstance(s, bool) for s in seeds)):
        raise ConfigError("seeds must be a non-empty list of integers")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("seeds must be distinct")

    return RunConfig(environment=dict(env), graph=dict(graph),
                     learner=dict(learner), output=output, seeds=list(seeds))


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except yaml.YAMLError as err:
        raise ConfigError(f"could not parse {path}: {err}") from err
    if raw is None:
        raise ConfigError(f"{path} is empty")
    return validate(raw)


def build(cfg: RunConfig):
    """Instantiate (mdp, learner_config) from a validated RunConfig."""
    kind = cfg.environment["kind"]
    env_cls, env_cfg_cls = _ENV_KINDS[kind]
    kwargs = {k: v for k, v in cfg.environment.items() if k != "kind"}
    for key in ("target",):
        if key in kwargs:
            kwargs[key] = tuple(int(c) for c in kwargs[key])
    for key in ("starts", "prey", "obstacles"):
        if key in kwargs:
            kwargs[key] = _as_pairs(kwargs[key], f"environment.{key}")
    try:
        env_cfg = env_cfg_cls(**kwargs)
    except ValueError as err:
        raise ConfigError(f"environment: {err}") from err

    n_agents = len(env_cfg.starts)
    gkind = cfg.graph.get("kind", "chain")
    if gkind == "chain":
        graph = chain(n_agents)
    elif gkind == "star":
        graph = star(n_agents)
    elif gkind == "complete":
        graph = complete(n_agents)
    else:
        edges = _as_pairs(cfg.graph.get("edges", []), "graph.edges")
        try:
            graph = AgentGraph(n_agents, edges)
        except ValueError as err:
            raise ConfigError(f"graph: {err}") from err

    try:
        mdp = env_cls(env_cfg, graph)
        learner = LearnerConfig(eval_cadence=cfg.output.metric_cadence,
                                **cfg.learner)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"learner: {err}") from err
    return mdp, learner


# -- shipped presets -----------------------------------------------------------

_GRIDWORLD_ENV = {
    "kind": "gridworld",
    "width": 5,
    "height": 5,
    "target": [4, 0],
    "starts": [[2, 1], [3, 1], [2, 2], [1, 0]],
    "chi_max": 0.1,
    "chi_min": 0.02,
    "gamma": 0.9,
}

_PP_ENV = {
    "kind": "predator_prey",
    "width": 8,
    "height": 8,
    "r_time": 1.0,
    "r_capture": 1.0,
    "alpha_p": 0.5,
    "gamma": 0.9,
}

PRESETS: dict[str, dict] = {
    # the published four-agent chain setup at full sampling scale
    "gridworld_paper": {
        "environment": dict(_GRIDWORLD_ENV),
        "graph": {"kind": "chain"},
        "learner": {"iterations": 200, "trials": 500, "evaluators": 1000,
                    "horizon": 20, "kappa": 1, "mu": 0.1, "alpha": 0.1},
        "output": {"directory": "runs/gridworld_paper"},
        "seeds": [0, 1, 2, 3, 4],
    },
    # collision-averse variant: same task plus a shared-cell penalty
    "gridworld_safety": {
        "environment": dict(_GRIDWORLD_ENV, collision_penalty=1.0),
        "graph": {"kind": "chain"},
        "learner": {"iterations": 200, "trials": 500, "evaluators": 1000,
                    "horizon": 20, "kappa": 1, "mu": 0.1, "alpha": 0.1},
        "output": {"directory": "runs/gridworld_safety"},
        "seeds": [0, 1, 2, 3, 4],
    },
    # scaled-down sampling for workstation runs and the acceptance harness
    "gridworld_desk": {
        "environment": dict(_GRIDWORLD_ENV),
        "graph": {"kind": "chain"},
        "learner": {"iterations": 200, "trials": 100, "evaluators": 200,
                    "horizon": 10, "kappa": 1, "mu": 0.1, "alpha": 0.1},
        "output": {"directory": "runs/gridworld_desk"},
        "seeds": [0, 1, 2, 3, 4],
    },
    # twenty predators on a chain herding ten static prey
    "predator_prey_paper": {
        "environment": dict(_PP_ENV),
        "graph": {"kind": "chain"},
        "learner": {"iterations": 200, "trials": 100, "evaluators": 200,
                    "horizon": 50, "kappa": 1, "mu": 0.1, "alpha": 0.1},
        "output": {"directory": "runs/predator_prey_paper"},
        "seeds": [0, 1, 2, 3, 4],
    },
    # the same herd at a length that finishes over a coffee
    "predator_prey_desk": {
        "environment": dict(_PP_ENV),
        "graph": {"kind": "chain"},
        "learner": {"iterations": 50, "trials": 100, "evaluators": 200,
                    "horizon": 50, "kappa": 1, "mu": 0.1, "alpha": 0.1},
        "output": {"directory": "runs/predator_prey_desk"},
        "seeds": [0, 1, 2, 3, 4],
    },
}


def preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return validate(copy.deepcopy(PRESETS[name]))

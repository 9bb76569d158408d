"""Predators on an obstacle grid herd toward static prey.

Movement is deterministic: the chosen step, clamped to the grid, and
cancelled when it would enter an obstacle. Each step costs r_time; agents
standing on a still-remaining prey split r_capture evenly; a shaping term
pays alpha_p times the decrease in Manhattan distance to the nearest
remaining prey. Captured prey disappear for the rest of the episode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..graph import AgentGraph
from ..mdp import FactoredMdp
from .gridworld import ACTIONS

_DEFAULT_STARTS = (
    (4, 4), (5, 7), (4, 3), (1, 5), (4, 4), (5, 3), (6, 4), (4, 0), (7, 3), (5, 2),
    (0, 5), (1, 0), (5, 2), (1, 4), (1, 0), (2, 1), (5, 0), (4, 4), (3, 1), (6, 0),
)
_DEFAULT_PREY = (
    (3, 2), (1, 3), (7, 0), (3, 0), (4, 5), (2, 0), (7, 5), (4, 2), (3, 4), (3, 5),
)
_DEFAULT_OBSTACLES = (
    (0, 1), (5, 4), (6, 6), (7, 6), (6, 3), (7, 4), (3, 6), (2, 5), (2, 4), (6, 5),
)


@dataclass(frozen=True)
class PredatorPreyConfig:
    width: int = 8
    height: int = 8
    starts: tuple[tuple[int, int], ...] = _DEFAULT_STARTS
    prey: tuple[tuple[int, int], ...] = _DEFAULT_PREY
    obstacles: tuple[tuple[int, int], ...] = _DEFAULT_OBSTACLES
    r_time: float = 1.0
    r_capture: float = 1.0
    alpha_p: float = 0.5
    gamma: float = 0.9

    def __post_init__(self):
        object.__setattr__(self, "starts", tuple(tuple(c) for c in self.starts))
        object.__setattr__(self, "prey", tuple(tuple(c) for c in self.prey))
        object.__setattr__(self, "obstacles", tuple(tuple(c) for c in self.obstacles))
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be positive")
        for cell in (*self.starts, *self.prey, *self.obstacles):
            if not (0 <= cell[0] < self.width and 0 <= cell[1] < self.height):
                raise ValueError(f"cell {cell} outside {self.width}x{self.height} grid")
        if not self.starts or not self.prey:
            raise ValueError("need at least one agent and one prey")
        obstacles = set(self.obstacles)
        if len(set(self.prey)) != len(self.prey):
            raise ValueError("prey cells must be distinct")
        if obstacles & set(self.prey):
            raise ValueError("prey cannot sit on obstacles")
        if obstacles & set(self.starts):
            raise ValueError("agents cannot start on obstacles")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.r_time < 0 or self.r_capture < 0 or self.alpha_p < 0:
            raise ValueError("reward coefficients must be >= 0")


def _manhattan(a, b) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def nearest_prey_distance(cell, remaining_prey) -> int:
    return min(_manhattan(cell, p) for p in remaining_prey)


def predator_prey_reward(config: PredatorPreyConfig, agent: int, prev_cells, cells,
                         remaining_prey, capture_counts) -> float:
    """Reward for one agent at the current step.

    remaining_prey holds the prey cells still up when the step began (prey
    captured this very step are therefore included and pay out). Both
    shaping distances are measured against that same set; with no prey
    left, shaping and capture terms vanish. prev_cells is None on the
    first step, which zeroes the shaping term.
    """
    r = -config.r_time
    if not remaining_prey:
        return r
    mine = tuple(cells[agent])
    cnt = capture_counts.get(mine)
    if cnt:
        r += config.r_capture / cnt
    if prev_cells is not None:
        d_prev = nearest_prey_distance(tuple(prev_cells[agent]), remaining_prey)
        d_now = nearest_prey_distance(mine, remaining_prey)
        r += config.alpha_p * (d_prev - d_now)
    return r


class PredatorPrey(FactoredMdp):
    """Factored MDP over cell indices; transitions are point masses."""

    deterministic = True

    def __init__(self, config: PredatorPreyConfig, graph: AgentGraph):
        if graph.n_agents != len(config.starts):
            raise ValueError(
                f"graph has {graph.n_agents} agents but config lists {len(config.starts)} starts"
            )
        self.config = config
        self.graph = graph
        self.gamma = config.gamma
        n_cells = config.width * config.height
        self.n_cells = n_cells
        self.state_sizes = [n_cells] * graph.n_agents
        self.action_sizes = [len(ACTIONS)] * graph.n_agents
        self.reward_bound = (
            config.r_time + config.r_capture
            + config.alpha_p * (config.width - 1 + config.height - 1)
        )
        self.coords = tuple((c // config.height, c % config.height) for c in range(n_cells))
        self.obstacle_cells = frozenset(self.cell_index(c) for c in config.obstacles)
        self.prey_cells = tuple(self.cell_index(c) for c in config.prey)
        self._start_state = tuple(self.cell_index(c) for c in config.starts)
        self._move: dict[tuple[int, int], int] = {}

    def cell_index(self, cell) -> int:
        x, y = cell
        return x * self.config.height + y

    def _next_cell(self, cell: int, action: int) -> int:
        key = (cell, action)
        nxt = self._move.get(key)
        if nxt is None:
            cfg = self.config
            x, y = self.coords[cell]
            ax, ay = ACTIONS[action]
            px = min(max(x + ax, 0), cfg.width - 1)
            py = min(max(y + ay, 0), cfg.height - 1)
            nxt = px * cfg.height + py
            if nxt in self.obstacle_cells:
                nxt = cell  # blocked moves cancel
            self._move[key] = nxt
        return nxt

    def transition(self, i, nbhd_states, action):
        self_pos = self.graph.khop(i, 1).index(i)
        return (self._next_cell(nbhd_states[self_pos], action),), (1.0,)

    def initial_states(self):
        return [self._start_state], [1.0]

    def fresh_book(self):
        return {"remaining": list(range(len(self.prey_cells))), "prev_cells": None}

    def rewards(self, state, action, book):
        remaining = book["remaining"]
        remaining_prey = [self.config.prey[p] for p in remaining]
        cells = [self.coords[c] for c in state]
        prev = book["prev_cells"]
        prev_cells = None if prev is None else [self.coords[c] for c in prev]

        occupied = {}
        for c in cells:
            occupied[c] = occupied.get(c, 0) + 1
        capture_counts = {p: occupied[p] for p in remaining_prey if p in occupied}

        out = np.empty(len(state))
        for i in range(len(state)):
            out[i] = predator_prey_reward(
                self.config, i, prev_cells, cells, remaining_prey, capture_counts
            )

        if capture_counts:
            captured = {p for p in remaining_prey if p in capture_counts}
            book["remaining"] = [p for p in remaining if self.config.prey[p] not in captured]
        book["prev_cells"] = tuple(state)
        return out

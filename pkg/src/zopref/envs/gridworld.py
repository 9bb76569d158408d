"""Cooperative navigation on a grid with neighbor-dependent action noise.

Each agent walks a width x height grid toward a shared target cell. Moves
are the chosen action plus slip noise whose strength interpolates between
chi_max (no neighbors at the target) and chi_min (all neighbors there), so
agents that have arrived calm the dynamics of those still travelling. The
first arrival pays a bonus, sitting on the target afterwards is free, and
every other step costs 1 plus the distance to the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..graph import AgentGraph
from ..mdp import FactoredMdp

# Up, Down, Left, Right, Stay
ACTIONS: tuple[tuple[int, int], ...] = ((0, 1), (0, -1), (-1, 0), (1, 0), (0, 0))
ACTION_NAMES = ("up", "down", "left", "right", "stay")

# slip directions, each taken with probability chi/4
_NOISE = ((1, 0), (-1, 0), (0, 1), (0, -1))


@dataclass(frozen=True)
class GridWorldConfig:
    width: int = 5
    height: int = 5
    target: tuple[int, int] = (4, 0)
    starts: tuple[tuple[int, int], ...] = ((2, 1), (3, 1), (2, 2), (1, 0))
    chi_max: float = 0.1
    chi_min: float = 0.02
    collision_penalty: float = 0.0
    gamma: float = 0.9
    distance_norm: str = "euclidean"  # or "manhattan"

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be positive")
        for cell in (self.target, *self.starts):
            if not (0 <= cell[0] < self.width and 0 <= cell[1] < self.height):
                raise ValueError(f"cell {cell} outside {self.width}x{self.height} grid")
        if not self.starts:
            raise ValueError("need at least one agent start")
        if not 0.0 <= self.chi_min <= self.chi_max <= 1.0:
            raise ValueError(f"need 0 <= chi_min <= chi_max <= 1, got {self.chi_min}, {self.chi_max}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.collision_penalty < 0:
            raise ValueError("collision penalty must be >= 0")
        if self.distance_norm not in ("euclidean", "manhattan"):
            raise ValueError(f"unknown distance norm {self.distance_norm!r}")
        object.__setattr__(self, "starts", tuple(tuple(s) for s in self.starts))
        object.__setattr__(self, "target", tuple(self.target))


def target_distance(config: GridWorldConfig, cell: tuple[int, int]) -> float:
    dx = cell[0] - config.target[0]
    dy = cell[1] - config.target[1]
    if config.distance_norm == "manhattan":
        return float(abs(dx) + abs(dy))
    return math.hypot(dx, dy)


def gridworld_chi(config: GridWorldConfig, neighbor_cells) -> float:
    """Slip probability given the cells of an agent's graph neighbors.

    Interpolates from chi_max (none at the target) down to chi_min (all at
    the target). An isolated agent has no calming neighbors and keeps
    chi_max.
    """
    n = len(neighbor_cells)
    if n == 0:
        return config.chi_max
    at_goal = sum(1 for c in neighbor_cells if tuple(c) == config.target)
    return config.chi_max - (config.chi_max - config.chi_min) * at_goal / n


def gridworld_reward(config: GridWorldConfig, cell, cells, first_visit_done: bool,
                     just_arrived: bool) -> float:
    """Per-agent reward at the current joint position.

    just_arrived marks the first step the agent stands on the target (the
    bonus is paid exactly once); first_visit_done means the bonus was
    already paid on an earlier step.
    """
    cell = tuple(cell)
    if just_arrived:
        if cell != config.target:
            raise ValueError("just_arrived requires the agent to be at the target")
        return 10.0
    if cell == config.target and first_visit_done:
        return 0.0
    r = -1.0 - target_distance(config, cell)
    if config.collision_penalty > 0.0:
        # cells includes the agent itself, so a shared cell shows up as count > 1;
        # the target is exempt (handled by the returns above)
        shared = sum(1 for other in cells if tuple(other) == cell)
        if shared > 1:
            r -= config.collision_penalty
    return r


class GridWorld(FactoredMdp):
    """Factored MDP over cell indices (cell = x * height + y)."""

    def __init__(self, config: GridWorldConfig, graph: AgentGraph):
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
        # loose but simple bound: |r| <= 1 + diag + penalty, bonus 10
        self.reward_bound = max(
            10.0, 1.0 + math.hypot(config.width, config.height) + config.collision_penalty
        )
        self.target_cell = self.cell_index(config.target)
        self.coords = tuple((c // config.height, c % config.height) for c in range(n_cells))
        self._start_state = tuple(self.cell_index(s) for s in config.starts)
        # where each agent sits inside its own sorted closed neighborhood
        self._self_pos = [graph.khop(i, 1).index(i) for i in range(graph.n_agents)]
        self._dist_cache: dict[tuple[int, int, int], tuple] = {}

    def cell_index(self, cell) -> int:
        x, y = cell
        return x * self.config.height + y

    # -- dynamics ------------------------------------------------------------

    def _chi(self, at_goal: int, n_neighbors: int) -> float:
        cfg = self.config
        if n_neighbors == 0:
            return cfg.chi_max
        return cfg.chi_max - (cfg.chi_max - cfg.chi_min) * at_goal / n_neighbors

    def _move_dist(self, cell: int, action: int, at_goal: int, n_neighbors: int):
        """Next-cell distribution; clamped outcomes merge their mass."""
        cfg = self.config
        if cell == self.target_cell:
            return ((cell,), (1.0,))
        chi = self._chi(at_goal, n_neighbors)
        x, y = self.coords[cell]
        ax, ay = ACTIONS[action]
        bx, by = x + ax, y + ay
        acc: dict[int, float] = {}

        def put(px, py, p):
            if p <= 0.0:
                return
            px = min(max(px, 0), cfg.width - 1)
            py = min(max(py, 0), cfg.height - 1)
            c = px * cfg.height + py
            acc[c] = acc.get(c, 0.0) + p

        put(bx, by, 1.0 - chi)
        for nx, ny in _NOISE:
            put(bx + nx, by + ny, chi / 4.0)
        return tuple(acc.keys()), tuple(acc.values())

    def transition(self, i, nbhd_states, action):
        self_pos = self._self_pos[i]
        own = nbhd_states[self_pos]
        at_goal = sum(
            1 for k, c in enumerate(nbhd_states) if k != self_pos and c == self.target_cell
        )
        return self._move_dist(own, action, at_goal, len(nbhd_states) - 1)

    def transition_cdf(self, i, nbhd_states, action):
        # compact key: dynamics depend only on own cell, action, at-goal count
        self_pos = self._self_pos[i]
        own = nbhd_states[self_pos]
        at_goal = sum(
            1 for k, c in enumerate(nbhd_states) if k != self_pos and c == self.target_cell
        )
        n_neighbors = len(nbhd_states) - 1
        key = (own, action, at_goal, n_neighbors)
        hit = self._dist_cache.get(key)
        if hit is None:
            outcomes, probs = self._move_dist(own, action, at_goal, n_neighbors)
            cum = []
            acc = 0.0
            for p in probs:
                acc += p
                cum.append(acc)
            cum[-1] = 1.0
            hit = self._dist_cache[key] = (outcomes, tuple(cum))
        return hit

    def initial_states(self):
        return [self._start_state], [1.0]

    # -- rewards ---------------------------------------------------------------

    def fresh_book(self):
        return np.zeros(self.graph.n_agents, dtype=bool)

    def rewards(self, state, action, book):
        cfg = self.config
        cells = [self.coords[c] for c in state]
        out = np.empty(len(state))
        for i, c in enumerate(state):
            at_target = c == self.target_cell
            out[i] = gridworld_reward(
                cfg, cells[i], cells,
                first_visit_done=bool(book[i]),
                just_arrived=at_target and not book[i],
            )
            if at_target:
                book[i] = True
        return out

    def markov_view(self):
        return GridWorldMarkov(self)


class GridWorldMarkov(FactoredMdp):
    """Book-free view: local state = visited_bit * n_cells + cell.

    The visited bit records whether the agent stood on the target at any
    earlier step, which makes the first-arrival bonus a pure state reward.
    Exact solvers use this view; simulation keeps the leaner cell states.
    """

    def __init__(self, base: GridWorld):
        self.base = base
        self.config = base.config
        self.graph = base.graph
        self.gamma = base.gamma
        self.reward_bound = base.reward_bound
        self.n_cells = base.n_cells
        self.state_sizes = [2 * base.n_cells] * base.graph.n_agents
        self.action_sizes = list(base.action_sizes)
        self._self_pos = base._self_pos
        self._dist_cache: dict[tuple, tuple] = {}

    def split(self, aug: int) -> tuple[int, int]:
        return aug % self.n_cells, aug // self.n_cells

    def transition(self, i, nbhd_states, action):
        self_pos = self._self_pos[i]
        cell, visited = self.split(nbhd_states[self_pos])
        at_goal = sum(
            1 for k, s in enumerate(nbhd_states)
            if k != self_pos and s % self.n_cells == self.base.target_cell
        )
        outcomes, probs = self.base._move_dist(cell, action, at_goal, len(nbhd_states) - 1)
        v_next = 1 if (visited or cell == self.base.target_cell) else 0
        return tuple(v_next * self.n_cells + c for c in outcomes), probs

    def initial_states(self):
        (cells,), (p,) = self.base.initial_states()
        return [tuple(cells)], [p]

    def rewards(self, state, action, book=None):
        cfg = self.config
        cells = [self.base.coords[s % self.n_cells] for s in state]
        out = np.empty(len(state))
        for i, s in enumerate(state):
            cell, visited = self.split(s)
            at_target = cell == self.base.target_cell
            out[i] = gridworld_reward(
                cfg, cells[i], cells,
                first_visit_done=bool(visited),
                just_arrived=at_target and not visited,
            )
        return out

    def markov_view(self):
        return self

    def lift_policy(self, policy):
        """Duplicate each cell row for both visited-bit values.

        Augmented state visited * n_cells + cell indexes row cell of the
        stacked table, so behavior is identical to the base policy.
        """
        from ..policy import TabularPolicy

        return TabularPolicy([np.vstack([t, t]) for t in policy.logits])

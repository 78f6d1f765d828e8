"""Grid PacMan: collect food, dodge four ghosts, boosts grant brief invincibility.

Ghost behavior has three modes recomputed every step: wander when the agent
is out of line-of-sight, chase when visible and the agent is unboosted, flee
when visible and the agent is boosted.  Independently, each ghost takes a
uniformly random action instead with probability ghost_random_prob_eps.
Only the configured lethal ghost kills; the others pass through harmlessly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core import StepResult

LETHAL_ALL = "all"

UP, DOWN, LEFT, RIGHT, NOOP = 0, 1, 2, 3, 4
MOVES = {UP: (-1, 0), DOWN: (1, 0), LEFT: (0, -1), RIGHT: (0, 1), NOOP: (0, 0)}

WALL_COLOR = (0.0, 0.0, 1.0)
FOOD_COLOR = (0.5, 0.5, 0.5)
BOOST_COLOR = (1.0, 1.0, 1.0)
AGENT_COLOR = (1.0, 1.0, 0.0)
GHOST_COLORS = ((1.0, 0.0, 0.0), (1.0, 0.6, 0.8), (0.0, 1.0, 1.0), (1.0, 0.6, 0.0))

DEFAULT_MAP = """\
###################
#........#........#
#.##.###.#.###.##.#
#o...............o#
#.##.#.#####.#.##.#
#....#...#...#....#
####.###.#.###.####
#.................#
#.####.##.##.####.#
#.....###.###.....#
#.....# G G #.....#
#.....# G G #.....#
#.....#######.....#
#.................#
#.##.###.#.###.##.#
#..#.....P.....#..#
##.#.#.#####.#.#.##
#....#...#...#....#
#.#######.#######.#
#.................#
###################
"""


class MapError(ValueError):
    """Raised when a map fails structural validation."""


@dataclass(frozen=True)
class MapData:
    walls: np.ndarray
    food: frozenset
    boosts: frozenset
    ghost_spawns: tuple
    agent_spawn: tuple

    @property
    def shape(self) -> tuple[int, int]:
        return self.walls.shape


def parse_map(text: str) -> MapData:
    """Parse an ASCII grid: '#' wall, '.' food, 'o' boost, 'G' ghost spawn,
    'P' agent spawn, space empty."""
    rows = text.strip("\n").split("\n")
    height = len(rows)
    width = len(rows[0]) if rows else 0
    if height < 3 or width < 3:
        raise MapError(f"map too small: {height}x{width}")
    walls = np.zeros((height, width), dtype=bool)
    food, boosts, ghosts = set(), set(), []
    agent = None
    for i, row in enumerate(rows):
        if len(row) != width:
            raise MapError(f"row {i} has length {len(row)}, expected {width}")
        for j, ch in enumerate(row):
            if ch == "#":
                walls[i, j] = True
            elif ch == ".":
                food.add((i, j))
            elif ch == "o":
                boosts.add((i, j))
            elif ch == "G":
                ghosts.append((i, j))
            elif ch == "P":
                if agent is not None:
                    raise MapError("multiple agent spawns")
                agent = (i, j)
            elif ch != " ":
                raise MapError(f"unknown map character {ch!r} at ({i}, {j})")
    if agent is None:
        raise MapError("missing agent spawn 'P'")
    if len(ghosts) != 4:
        raise MapError(f"expected exactly 4 ghost spawns, found {len(ghosts)}")
    open_cells = {(i, j) for i in range(height) for j in range(width) if not walls[i, j]}
    seen = {agent}
    dq = deque([agent])
    while dq:
        i, j = dq.popleft()
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nb = (i + di, j + dj)
            if nb in open_cells and nb not in seen:
                seen.add(nb)
                dq.append(nb)
    if seen != open_cells:
        raise MapError(f"map not connected: {len(open_cells) - len(seen)} unreachable cells")
    return MapData(
        walls=walls,
        food=frozenset(food),
        boosts=frozenset(boosts),
        ghost_spawns=tuple(sorted(ghosts)),
        agent_spawn=agent,
    )


@dataclass
class PacManConfig:
    map_text: str = DEFAULT_MAP
    ghost_random_prob_eps: float = 0.1
    lethal_ghost_index: int | str = LETHAL_ALL
    boost_duration: int = 10
    task_switch_every: int = 5000
    ising_walls: bool = False
    step_cap: int = 500
    food_reward: float = 1.0
    ghost_reward: float = 5.0
    death_reward: float = -10.0
    step_penalty: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.ghost_random_prob_eps <= 1.0:
            raise ValueError(f"ghost_random_prob_eps must lie in [0, 1], got {self.ghost_random_prob_eps}")
        if self.lethal_ghost_index != LETHAL_ALL and self.lethal_ghost_index not in (0, 1, 2, 3):
            raise ValueError(f"lethal_ghost_index must be 0..3 or {LETHAL_ALL!r}, got {self.lethal_ghost_index}")


@dataclass
class _Ghost:
    pos: tuple
    spawn: tuple


class PacManEnv:
    """5 actions (up/down/left/right/no-op), 21x19x3 RGB observations."""

    n_actions = 5

    def __init__(self, cfg: PacManConfig, seed: int):
        self.cfg = cfg
        self.map = parse_map(cfg.map_text)
        self._rng = np.random.default_rng(seed)
        self.agent_pos = self.map.agent_spawn
        self.ghosts = [_Ghost(p, p) for p in self.map.ghost_spawns]
        self.food: set = set()
        self.boosts: set = set()
        self.boost_timer = 0
        self.steps = 0
        self._needs_reset = True

    @property
    def observation_shape(self) -> tuple[int, int, int]:
        h, w = self.map.shape
        return (h, w, 3)

    @property
    def walls(self) -> np.ndarray:
        return self.map.walls

    def set_lethal_ghost(self, index) -> None:
        if index != LETHAL_ALL and index not in (0, 1, 2, 3):
            raise ValueError(f"lethal ghost index must be 0..3 or {LETHAL_ALL!r}, got {index}")
        self.cfg.lethal_ghost_index = index

    def _lethal(self, ghost_index: int) -> bool:
        return self.cfg.lethal_ghost_index == LETHAL_ALL or self.cfg.lethal_ghost_index == ghost_index

    def reset(self) -> np.ndarray:
        self.agent_pos = self.map.agent_spawn
        self.ghosts = [_Ghost(p, p) for p in self.map.ghost_spawns]
        self.food = set(self.map.food)
        self.boosts = set(self.map.boosts)
        self.boost_timer = 0
        self.steps = 0
        self._needs_reset = False
        return self.render()

    def _blocked(self, pos: tuple) -> bool:
        return bool(self.map.walls[pos])

    def _move(self, pos: tuple, action: int) -> tuple:
        di, dj = MOVES[action]
        target = (pos[0] + di, pos[1] + dj)
        return pos if self._blocked(target) else target

    def _line_of_sight(self, a: tuple, b: tuple) -> int | None:
        """Direction from a toward b along a clear row/column, or None."""
        if a[0] == b[0]:
            lo, hi = sorted((a[1], b[1]))
            if all(not self.map.walls[a[0], j] for j in range(lo + 1, hi)):
                return RIGHT if b[1] > a[1] else LEFT
        if a[1] == b[1]:
            lo, hi = sorted((a[0], b[0]))
            if all(not self.map.walls[i, a[1]] for i in range(lo + 1, hi)):
                return DOWN if b[0] > a[0] else UP
        return None

    def _legal_moves(self, pos: tuple) -> list[int]:
        return [a for a in (UP, DOWN, LEFT, RIGHT) if not self._blocked((pos[0] + MOVES[a][0], pos[1] + MOVES[a][1]))]

    _OPPOSITE = {UP: DOWN, DOWN: UP, LEFT: RIGHT, RIGHT: LEFT}

    def _ghost_policy(self, ghost: _Ghost) -> tuple[int, str]:
        sight = self._line_of_sight(ghost.pos, self.agent_pos)
        if sight is None:
            mode = "wander"
            legal = self._legal_moves(ghost.pos)
            action = int(self._rng.choice(legal)) if legal else NOOP
        elif self.boost_timer > 0:
            mode = "flee"
            action = self._OPPOSITE[sight]
            if self._blocked((ghost.pos[0] + MOVES[action][0], ghost.pos[1] + MOVES[action][1])):
                legal = self._legal_moves(ghost.pos)
                action = int(self._rng.choice(legal)) if legal else NOOP
        else:
            mode = "chase"
            action = sight
        return action, mode

    def step(self, action: int) -> StepResult:
        if self._needs_reset:
            raise RuntimeError("episode finished; call reset() before step()")
        if action not in MOVES:
            raise ValueError(f"invalid action {action}")
        self.steps += 1
        reward = self.cfg.step_penalty
        events: list[str] = []
        terminal = False

        self.agent_pos = self._move(self.agent_pos, action)
        if self.agent_pos in self.food:
            self.food.discard(self.agent_pos)
            reward += self.cfg.food_reward
            events.append("food")
        if self.agent_pos in self.boosts:
            self.boosts.discard(self.agent_pos)
            self.boost_timer = self.cfg.boost_duration
            events.append("boost")

        died, eat_reward = self._resolve_collisions(events)
        reward += eat_reward
        terminal = died

        ghost_actions: list[int] = []
        ghost_modes: list[str] = []
        if not terminal:
            for g in self.ghosts:
                intended, mode = self._ghost_policy(g)
                if self._rng.random() < self.cfg.ghost_random_prob_eps:
                    intended = int(self._rng.integers(4))
                    mode = "random"
                g.pos = self._move(g.pos, intended)
                ghost_actions.append(intended)
                ghost_modes.append(mode)
            died, eat_reward = self._resolve_collisions(events)
            reward += eat_reward
            terminal = died

        if terminal:
            reward += self.cfg.death_reward
            events.append("death")

        if self.boost_timer > 0:
            self.boost_timer -= 1

        truncated = False
        if not terminal:
            if not self.food:
                terminal = True
                events.append("cleared")
            elif self.steps >= self.cfg.step_cap:
                terminal = True
                truncated = True
                events.append("step_cap")
        if terminal:
            self._needs_reset = True

        info = {
            "events": events,
            "agent_position": self.agent_pos,
            "ghost_positions": tuple(g.pos for g in self.ghosts),
            "ghost_actions": tuple(ghost_actions),
            "ghost_modes": tuple(ghost_modes),
            "food_left": len(self.food),
            "boost_timer": self.boost_timer,
            "truncated": truncated,
        }
        return StepResult(self.render(), reward, terminal, info)

    def _resolve_collisions(self, events: list[str]) -> tuple[bool, float]:
        reward = 0.0
        for i, g in enumerate(self.ghosts):
            if g.pos != self.agent_pos:
                continue
            if self.boost_timer > 0:
                g.pos = g.spawn
                reward += self.cfg.ghost_reward
                events.append(f"ate_ghost_{i}")
            elif self._lethal(i):
                return True, reward
        return False, reward

    def render(self) -> np.ndarray:
        h, w = self.map.shape
        img = np.zeros((h, w, 3))
        img[self.map.walls] = WALL_COLOR
        for pos in self.food:
            img[pos] = FOOD_COLOR
        for pos in self.boosts:
            img[pos] = BOOST_COLOR
        for i, g in enumerate(self.ghosts):
            img[g.pos] = GHOST_COLORS[i]
        img[self.agent_pos] = AGENT_COLOR
        return img

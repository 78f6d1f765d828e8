"""Environment wrappers: continual lethal-ghost schedule and Ising wall overlay."""

from __future__ import annotations

import numpy as np

from .core import StepResult
from .pacman import WALL_COLOR

OVERLAY_COLOR = (1.0, 0.0, 1.0)


class ContinualTaskSchedule:
    """Cycle the lethal ghost 0 -> 1 -> 2 -> 3 -> 0 every task_switch_every episodes.

    Task boundaries are logged through info; all other env semantics pass
    through untouched (the wrapper consumes no randomness).
    """

    def __init__(self, env, task_switch_every: int):
        if task_switch_every < 1:
            raise ValueError(f"task_switch_every must be >= 1, got {task_switch_every}")
        self.env = env
        self.task_switch_every = task_switch_every
        self.episodes_started = 0

    @property
    def task_id(self) -> int:
        return max(0, self.episodes_started - 1) // self.task_switch_every

    @property
    def lethal_ghost_index(self) -> int:
        return self.task_id % 4

    def reset(self) -> np.ndarray:
        prev_task = self.task_id if self.episodes_started > 0 else None
        self.episodes_started += 1
        self.env.set_lethal_ghost(self.lethal_ghost_index)
        self._task_switched = prev_task is not None and prev_task != self.task_id
        return self.env.reset()

    def step(self, action: int) -> StepResult:
        res = self.env.step(action)
        res.info["task_id"] = self.task_id
        res.info["task_switched"] = self._task_switched
        return res

    def __getattr__(self, name):
        return getattr(self.env, name)


class IsingWallsOverlay:
    """Recolor wall pixels driven by a heat-bath spin process on the wall cells.

    The process has its own generator (derived from seed), resets to random
    spins each episode, and evolves one synchronous sweep per step using each
    wall cell's wall-cell neighbors; +1 spins render as the overlay color.
    With enabled=False the wrapper passes observations through untouched.
    """

    def __init__(self, env, seed: int, beta: float = 2.5, enabled: bool = True):
        self.env = env
        self.beta = beta
        self.enabled = enabled
        self._rng = np.random.default_rng(seed)
        self._wall_mask = env.walls.copy()
        self._spins = np.zeros(self._wall_mask.shape)

    @property
    def spins(self) -> np.ndarray:
        return self._spins

    def _reset_spins(self) -> None:
        self._spins = np.where(
            self._rng.random(self._wall_mask.shape) < 0.5, -1.0, 1.0
        )
        self._spins[~self._wall_mask] = 0.0

    def _evolve(self) -> None:
        s = self._spins
        nbr = np.zeros_like(s)
        nbr[1:, :] += s[:-1, :]
        nbr[:-1, :] += s[1:, :]
        nbr[:, 1:] += s[:, :-1]
        nbr[:, :-1] += s[:, 1:]
        p_up = 1.0 / (1.0 + np.exp(-2.0 * self.beta * nbr))
        u = self._rng.random(s.shape)
        new = np.where(u < p_up, 1.0, -1.0)
        new[~self._wall_mask] = 0.0
        self._spins = new

    def _apply(self, obs: np.ndarray) -> np.ndarray:
        if not self.enabled:
            return obs
        out = obs.copy()
        out[self._wall_mask & (self._spins > 0)] = OVERLAY_COLOR
        out[self._wall_mask & (self._spins <= 0)] = WALL_COLOR
        return out

    def reset(self) -> np.ndarray:
        obs = self.env.reset()
        if self.enabled:
            self._reset_spins()
        return self._apply(obs)

    def step(self, action: int) -> StepResult:
        res = self.env.step(action)
        if self.enabled:
            self._evolve()
        res.observation = self._apply(res.observation)
        return res

    def __getattr__(self, name):
        return getattr(self.env, name)

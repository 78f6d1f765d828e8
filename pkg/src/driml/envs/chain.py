"""Biased random-walk chain environment with one-hot observations."""

from __future__ import annotations

import numpy as np

from ..markov import random_walk_chain
from .core import StepResult


class ChainEnv:
    """Action-free walk on {0..K-1}; the single dummy action is ignored.

    Interior states move right with prob alpha and left otherwise; endpoint
    states stay put instead of walking off the chain.  Episodes run forever
    unless episode_len is set, in which case terminal is raised as a
    truncation marker for buffer segmentation.
    """

    n_actions = 1

    def __init__(self, K: int, alpha: float, seed: int, episode_len: int | None = None):
        if K < 2:
            raise ValueError(f"need K >= 2 states, got {K}")
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
        self.K = K
        self.alpha = alpha
        if alpha < 1.0:
            self.transition_matrix = random_walk_chain(K, alpha)
        else:
            # degenerate always-advance walk, absorbing at the last state
            self.transition_matrix = np.zeros((K, K))
            self.transition_matrix[np.arange(K - 1), np.arange(1, K)] = 1.0
            self.transition_matrix[K - 1, K - 1] = 1.0
        self.episode_len = episode_len
        self._rng = np.random.default_rng(seed)
        self._state = 0
        self._steps = 0
        self._needs_reset = True

    @property
    def observation_shape(self) -> tuple[int]:
        return (self.K,)

    @property
    def state(self) -> int:
        return self._state

    def _obs(self) -> np.ndarray:
        one_hot = np.zeros(self.K)
        one_hot[self._state] = 1.0
        return one_hot

    def reset(self) -> np.ndarray:
        self._state = int(self._rng.integers(self.K))
        self._steps = 0
        self._needs_reset = False
        return self._obs()

    def step(self, action: int = 0) -> StepResult:
        if self._needs_reset:
            raise RuntimeError("episode finished; call reset() before step()")
        self._steps += 1
        i = self._state
        go_right = self._rng.random() < self.alpha
        if i == 0:
            self._state = 1 if go_right else 0
        elif i == self.K - 1:
            self._state = self.K - 1 if go_right else self.K - 2
        else:
            self._state = i + 1 if go_right else i - 1
        terminal = self.episode_len is not None and self._steps >= self.episode_len
        if terminal:
            self._needs_reset = True
        return StepResult(self._obs(), 0.0, terminal, {"state": self._state, "truncated": terminal})

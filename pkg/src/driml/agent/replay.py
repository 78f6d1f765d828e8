"""Episode-segmented replay with n-step returns and lookahead offsets.

Episodes are stored whole (observations include the final state), so offset
reads s_{t+k} and action windows never straddle an episode boundary; FIFO
eviction drops whole oldest episodes once the transition count exceeds
capacity.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np


@dataclass
class _Episode:
    observations: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    terminal: bool = False  # True when ended by the environment, not truncation

    def __len__(self) -> int:
        return len(self.actions)


@dataclass
class TransitionBatch:
    s: np.ndarray  # (b, ...) observations at t
    a: np.ndarray  # (b,) actions at t
    g_n: np.ndarray  # (b,) n-step discounted return sums
    gamma_n: np.ndarray  # (b,) effective discount on the bootstrap (0 past terminal)
    s_next: np.ndarray  # (b, ...) bootstrap observations at t+n'
    s_k: np.ndarray | None  # (b, ...) observations at t+k, when ks given
    k: np.ndarray | None  # (b,) lookahead offsets used
    terminal: np.ndarray  # (b,) whether the n-step window hit a true terminal


@dataclass(frozen=True)
class SampleRef:
    episode_index: int
    t: int
    max_k: int
    action_window: np.ndarray  # actions a_t .. a_{min(t+H, T-1)}


class ReplayBuffer:
    def __init__(self, capacity: int, n_step: int, gamma: float, horizon: int):
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = capacity
        self.n_step = n_step
        self.gamma = gamma
        self.horizon = horizon
        self._episodes: deque[_Episode] = deque()
        self._open: _Episode | None = None
        self._size = 0
        self._episode_base = 0  # index offset of _episodes[0]

    def __len__(self) -> int:
        return self._size

    def start_episode(self, first_obs: np.ndarray) -> None:
        if self._open is not None:
            raise RuntimeError("previous episode not closed; call end_episode first")
        self._open = _Episode(observations=[np.asarray(first_obs)])

    def append(self, action: int, reward: float, next_obs: np.ndarray) -> None:
        if self._open is None:
            raise RuntimeError("no open episode; call start_episode first")
        self._open.actions.append(int(action))
        self._open.rewards.append(float(reward))
        self._open.observations.append(np.asarray(next_obs))

    def end_episode(self, terminal: bool) -> None:
        """Close the open episode; terminal=False marks truncation (bootstrap ok)."""
        ep = self._open
        self._open = None
        if ep is None or len(ep) == 0:
            return
        ep.terminal = terminal
        self._episodes.append(ep)
        self._size += len(ep)
        while self._size > self.capacity and len(self._episodes) > 1:
            dropped = self._episodes.popleft()
            self._size -= len(dropped)
            self._episode_base += 1

    def sample_refs(self, batch_size: int, rng: np.random.Generator) -> list[SampleRef]:
        if self._size == 0:
            raise RuntimeError("replay buffer is empty")
        lengths = np.array([len(ep) for ep in self._episodes])
        cum = np.cumsum(lengths)
        flat = rng.integers(0, self._size, size=batch_size)
        refs = []
        for f in flat:
            e = int(np.searchsorted(cum, f, side="right"))
            t = int(f - (cum[e - 1] if e > 0 else 0))
            ep = self._episodes[e]
            max_k = len(ep) - t
            window = np.asarray(ep.actions[t : min(t + self.horizon + 1, len(ep))], dtype=np.intp)
            refs.append(SampleRef(episode_index=e, t=t, max_k=max_k, action_window=window))
        return refs

    def materialize(self, refs: list[SampleRef], ks: np.ndarray | None) -> TransitionBatch:
        s, a, g_n, gamma_n, s_next, s_k, terminal = [], [], [], [], [], [], []
        for i, ref in enumerate(refs):
            ep = self._episodes[ref.episode_index]
            t = ref.t
            n_avail = min(self.n_step, len(ep) - t)
            g = 0.0
            for m in range(n_avail):
                g += self.gamma**m * ep.rewards[t + m]
            hit_terminal = ep.terminal and (t + n_avail == len(ep))
            s.append(ep.observations[t])
            a.append(ep.actions[t])
            g_n.append(g)
            gamma_n.append(0.0 if hit_terminal else self.gamma**n_avail)
            s_next.append(ep.observations[t + n_avail])
            terminal.append(hit_terminal)
            if ks is not None:
                k = int(ks[i])
                if not 1 <= k <= ref.max_k:
                    raise ValueError(f"k={k} outside [1, {ref.max_k}] for item {i}")
                s_k.append(ep.observations[t + k])
        return TransitionBatch(
            s=np.stack(s),
            a=np.asarray(a, dtype=np.intp),
            g_n=np.asarray(g_n),
            gamma_n=np.asarray(gamma_n),
            s_next=np.stack(s_next),
            s_k=np.stack(s_k) if ks is not None else None,
            k=np.asarray(ks, dtype=np.intp) if ks is not None else None,
            terminal=np.asarray(terminal, dtype=bool),
        )

"""Shared environment plumbing: step records, frame stacking, trace dumps."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    terminal: bool
    info: dict = field(default_factory=dict)


class FrameStack:
    """Stack the last n frames on the channel axis and upscale by pixel duplication.

    A (h, w, c) frame becomes (h*scale, w*scale, c*n); the stack is filled
    with the reset frame so observation shape is constant within an episode.
    """

    def __init__(self, env, n_frames: int = 4, scale: int = 2):
        self.env = env
        self.n_frames = n_frames
        self.scale = scale
        self._frames: deque[np.ndarray] = deque(maxlen=n_frames)

    @property
    def n_actions(self) -> int:
        return self.env.n_actions

    @property
    def observation_shape(self) -> tuple[int, int, int]:
        h, w, c = self.env.observation_shape
        return (h * self.scale, w * self.scale, c * self.n_frames)

    def _stacked(self) -> np.ndarray:
        stacked = np.concatenate(list(self._frames), axis=2)
        if self.scale > 1:
            stacked = np.repeat(np.repeat(stacked, self.scale, axis=0), self.scale, axis=1)
        return stacked

    def reset(self) -> np.ndarray:
        frame = self.env.reset()
        self._frames.clear()
        for _ in range(self.n_frames):
            self._frames.append(frame)
        return self._stacked()

    def step(self, action: int) -> StepResult:
        res = self.env.step(action)
        self._frames.append(res.observation)
        return StepResult(self._stacked(), res.reward, res.terminal, res.info)

    def __getattr__(self, name):
        return getattr(self.env, name)


def write_trace(path, records: list[dict]) -> None:
    """Line-delimited episode trace: step,action,reward,terminal,task_id."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("step,action,reward,terminal,task_id\n")
        for r in records:
            fh.write(
                f"{r['step']},{r['action']},{r['reward']:.17g},"
                f"{int(r['terminal'])},{r.get('task_id', 0)}\n"
            )


def read_trace(path) -> list[dict]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            vals = line.strip().split(",")
            rec = dict(zip(header, vals))
            out.append(
                {
                    "step": int(rec["step"]),
                    "action": int(rec["action"]),
                    "reward": float(rec["reward"]),
                    "terminal": bool(int(rec["terminal"])),
                    "task_id": int(rec["task_id"]),
                }
            )
    return out

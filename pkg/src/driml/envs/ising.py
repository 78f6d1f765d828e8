"""Lattice of fair coin flips with one patch evolving by heat-bath dynamics.

Each episode the full lattice resets to independent Rademacher spins and a
patch location is drawn; inside the patch, every step resamples each cell
from p(s = +1 | neighbors) = 1 / (1 + exp(-2 beta * neighbor_sum)) using
the previous step's values of its neighbors within the patch (free
boundary), all cells simultaneously.  Everything outside the patch is
redrawn fair each step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import StepResult

VON_NEUMANN_4 = "von_neumann_4"
DIAGONAL_4 = "diagonal_4"


@dataclass
class IsingConfig:
    lattice_side: int = 84
    patch_side: int = 42
    inv_temperature_beta: float = 2.5
    patch_center_range: tuple[int, int] = (21, 63)
    neighborhood: str = VON_NEUMANN_4
    episode_len: int = 32

    def __post_init__(self):
        if self.neighborhood not in (VON_NEUMANN_4, DIAGONAL_4):
            raise ValueError(f"unknown neighborhood {self.neighborhood!r}")
        lo, hi = self.patch_center_range
        half_lo = self.patch_side // 2
        half_hi = self.patch_side - half_lo - 1
        if lo - half_lo < 0 or hi + half_hi > self.lattice_side - 1:
            raise ValueError(
                f"patch of side {self.patch_side} does not fit in a "
                f"{self.lattice_side} lattice for centers in {self.patch_center_range}"
            )


class IsingEnv:
    """No actions, no rewards; observations are the +-1 lattice as (side, side, 1)."""

    n_actions = 1

    def __init__(self, cfg: IsingConfig, seed: int):
        self.cfg = cfg
        self._rng = np.random.default_rng(seed)
        self._lattice = np.zeros((cfg.lattice_side, cfg.lattice_side))
        self._patch = (0, 0, 0, 0)
        self._steps = 0
        self._needs_reset = True

    @property
    def observation_shape(self) -> tuple[int, int, int]:
        return (self.cfg.lattice_side, self.cfg.lattice_side, 1)

    @property
    def patch_bounds(self) -> tuple[int, int, int, int]:
        """Inclusive (row_lo, row_hi, col_lo, col_hi) of the current patch."""
        return self._patch

    def _obs(self) -> np.ndarray:
        return self._lattice[:, :, None].copy()

    def _draw_fair(self, shape) -> np.ndarray:
        return self._rng.choice(np.array([-1.0, 1.0]), size=shape)

    def reset(self) -> np.ndarray:
        cfg = self.cfg
        self._lattice = self._draw_fair((cfg.lattice_side, cfg.lattice_side))
        lo, hi = cfg.patch_center_range
        ci = int(self._rng.integers(lo, hi + 1))
        cj = int(self._rng.integers(lo, hi + 1))
        half_lo = cfg.patch_side // 2
        half_hi = cfg.patch_side - half_lo - 1
        self._patch = (ci - half_lo, ci + half_hi, cj - half_lo, cj + half_hi)
        self._steps = 0
        self._needs_reset = False
        return self._obs()

    def _neighbor_sum(self, patch: np.ndarray) -> np.ndarray:
        s = np.zeros_like(patch)
        if self.cfg.neighborhood == VON_NEUMANN_4:
            offsets = ((-1, 0), (1, 0), (0, -1), (0, 1))
        else:
            offsets = ((-1, -1), (-1, 1), (1, -1), (1, 1))
        h, w = patch.shape
        for di, dj in offsets:
            src_i = slice(max(0, -di), min(h, h - di))
            src_j = slice(max(0, -dj), min(w, w - dj))
            dst_i = slice(max(0, di), min(h, h + di))
            dst_j = slice(max(0, dj), min(w, w + dj))
            s[dst_i, dst_j] += patch[src_i, src_j]
        return s

    def step(self, action: int = 0) -> StepResult:
        if self._needs_reset:
            raise RuntimeError("episode finished; call reset() before step()")
        self._steps += 1
        r0, r1, c0, c1 = self._patch
        beta = self.cfg.inv_temperature_beta
        old_patch = self._lattice[r0 : r1 + 1, c0 : c1 + 1].copy()
        fresh = self._draw_fair(self._lattice.shape)
        p_up = 1.0 / (1.0 + np.exp(-2.0 * beta * self._neighbor_sum(old_patch)))
        u = self._rng.random(size=old_patch.shape)
        new_patch = np.where(u < p_up, 1.0, -1.0)
        self._lattice = fresh
        self._lattice[r0 : r1 + 1, c0 : c1 + 1] = new_patch
        terminal = self._steps >= self.cfg.episode_len
        if terminal:
            self._needs_reset = True
        return StepResult(
            self._obs(),
            0.0,
            terminal,
            {"patch_bounds": self._patch, "truncated": terminal},
        )

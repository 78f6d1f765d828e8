"""Fixed 51-atom return support and the categorical Bellman projection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N_ATOMS = 51


@dataclass(frozen=True)
class SupportGrid:
    v_min: float
    v_max: float
    n_atoms: int = N_ATOMS

    def __post_init__(self):
        if self.v_min >= self.v_max:
            raise ValueError(f"need v_min < v_max, got [{self.v_min}, {self.v_max}]")
        if self.n_atoms != N_ATOMS:
            raise ValueError(f"support is fixed at {N_ATOMS} atoms, got {self.n_atoms}")

    @property
    def atoms(self) -> np.ndarray:
        return np.linspace(self.v_min, self.v_max, self.n_atoms)

    @property
    def delta(self) -> float:
        return (self.v_max - self.v_min) / (self.n_atoms - 1)


def categorical_projection(
    target_probs: np.ndarray,
    returns_g,
    gamma_n,
    grid: SupportGrid,
) -> np.ndarray:
    """Project the shifted-and-scaled atom distribution back onto the grid.

    Each atom z_j maps to clamp(g + gamma_n * z_j, v_min, v_max) and its mass
    splits linearly between the two bracketing atoms.  Accepts a single
    distribution (n_atoms,) with scalar g/gamma_n or a batch (b, n_atoms)
    with per-item vectors; mass is preserved exactly.
    """
    probs = np.asarray(target_probs, dtype=np.float64)
    squeeze = probs.ndim == 1
    if squeeze:
        probs = probs[None, :]
    b = probs.shape[0]
    if probs.shape != (b, grid.n_atoms):
        raise ValueError(f"expected (*, {grid.n_atoms}) distribution, got {probs.shape}")
    g = np.broadcast_to(np.asarray(returns_g, dtype=np.float64), (b,))
    gn = np.broadcast_to(np.asarray(gamma_n, dtype=np.float64), (b,))
    tz = np.clip(g[:, None] + gn[:, None] * grid.atoms[None, :], grid.v_min, grid.v_max)
    pos = (tz - grid.v_min) / grid.delta
    lower = np.floor(pos).astype(np.intp)
    upper = np.minimum(lower + 1, grid.n_atoms - 1)
    frac = pos - lower
    exact = lower == upper  # clamped top atom: all mass to lower
    mass_low = np.where(exact, probs, probs * (1.0 - frac))
    mass_high = np.where(exact, 0.0, probs * frac)
    out = np.zeros_like(probs)
    rows = np.repeat(np.arange(b), grid.n_atoms)
    np.add.at(out, (rows, lower.ravel()), mass_low.ravel())
    np.add.at(out, (rows, upper.ravel()), mass_high.ravel())
    return out[0] if squeeze else out

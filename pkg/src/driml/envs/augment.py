"""Random crop-and-resize with per-channel color jitter for contrastive views."""

from __future__ import annotations

import numpy as np


def augment(
    obs: np.ndarray,
    crop_fraction: float,
    jitter_strength: float,
    rng: np.random.Generator | int,
) -> np.ndarray:
    """Crop to crop_fraction of each spatial dim, resize back by nearest
    neighbor, then scale each channel by a factor uniform in
    [1 - jitter, 1 + jitter] and clamp to [0, 1].

    crop_fraction = 1 with jitter 0 is the identity; output shape always
    equals input shape.
    """
    if not 0.0 < crop_fraction <= 1.0:
        raise ValueError(f"crop_fraction must lie in (0, 1], got {crop_fraction}")
    if jitter_strength < 0.0:
        raise ValueError(f"jitter_strength must be nonnegative, got {jitter_strength}")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    obs = np.asarray(obs, dtype=np.float64)
    if obs.ndim != 3:
        raise ValueError(f"expected (h, w, c) observation, got shape {obs.shape}")
    h, w, c = obs.shape
    ch = max(1, round(h * crop_fraction))
    cw = max(1, round(w * crop_fraction))
    top = int(rng.integers(0, h - ch + 1))
    left = int(rng.integers(0, w - cw + 1))
    crop = obs[top : top + ch, left : left + cw]
    rows = np.floor(np.arange(h) * ch / h).astype(int)
    cols = np.floor(np.arange(w) * cw / w).astype(int)
    resized = crop[rows][:, cols]
    if jitter_strength > 0.0:
        factors = rng.uniform(1.0 - jitter_strength, 1.0 + jitter_strength, size=c)
        resized = np.clip(resized * factors[None, None, :], 0.0, 1.0)
    return resized

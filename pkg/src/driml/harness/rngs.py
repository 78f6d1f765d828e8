"""Named random substreams derived from the single experiment seed.

Each stream is keyed by (seed, sha256(name)), so perturbing one stream's
draws can never affect another and adding new names never reshuffles
existing ones.
"""

from __future__ import annotations

import hashlib

import numpy as np


def substream(seed: int, name: str) -> np.random.Generator:
    digest = hashlib.sha256(name.encode("utf-8")).digest()[:8]
    key = int.from_bytes(digest, "little")
    return np.random.default_rng(np.random.SeedSequence([int(seed), key]))


def child_seed(seed: int, name: str) -> int:
    """A stable integer seed for components that take plain int seeds."""
    return int(substream(seed, name).integers(2**31 - 1))

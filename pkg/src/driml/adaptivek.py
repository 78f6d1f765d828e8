"""Adaptive lookahead: action log-odds counts, the continue matrix, and
non-homogeneous-geometric sampling of the temporal offset k.

The log-odds of taking action j right after action i are estimated from
smoothed empirical counts over consecutive action pairs drawn from replay.
The continue matrix A is the rowwise softmax of those log-odds; sampling
walks the action window drawing continue-Bernoullis with p = A[a_prev, a_next]
and returns the step index of the first failure (capped at the horizon).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ActionOddsModel:
    def __init__(
        self,
        n_actions: int,
        smoothing: float = 1.0,
        decay: float = 0.999,
        decay_every: int = 1000,
    ):
        if n_actions < 1:
            raise ValueError(f"n_actions must be positive, got {n_actions}")
        if smoothing <= 0:
            raise ValueError(f"smoothing must be positive, got {smoothing}")
        self.n_actions = n_actions
        self.smoothing = smoothing
        self.decay = decay
        self.decay_every = decay_every
        self.counts_joint = np.zeros((n_actions, n_actions))
        self.counts_marginal = np.zeros(n_actions)
        self.update_calls = 0

    def update(self, pairs) -> None:
        """Accumulate consecutive action pairs (a_t, a_{t+1}); order-invariant."""
        self.update_calls += 1
        for a_i, a_j in pairs:
            self.counts_joint[int(a_i), int(a_j)] += 1.0
            self.counts_marginal[int(a_j)] += 1.0
        if self.decay_every and self.update_calls % self.decay_every == 0:
            self.counts_joint *= self.decay
            self.counts_marginal *= self.decay

    def log_odds(self) -> np.ndarray:
        """q(i, j) = log p_hat(j | i) - log p_hat(j) with Laplace smoothing."""
        lam = self.smoothing
        n = self.n_actions
        row_tot = self.counts_joint.sum(axis=1, keepdims=True)
        total = self.counts_marginal.sum()
        cond = (self.counts_joint + lam) / (row_tot + lam * n)
        marg = (self.counts_marginal + lam) / (total + lam * n)
        return np.log(cond) - np.log(marg)[None, :]

    def continue_matrix(self) -> np.ndarray:
        """Rowwise softmax of the log-odds; rows sum to 1."""
        q = self.log_odds()
        shifted = q - q.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=1, keepdims=True)


def continue_probs_for_window(A: np.ndarray, window: np.ndarray, H: int) -> np.ndarray:
    """Continue probabilities A[a_{t+i-1}, a_{t+i}] for i = 1..effective H."""
    window = np.asarray(window, dtype=np.intp)
    if window.size == 0:
        raise ValueError("action window is empty")
    eff = min(H, window.size - 1)
    return np.array([A[window[i - 1], window[i]] for i in range(1, eff + 1)])


def sample_k(A: np.ndarray, window, H: int, rng: np.random.Generator) -> int:
    """Walk i = 1..H setting k = i and drawing b ~ Bernoulli(A[a_{t+i-1}, a_{t+i}]);
    stop at the first failure.  Truncated windows use the available length as
    the effective horizon; a length-1 window yields k = 1."""
    window = np.asarray(window, dtype=np.intp)
    if window.size == 0:
        raise ValueError("action window is empty")
    eff = min(H, window.size - 1)
    k = 1
    for i in range(1, eff + 1):
        k = i
        if rng.random() >= A[window[i - 1], window[i]]:
            break
    return k


def nhg_pmf(continue_probs: np.ndarray, H: int) -> np.ndarray:
    """Exact distribution of sample_k under the given continue probabilities."""
    c = np.asarray(continue_probs, dtype=np.float64)
    if c.size < H - 1:
        raise ValueError(f"need at least {H - 1} continue probabilities, got {c.size}")
    pmf = np.zeros(H)
    surv = 1.0
    for i in range(1, H):
        pmf[i - 1] = surv * (1.0 - c[i - 1])
        surv *= c[i - 1]
    pmf[H - 1] = surv
    return pmf


@dataclass(frozen=True)
class NhgBounds:
    lower: float
    upper: float
    degenerate: bool


def nhg_expectation_bounds(continue_probs: np.ndarray) -> NhgBounds:
    """Bounds 1/max(q) <= E[k] <= 1/min(q) from break probabilities q = 1 - continue.

    Valid diagnostics in the untruncated regime (horizon much larger than
    1/min q); degenerate break probabilities flag infinite or unit bounds.
    """
    c = np.asarray(continue_probs, dtype=np.float64)
    if c.size == 0:
        raise ValueError("need at least one continue probability")
    q = 1.0 - c
    degenerate = bool(np.any(q <= 0.0) or np.any(q >= 1.0))
    lower = 1.0 / q.max() if q.max() > 0 else np.inf
    upper = 1.0 / q.min() if q.min() > 0 else np.inf
    return NhgBounds(lower=float(lower), upper=float(upper), degenerate=degenerate)

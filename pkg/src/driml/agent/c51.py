"""C51 pieces: epsilon schedule, greedy acting, and the projected KL loss."""

from __future__ import annotations

import numpy as np

from ..nn import tensor as T
from ..nn.tensor import Tensor, no_grad
from .replay import TransitionBatch
from .support import SupportGrid, categorical_projection


def epsilon_by_step(step: int, start: float = 0.1, end: float = 0.01, decay_steps: int = 100_000) -> float:
    """Linear decay from start to end over decay_steps, constant afterwards."""
    if decay_steps <= 0:
        return end
    frac = min(1.0, max(0.0, step / decay_steps))
    return start + (end - start) * frac


def _softmax_np(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def expected_values(f5_logits: np.ndarray, grid: SupportGrid) -> np.ndarray:
    """Q(s, a) = sum_i z_i p_i(s, a) from value-head logits (b, actions, atoms)."""
    return _softmax_np(f5_logits) @ grid.atoms


def act(enc, obs: np.ndarray, epsilon: float, rng: np.random.Generator, grid: SupportGrid) -> int:
    """Epsilon-greedy on the expected value of the return distribution."""
    n_actions = enc.spec.n_actions
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(n_actions))
    with no_grad():
        outs = enc.encode(obs[None])
    q = expected_values(outs.f5_value_logits.data, grid)[0]
    return int(np.argmax(q))


def c51_loss(
    online_enc,
    target_enc,
    batch: TransitionBatch,
    grid: SupportGrid,
) -> Tensor:
    """Mean KL between the projected target distribution and the online one.

    The bootstrap action is greedy under the target network's expected
    values; terminal transitions carry gamma_n = 0 so only the return sum
    remains.
    """
    if batch.s.shape[0] == 0:
        raise ValueError("batch must be nonempty")
    b = batch.s.shape[0]
    with no_grad():
        target_outs = target_enc.encode(batch.s_next)
    target_probs = _softmax_np(target_outs.f5_value_logits.data)
    q_next = target_probs @ grid.atoms
    a_star = np.argmax(q_next, axis=1)
    next_dist = target_probs[np.arange(b), a_star]
    m = categorical_projection(next_dist, batch.g_n, batch.gamma_n, grid)

    online_outs = online_enc.encode(batch.s)
    log_q = T.log_softmax(T.take_rows(online_outs.f5_value_logits, batch.a), axis=1)
    return T.mul(T.kl_categorical(m, log_q), 1.0 / b)

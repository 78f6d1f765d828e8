"""Contrastive score matrices and the temporal infoNCE losses.

The score path: per location, pairwise dot products between reference and
candidate embeddings across the batch, scaled by 1/sqrt(d), then softly
clipped to +-clip_val via clip_val * tanh(x / clip_val).  The loss takes a
log-softmax over candidates (the batch: one positive on the diagonal, the
other batch members as negatives) and averages the negated diagonal over
locations and batch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoder import ChainModel, DimHeads, project_future, project_with_action
from .markov import RatioModel
from .nn import tensor as T
from .nn.tensor import Tensor

DEFAULT_CLIP = 20.0


@dataclass
class DimWeights:
    lambda_4t4: float = 1.0
    lambda_3t3: float = 1.0
    lambda_3t4: float = 0.0
    lambda_4t3: float = 0.0

    def items(self):
        return (
            ((4, 4), self.lambda_4t4),
            ((3, 3), self.lambda_3t3),
            ((3, 4), self.lambda_3t4),
            ((4, 3), self.lambda_4t3),
        )

    def any_active(self) -> bool:
        return any(w > 0 for _, w in self.items())


def _as_loc_layout(x: Tensor) -> Tensor:
    """Accept (b, d) or (b, d, locs) or (b, d, lh, lw); return (b, d, locs)."""
    if x.ndim == 2:
        return T.reshape(x, (x.shape[0], x.shape[1], 1))
    if x.ndim == 3:
        return x
    if x.ndim == 4:
        return T.reshape(x, (x.shape[0], x.shape[1], x.shape[2] * x.shape[3]))
    raise ValueError(f"cannot interpret shape {x.shape} as (batch, dim, locations)")


def score_matrix(reference: Tensor, positive: Tensor, clip_val: float = DEFAULT_CLIP) -> Tensor:
    """Pairwise scores (n_locs, n_batch, n_batch); entry (l, i, j) scores
    reference i against candidate j at location l."""
    ref = _as_loc_layout(reference)
    pos = _as_loc_layout(positive)
    if ref.shape != pos.shape:
        raise ValueError(f"shape mismatch: reference {ref.shape} vs positive {pos.shape}")
    d = ref.shape[1]
    if d == 0:
        raise ValueError("embedding dimension must be positive")
    ref_t = T.transpose(ref, (2, 0, 1))  # (locs, batch, d)
    pos_t = T.transpose(pos, (2, 1, 0))  # (locs, d, batch)
    pairs = T.mul(T.matmul(ref_t, pos_t), 1.0 / np.sqrt(d))
    return T.tanh_clip(pairs, clip_val)


def nce_loss(scores: Tensor) -> Tensor:
    """Negated mean diagonal log-softmax over candidates, averaged over
    locations and batch."""
    if scores.ndim != 3 or scores.shape[1] != scores.shape[2]:
        raise ValueError(f"scores must be (locs, batch, batch), got {scores.shape}")
    n_batch = scores.shape[1]
    if n_batch < 2:
        raise ValueError(f"need at least 2 batch items for negatives, got {n_batch}")
    log_probs = T.log_softmax(scores, axis=2)
    mask = np.broadcast_to(np.eye(n_batch), (scores.shape[0], n_batch, n_batch)).copy()
    diag_sum = T.sum_(T.mul(log_probs, mask))
    return T.neg(T.mul(diag_sum, 1.0 / (scores.shape[0] * n_batch)))


def diagonal_scores(scores: Tensor) -> np.ndarray:
    """Per-location diagonal log-softmax entries as a (locs, batch) array."""
    log_probs = T.log_softmax(scores, axis=2).data
    return np.diagonal(log_probs, axis1=1, axis2=2).copy()


def _reference(enc, heads, s_t, actions_onehot, level, use_action):
    outs = enc.encode(s_t)
    return project_with_action(heads, outs, actions_onehot, level, use_action=use_action)


def _positive(enc, heads, s_tk, level):
    return project_future(heads, enc.encode(s_tk), level)


def _pair_to_layout(ref: Tensor, pos: Tensor) -> tuple[Tensor, Tensor]:
    """Align a (reference, positive) pair; global vectors broadcast across the
    other side's locations for the cross-level combinations."""
    ref_l = _as_loc_layout(ref)
    pos_l = _as_loc_layout(pos)
    if ref_l.shape[2] == pos_l.shape[2]:
        return ref_l, pos_l
    if ref_l.shape[2] == 1:
        ref_l = T.tile_last(T.reshape(ref_l, ref_l.shape[:2]), pos_l.shape[2])
        return ref_l, pos_l
    if pos_l.shape[2] == 1:
        pos_l = T.tile_last(T.reshape(pos_l, pos_l.shape[:2]), ref_l.shape[2])
        return ref_l, pos_l
    raise ValueError(f"incompatible location counts: {ref_l.shape} vs {pos_l.shape}")


def dim_loss(
    enc,
    heads: DimHeads,
    s_t,
    actions_onehot,
    s_tk,
    N: int,
    M: int,
    use_action: bool = True,
    clip_val: float = DEFAULT_CLIP,
) -> Tensor:
    """infoNCE loss scoring level-N features now against level-M features at t+k."""
    if N not in (3, 4) or M not in (3, 4):
        raise ValueError(f"levels must be 3 or 4, got N={N}, M={M}")
    ref = _reference(enc, heads, s_t, actions_onehot, N, use_action)
    pos = _positive(enc, heads, s_tk, M)
    ref, pos = _pair_to_layout(ref, pos)
    return nce_loss(score_matrix(ref, pos, clip_val))


def composite_dim_loss(
    enc,
    heads: DimHeads,
    s_t,
    actions_onehot,
    s_tk,
    weights: DimWeights,
    use_action: bool = True,
    clip_val: float = DEFAULT_CLIP,
) -> tuple[Tensor | None, dict[str, float]]:
    """Weighted sum of the active (N, M) losses, sharing the two encoder passes.

    Returns (loss, per-pair scalar values); loss is None when every weight is
    zero so callers can skip the backward pass entirely.
    """
    parts: dict[str, float] = {}
    if not weights.any_active():
        return None, parts
    outs_t = enc.encode(s_t)
    outs_tk = enc.encode(s_tk)
    refs: dict[int, Tensor] = {}
    poss: dict[int, Tensor] = {}
    total: Tensor | None = None
    for (N, M), w in weights.items():
        if w <= 0:
            continue
        if N not in refs:
            refs[N] = project_with_action(heads, outs_t, actions_onehot, N, use_action=use_action)
        if M not in poss:
            poss[M] = project_future(heads, outs_tk, M)
        ref, pos = _pair_to_layout(refs[N], poss[M])
        loss = nce_loss(score_matrix(ref, pos, clip_val))
        parts[f"loss_dim_{N}t{M}"] = loss.item()
        weighted = T.mul(loss, w)
        total = weighted if total is None else T.add(total, weighted)
    return total, parts


def learned_ratio_table(model: ChainModel, K: int) -> tuple[np.ndarray, RatioModel]:
    """Evaluate the chain scorer on all K x K one-hot pairs.

    Returns (raw score table, row-softmax pairing matrix); row i gives the
    predicted distribution over successors of state i.
    """
    eye = np.eye(K)
    with T.no_grad():
        scores = model.pair_scores(eye, eye).data.copy()
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    pairing = e / e.sum(axis=1, keepdims=True)
    return scores, RatioModel(values=pairing, support=np.ones_like(pairing, dtype=bool))

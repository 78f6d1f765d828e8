"""One training step: sample replay, compute the RL and contrastive losses,
apply gradients, soft-update the target network.

Variants: c51_only disables the contrastive path entirely; driml_fix uses a
constant lookahead k; driml_randk draws k uniformly from {1..H};
driml_noact is driml_fix with a zeroed action pathway; driml_ada samples k
from the adaptive continue matrix.  The two update modes are a single
summed loss (default) or sequential per-objective gradient applications.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from .. import adaptivek
from ..encoder import ConvEncoder, DimHeads
from ..infomax import DimWeights, composite_dim_loss
from ..nn import tensor as T
from ..nn.optim import soft_update
from .c51 import c51_loss
from .replay import ReplayBuffer, SampleRef
from .support import SupportGrid

VARIANTS = ("c51_only", "driml_fix", "driml_randk", "driml_noact", "driml_ada")


@dataclass(frozen=True)
class AgentVariant:
    kind: str = "driml_fix"
    k: int = 1
    horizon: int = 5

    def __post_init__(self):
        if self.kind not in VARIANTS:
            raise ValueError(f"unknown variant {self.kind!r}, expected one of {VARIANTS}")
        if self.k < 1 or self.horizon < 1:
            raise ValueError("k and horizon must be >= 1")

    @property
    def uses_dim(self) -> bool:
        return self.kind != "c51_only"

    @property
    def uses_action(self) -> bool:
        return self.kind != "driml_noact"


class Networks:
    """Online encoder, frozen-copy target encoder, and the projection heads."""

    def __init__(self, online: ConvEncoder, heads: DimHeads):
        self.online = online
        self.heads = heads
        self.target = copy.deepcopy(online)
        for p in self.target.parameters():
            p.requires_grad = False

    def trainable_parameters(self):
        return self.online.parameters() + self.heads.parameters()


def select_ks(
    variant: AgentVariant,
    refs: list[SampleRef],
    odds_model: adaptivek.ActionOddsModel | None,
    rng: np.random.Generator,
) -> np.ndarray:
    """Per-item lookahead offsets, each clipped to the episode's remaining length."""
    ks = np.empty(len(refs), dtype=np.intp)
    if variant.kind in ("driml_fix", "driml_noact"):
        for i, ref in enumerate(refs):
            ks[i] = min(variant.k, ref.max_k)
    elif variant.kind == "driml_randk":
        for i, ref in enumerate(refs):
            hi = min(variant.horizon, ref.max_k)
            ks[i] = int(rng.integers(1, hi + 1))
    elif variant.kind == "driml_ada":
        if odds_model is None:
            raise ValueError("driml_ada requires an ActionOddsModel")
        A = odds_model.continue_matrix()
        for i, ref in enumerate(refs):
            hi = min(variant.horizon, ref.max_k)
            k = adaptivek.sample_k(A, ref.action_window, hi, rng)
            ks[i] = min(k, ref.max_k)
    else:
        raise ValueError(f"variant {variant.kind} does not select k")
    return ks


def _onehot(actions: np.ndarray, n_actions: int) -> np.ndarray:
    out = np.zeros((actions.shape[0], n_actions))
    out[np.arange(actions.shape[0]), actions] = 1.0
    return out


def train_step(
    nets: Networks,
    buffer: ReplayBuffer,
    optimizer,
    variant: AgentVariant,
    weights: DimWeights,
    grid: SupportGrid | None,
    batch_size: int,
    rng_replay: np.random.Generator,
    rng_k: np.random.Generator,
    odds_model: adaptivek.ActionOddsModel | None = None,
    rl_weight: float = 1.0,
    tau: float = 0.95,
    update_mode: str = "summed",
    dim_view_fn=None,
) -> dict:
    """Sample a batch and apply one composite (or sequential) update.

    Returns a metrics record with the component losses and per-batch k
    statistics.
    """
    if len(buffer) == 0:
        raise RuntimeError("replay buffer is empty")
    if update_mode not in ("summed", "sequential"):
        raise ValueError(f"update_mode must be 'summed' or 'sequential', got {update_mode}")
    refs = buffer.sample_refs(batch_size, rng_replay)
    dim_active = variant.uses_dim and weights.any_active()
    ks = select_ks(variant, refs, odds_model, rng_k) if dim_active else None
    batch = buffer.materialize(refs, ks)
    n_actions = nets.online.spec.n_actions
    metrics: dict = {}

    if odds_model is not None and variant.kind == "driml_ada":
        pairs = [(ref.action_window[0], ref.action_window[1]) for ref in refs if ref.action_window.size >= 2]
        odds_model.update(pairs)

    def rl_term():
        if rl_weight <= 0.0 or grid is None:
            return None
        loss = c51_loss(nets.online, nets.target, batch, grid)
        metrics["loss_rl"] = loss.item()
        return T.mul(loss, rl_weight) if rl_weight != 1.0 else loss

    dim_s, dim_sk = batch.s, batch.s_k
    if dim_active and dim_view_fn is not None:
        dim_s, dim_sk = dim_view_fn(batch.s, batch.s_k)

    def dim_term():
        if not dim_active:
            return None
        loss, parts = composite_dim_loss(
            nets.online,
            nets.heads,
            dim_s,
            _onehot(batch.a, n_actions),
            dim_sk,
            weights,
            use_action=variant.uses_action,
        )
        metrics.update(parts)
        return loss

    if update_mode == "summed":
        total = None
        for term in (rl_term(), dim_term()):
            if term is not None:
                total = term if total is None else T.add(total, term)
        if total is not None:
            optimizer.zero_grad()
            total.backward()
            optimizer.step()
    else:
        rl = rl_term()
        if rl is not None:
            optimizer.zero_grad()
            rl.backward()
            optimizer.step()
        if dim_active:
            for (N, M), w in weights.items():
                if w <= 0:
                    continue
                solo = DimWeights(lambda_4t4=0.0, lambda_3t3=0.0, lambda_3t4=0.0, lambda_4t3=0.0)
                setattr(solo, f"lambda_{N}t{M}", w)
                loss, parts = composite_dim_loss(
                    nets.online,
                    nets.heads,
                    dim_s,
                    _onehot(batch.a, n_actions),
                    dim_sk,
                    solo,
                    use_action=variant.uses_action,
                )
                metrics.update(parts)
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()

    if rl_weight > 0.0 and grid is not None:
        soft_update(nets.target.parameters(), nets.online.parameters(), tau)

    if ks is not None:
        metrics["k_mean"] = float(np.mean(ks))
        metrics["k_min"] = int(np.min(ks))
        metrics["k_max"] = int(np.max(ks))
    return metrics

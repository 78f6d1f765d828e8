"""Observation encoders and the contrastive projection heads.

The conv encoder maps image batches onto a feature hierarchy: f3 is the last
conv block's activation map (per-location "local" features), f4 the first
dense layer's activation (the "global" vector), and f5 the value head's
51-atom logits per action.  Projection heads map f3/f4 (optionally fused
with an embedded action) into the shared scoring spaces; the chain model is
the degenerate one-hot setup with an MLP scorer instead of a dot product.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nn import tensor as T
from .nn.layers import Conv2d, Dense, Module
from .nn.tensor import Tensor

N_ATOMS = 51


@dataclass
class EncoderOutputs:
    f3_local: Tensor
    f4_global: Tensor
    f5_value_logits: Tensor


@dataclass(frozen=True)
class ConvTrunkSpec:
    """Architecture declaration for one image preset.

    in_shape is channels-first (c, h, w); channels/kernels/strides describe
    the conv blocks in order.
    """

    in_shape: tuple[int, int, int]
    n_actions: int
    channels: tuple[int, ...] = (32, 64, 64)
    kernels: tuple[int, ...] = (5, 3, 3)
    strides: tuple[int, ...] = (2, 2, 1)
    f4_dim: int = 512
    n_atoms: int = N_ATOMS

    def conv_output_shape(self) -> tuple[int, int, int]:
        c, h, w = self.in_shape
        for ch, k, s in zip(self.channels, self.kernels, self.strides):
            h = (h - k) // s + 1
            w = (w - k) // s + 1
            if h < 1 or w < 1:
                raise ValueError(f"trunk reduces spatial dims below 1: {self}")
            c = ch
        return c, h, w

    def receptive_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Input-pixel coordinates of each f3 location's receptive-field center."""
        stride_prod = 1.0
        offset = 0.0
        _, h, w = self.in_shape
        for k, s in zip(self.kernels, self.strides):
            offset += (k - 1) / 2.0 * stride_prod
            stride_prod *= s
            h = (h - k) // s + 1
            w = (w - k) // s + 1
        rows = offset + stride_prod * np.arange(h)
        cols = offset + stride_prod * np.arange(w)
        return rows, cols


class ConvEncoder(Module):
    def __init__(self, spec: ConvTrunkSpec, rng: np.random.Generator):
        self.spec = spec
        c = spec.in_shape[0]
        self.convs = []
        for ch, k, s in zip(spec.channels, spec.kernels, spec.strides):
            self.convs.append(Conv2d(c, ch, k, s, rng))
            c = ch
        d3, lh, lw = spec.conv_output_shape()
        self.f3_shape = (d3, lh, lw)
        self.fc = Dense(d3 * lh * lw, spec.f4_dim, rng)
        self.value_head = Dense(spec.f4_dim, spec.n_actions * spec.n_atoms, rng)

    def encode(self, obs_batch) -> EncoderOutputs:
        """obs_batch is (b, h, w, c) channels-last, matching the env layout."""
        x = obs_batch.data if isinstance(obs_batch, Tensor) else np.asarray(obs_batch, dtype=np.float64)
        expected = self.spec.in_shape
        if x.ndim != 4 or (x.shape[3], x.shape[1], x.shape[2]) != expected:
            raise ValueError(
                f"observation batch {x.shape} does not match encoder input "
                f"(c, h, w) = {expected}"
            )
        h = Tensor(np.ascontiguousarray(x.transpose(0, 3, 1, 2)))
        for conv in self.convs:
            h = T.relu(conv(h))
        f3 = h
        flat = T.reshape(f3, (x.shape[0], -1))
        f4 = T.relu(self.fc(flat))
        logits = self.value_head(f4)
        f5 = T.reshape(logits, (x.shape[0], self.spec.n_actions, self.spec.n_atoms))
        return EncoderOutputs(f3_local=f3, f4_global=f4, f5_value_logits=f5)


@dataclass(frozen=True)
class DimHeadSpec:
    d3: int
    f4_dim: int
    n_actions: int
    action_dim: int = 64
    local_dim: int = 128
    global_dim: int = 128
    hidden: int = 512
    local_hidden: int = 128


class DimHeads(Module):
    """Projection heads: psi_* consume the embedded action, phi_* do not.

    The global heads are single-hidden-layer MLPs with a linear skip from
    input to output; the local heads are 1x1-conv stacks applied per
    location, the action embedding tiled over the location grid.
    """

    def __init__(self, spec: DimHeadSpec, rng: np.random.Generator):
        self.spec = spec
        self.psi_a = Dense(spec.n_actions, spec.action_dim, rng)
        self.psi3_h = Conv2d(spec.d3 + spec.action_dim, spec.local_hidden, 1, 1, rng)
        self.psi3_o = Conv2d(spec.local_hidden, spec.local_dim, 1, 1, rng)
        self.phi3_h = Conv2d(spec.d3, spec.local_hidden, 1, 1, rng)
        self.phi3_o = Conv2d(spec.local_hidden, spec.local_dim, 1, 1, rng)
        self.psi4_h = Dense(spec.f4_dim + spec.action_dim, spec.hidden, rng)
        self.psi4_o = Dense(spec.hidden, spec.global_dim, rng)
        self.psi4_skip = Dense(spec.f4_dim + spec.action_dim, spec.global_dim, rng, bias=False)
        self.phi4_h = Dense(spec.f4_dim, spec.hidden, rng)
        self.phi4_o = Dense(spec.hidden, spec.global_dim, rng)
        self.phi4_skip = Dense(spec.f4_dim, spec.global_dim, rng, bias=False)

    def embed_action(self, actions_onehot, use_action: bool) -> Tensor:
        a = actions_onehot.data if isinstance(actions_onehot, Tensor) else np.asarray(actions_onehot, dtype=np.float64)
        if a.ndim != 2 or a.shape[1] != self.spec.n_actions:
            raise ValueError(f"actions must be one-hot (batch, {self.spec.n_actions}), got {a.shape}")
        if not use_action:
            return Tensor(np.zeros((a.shape[0], self.spec.action_dim)))
        return self.psi_a(Tensor(a))


def project_with_action(
    heads: DimHeads,
    outs: EncoderOutputs,
    actions_onehot,
    level: int,
    use_action: bool = True,
) -> Tensor:
    """Map reference features (with the embedded action) into the scoring space.

    Level 3 returns (b, L, lh, lw); level 4 returns (b, G).
    """
    emb = heads.embed_action(actions_onehot, use_action)
    if level == 3:
        tiled = T.tile_hw(emb, outs.f3_local.shape[2], outs.f3_local.shape[3])
        x = T.concat([outs.f3_local, tiled], axis=1)
        return heads.psi3_o(T.relu(heads.psi3_h(x)))
    if level == 4:
        x = T.concat([outs.f4_global, emb], axis=1)
        h = T.relu(heads.psi4_h(x))
        return T.add(heads.psi4_o(h), heads.psi4_skip(x))
    raise ValueError(f"level must be 3 or 4, got {level}")


def project_future(heads: DimHeads, outs: EncoderOutputs, level: int) -> Tensor:
    """Map future-state features into the scoring space, no action pathway."""
    if level == 3:
        return heads.phi3_o(T.relu(heads.phi3_h(outs.f3_local)))
    if level == 4:
        h = T.relu(heads.phi4_h(outs.f4_global))
        return T.add(heads.phi4_o(h), heads.phi4_skip(outs.f4_global))
    raise ValueError(f"level must be 3 or 4, got {level}")


class ChainModel(Module):
    """One-hot state encoders plus an MLP scoring head for the walk experiment.

    pair_scores computes the full n x m score table between reference states
    and candidate next states; scores are soft-clipped to +-clip_val.
    """

    def __init__(self, K: int, rng: np.random.Generator, hidden: int = 64, embed: int = 64, clip_val: float = 20.0):
        self.K = K
        self.clip_val = clip_val
        self.psi_h = Dense(K, hidden, rng)
        self.psi_o = Dense(hidden, embed, rng)
        self.phi_h = Dense(K, hidden, rng)
        self.phi_o = Dense(hidden, embed, rng)
        self.score_h = Dense(2 * embed, hidden, rng)
        self.score_o = Dense(hidden, 1, rng)

    def embed_reference(self, onehots) -> Tensor:
        x = Tensor(np.asarray(onehots, dtype=np.float64))
        return self.psi_o(T.relu(self.psi_h(x)))

    def embed_future(self, onehots) -> Tensor:
        x = Tensor(np.asarray(onehots, dtype=np.float64))
        return self.phi_o(T.relu(self.phi_h(x)))

    def pair_scores(self, ref_onehots, pos_onehots) -> Tensor:
        ref = self.embed_reference(ref_onehots)
        pos = self.embed_future(pos_onehots)
        n, m = ref.shape[0], pos.shape[0]
        ref_rep = T.repeat_axis(ref, m, axis=0)
        pos_rep = T.tile_axis0(pos, n)
        pairs = T.concat([ref_rep, pos_rep], axis=1)
        raw = self.score_o(T.relu(self.score_h(pairs)))
        return T.tanh_clip(T.reshape(raw, (n, m)), self.clip_val)

"""SGD and Adam with global-norm gradient clipping, plus target soft updates."""

from __future__ import annotations

import numpy as np

from .tensor import Parameter


def clip_global_norm(params: list[Parameter], max_norm: float) -> float:
    """Scale all gradients so their joint l2 norm is at most max_norm.

    Returns the pre-clip norm.  Parameters without gradients are ignored.
    """
    grads = [p.grad for p in params if p.grad is not None]
    if not grads:
        return 0.0
    total = float(np.sqrt(sum(float((g * g).sum()) for g in grads)))
    if max_norm is not None and total > max_norm and total > 0.0:
        scale = max_norm / total
        for g in grads:
            g *= scale
    return total


class SGD:
    def __init__(self, params: list[Parameter], lr: float, clip_norm: float | None = None):
        if lr <= 0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        self.params = list(params)
        self.lr = lr
        self.clip_norm = clip_norm
        self.step_count = 0

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None

    def step(self) -> None:
        if self.clip_norm is not None:
            clip_global_norm(self.params, self.clip_norm)
        for p in self.params:
            if p.grad is not None:
                p.data = p.data - self.lr * p.grad
        self.step_count += 1


class Adam:
    def __init__(
        self,
        params: list[Parameter],
        lr: float,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        clip_norm: float | None = None,
    ):
        if lr <= 0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.clip_norm = clip_norm
        self.step_count = 0
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None

    def step(self) -> None:
        if self.clip_norm is not None:
            clip_global_norm(self.params, self.clip_norm)
        self.step_count += 1
        b1t = 1.0 - self.beta1**self.step_count
        b2t = 1.0 - self.beta2**self.step_count
        for p, m, v in zip(self.params, self._m, self._v):
            if p.grad is None:
                continue
            m *= self.beta1
            m += (1.0 - self.beta1) * p.grad
            v *= self.beta2
            v += (1.0 - self.beta2) * (p.grad * p.grad)
            p.data = p.data - self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)


def soft_update(target_params: list[Parameter], online_params: list[Parameter], tau: float) -> None:
    """target <- tau * target + (1 - tau) * online, elementwise per parameter."""
    if len(target_params) != len(online_params):
        raise ValueError(
            f"parameter list length mismatch: {len(target_params)} vs {len(online_params)}"
        )
    for i, (t, o) in enumerate(zip(target_params, online_params)):
        if t.data.shape != o.data.shape:
            raise ValueError(f"shape mismatch at parameter {i}: {t.data.shape} vs {o.data.shape}")
        t.data = tau * t.data + (1.0 - tau) * o.data

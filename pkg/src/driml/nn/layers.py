"""Layers and the module container used by all learned components."""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .tensor import Parameter, Tensor


class Module:
    """Container tracking Parameters through attributes, lists, and sub-modules."""

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def named_parameters(self, prefix: str = "") -> list[tuple[str, Parameter]]:
        out: list[tuple[str, Parameter]] = []
        for key, value in vars(self).items():
            name = f"{prefix}{key}"
            out.extend(_collect(name, value))
        return out

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state(self, arrays: dict[str, np.ndarray]) -> None:
        named = dict(self.named_parameters())
        if set(named) != set(arrays):
            missing = set(named) ^ set(arrays)
            raise ValueError(f"state mismatch, differing keys: {sorted(missing)}")
        for name, p in named.items():
            src = np.asarray(arrays[name], dtype=np.float64)
            if src.shape != p.data.shape:
                raise ValueError(f"shape mismatch for {name}: {src.shape} vs {p.data.shape}")
            p.data = src.copy()


def _collect(name: str, value) -> list[tuple[str, Parameter]]:
    if isinstance(value, Parameter):
        return [(name, value)]
    if isinstance(value, Module):
        return value.named_parameters(prefix=name + ".")
    if isinstance(value, (list, tuple)):
        out = []
        for i, item in enumerate(value):
            out.extend(_collect(f"{name}.{i}", item))
        return out
    return []


def _uniform_init(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Dense(Module):
    """Affine map x @ W + b with W of shape (n_in, n_out)."""

    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator, bias: bool = True):
        self.weight = Parameter(_uniform_init(rng, (n_in, n_out), n_in), name="weight")
        self.bias = Parameter(_uniform_init(rng, (n_out,), n_in), name="bias") if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.weight.shape[0]:
            raise ValueError(
                f"dense input {x.shape} does not match weight {self.weight.shape}"
            )
        out = T.matmul(x, self.weight)
        if self.bias is not None:
            out = T.add(out, self.bias)
        return out


class Conv2d(Module):
    """Valid cross-correlation with kernel (c_out, c_in, kh, kw)."""

    def __init__(
        self,
        c_in: int,
        c_out: int,
        kernel: int | tuple[int, int],
        stride: int | tuple[int, int],
        rng: np.random.Generator,
        bias: bool = True,
    ):
        kh, kw = (kernel, kernel) if isinstance(kernel, int) else kernel
        fan_in = c_in * kh * kw
        self.stride = (stride, stride) if isinstance(stride, int) else stride
        self.weight = Parameter(_uniform_init(rng, (c_out, c_in, kh, kw), fan_in), name="weight")
        self.bias = Parameter(_uniform_init(rng, (c_out,), fan_in), name="bias") if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        out = T.conv2d(x, self.weight, self.stride)
        if self.bias is not None:
            out = T.add(out, T.reshape(self.bias, (1, -1, 1, 1)))
        return out

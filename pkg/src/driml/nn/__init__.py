from .tensor import Tensor, Parameter, no_grad, kl_categorical, tanh_clip
from .layers import Module, Dense, Conv2d
from .optim import SGD, Adam, clip_global_norm, soft_update
from .checkpoint import save_checkpoint, load_checkpoint

__all__ = [
    "Tensor",
    "Parameter",
    "no_grad",
    "kl_categorical",
    "tanh_clip",
    "Module",
    "Dense",
    "Conv2d",
    "SGD",
    "Adam",
    "clip_global_norm",
    "soft_update",
    "save_checkpoint",
    "load_checkpoint",
]

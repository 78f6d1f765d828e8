from .support import SupportGrid, categorical_projection
from .replay import ReplayBuffer, TransitionBatch
from .c51 import c51_loss, act, epsilon_by_step, expected_values
from .trainer import AgentVariant, Networks, train_step

__all__ = [
    "SupportGrid",
    "categorical_projection",
    "ReplayBuffer",
    "TransitionBatch",
    "c51_loss",
    "act",
    "epsilon_by_step",
    "expected_values",
    "AgentVariant",
    "Networks",
    "train_step",
]

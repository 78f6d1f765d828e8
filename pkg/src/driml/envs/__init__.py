from .core import StepResult, FrameStack, write_trace, read_trace
from .chain import ChainEnv
from .ising import IsingConfig, IsingEnv
from .pacman import PacManConfig, PacManEnv, DEFAULT_MAP, LETHAL_ALL, parse_map
from .wrappers import ContinualTaskSchedule, IsingWallsOverlay
from .augment import augment

__all__ = [
    "StepResult",
    "FrameStack",
    "write_trace",
    "read_trace",
    "ChainEnv",
    "IsingConfig",
    "IsingEnv",
    "PacManConfig",
    "PacManEnv",
    "DEFAULT_MAP",
    "LETHAL_ALL",
    "parse_map",
    "ContinualTaskSchedule",
    "IsingWallsOverlay",
    "augment",
]

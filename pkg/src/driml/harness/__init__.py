from .config import ExperimentConfig, ConfigError, parse_config, serialize_config
from .rngs import substream
from .run import run
from .compare import compare_runs

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "parse_config",
    "serialize_config",
    "substream",
    "run",
    "compare_runs",
]

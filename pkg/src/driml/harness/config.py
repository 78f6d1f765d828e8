"""Declarative experiment configuration: flat `key = value` text files.

Every schedule constant carries its standard default (exploration 0.1 to
0.01 over 1e5 steps, lr 2.5e-4, gamma 0.99, grad clip 10, 7-step returns,
replay 1e6, soft update 0.95, warmup 1000); presets override budgets and
architecture for the desk-scale experiments.  Unknown keys are rejected
with the offending field named.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field, fields

PRESETS = ("chain", "ising", "pacman-eps", "pacman-continual", "pacman-ising", "analyze")
VARIANTS = ("c51_only", "driml_fix", "driml_randk", "driml_noact", "driml_ada")
UPDATE_MODES = ("summed", "sequential")
LETHAL_CHOICES = ("all", "0", "1", "2", "3")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    # run identity
    preset: str = "chain"
    seed: int = 0
    out_dir: str = "runs/out"

    # schedules and optimizer
    exploration_start: float = 0.1
    exploration_end: float = 0.01
    exploration_decay: int = 100000
    lr: float = 2.5e-4
    gamma: float = 0.99
    clip_grad: float = 10.0
    n_step: int = 7
    replay_size: int = 1000000
    tau: float = 0.95
    warmup: int = 1000
    batch_size: int = 32
    train_every: int = 4
    update_mode: str = "summed"

    # objective weights and variant
    lambda_4t4: float = 1.0
    lambda_3t3: float = 1.0
    lambda_3t4: float = 0.0
    lambda_4t3: float = 0.0
    k: int = 1
    horizon: int = 5
    variant: str = "driml_fix"
    rl_weight: float = 1.0

    # value support
    v_min: float = -10.0
    v_max: float = 50.0

    # chain preset
    chain_K: int = 10
    chain_alpha: float = 0.499
    chain_rollout_steps: int = 30000
    chain_train_steps: int = 12000
    chain_burn_in: int = 1000
    chain_hidden: int = 64
    chain_embed: int = 64

    # exact-analysis preset
    analyze_K: int = 10

    # ising preset
    ising_lattice: int = 84
    ising_patch: int = 42
    ising_beta: float = 2.5
    ising_neighborhood: str = "von_neumann_4"
    ising_episode_len: int = 32
    ising_episodes: int = 200
    ising_epochs: int = 10
    ising_eval_episodes: int = 96

    # pacman presets
    ghost_eps: float = 0.1
    step_cap: int = 500
    boost_duration: int = 10
    lethal_ghost: str = "all"
    task_switch_every: int = 5000
    continual_segments: int = 8
    pacman_env_steps: int = 12000
    eps_grid: list = field(default_factory=lambda: [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])
    frame_stack: int = 4
    ising_walls: bool = False

    # encoder architecture
    conv_channels: list = field(default_factory=lambda: [32, 64, 64])
    conv_kernels: list = field(default_factory=lambda: [5, 3, 3])
    conv_strides: list = field(default_factory=lambda: [2, 2, 1])
    f4_dim: int = 512
    local_dim: int = 128
    global_dim: int = 128
    action_dim: int = 64
    head_hidden: int = 512
    local_hidden: int = 128

    # augmentation of contrastive views
    augment_dim_inputs: bool = False
    augment_crop: float = 0.8
    augment_jitter: float = 0.4

    # logging
    log_every: int = 50
    smoothing_window: int = 100

    def validate(self) -> None:
        if self.preset not in PRESETS:
            raise ConfigError(f"preset: unknown preset {self.preset!r}, expected one of {PRESETS}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant: unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if self.update_mode not in UPDATE_MODES:
            raise ConfigError(f"update_mode: must be one of {UPDATE_MODES}")
        if self.lethal_ghost not in LETHAL_CHOICES:
            raise ConfigError(f"lethal_ghost: must be one of {LETHAL_CHOICES}")
        if not 0.0 < self.chain_alpha < 1.0:
            raise ConfigError(f"chain_alpha: must lie in (0, 1), got {self.chain_alpha}")
        if not 0.0 <= self.ghost_eps <= 1.0:
            raise ConfigError(f"ghost_eps: must lie in [0, 1], got {self.ghost_eps}")
        if self.lr <= 0:
            raise ConfigError(f"lr: must be positive, got {self.lr}")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError(f"gamma: must lie in (0, 1], got {self.gamma}")
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError(f"tau: must lie in [0, 1], got {self.tau}")
        if self.batch_size < 2:
            raise ConfigError(f"batch_size: need at least 2 for in-batch negatives, got {self.batch_size}")
        if self.v_min >= self.v_max:
            raise ConfigError(f"v_min/v_max: need v_min < v_max, got [{self.v_min}, {self.v_max}]")
        if not len(self.conv_channels) == len(self.conv_kernels) == len(self.conv_strides):
            raise ConfigError(
                "conv_channels/conv_kernels/conv_strides: lengths must match, got "
                f"{len(self.conv_channels)}/{len(self.conv_kernels)}/{len(self.conv_strides)}"
            )
        if any(w < 0 for w in (self.lambda_4t4, self.lambda_3t3, self.lambda_3t4, self.lambda_4t3)):
            raise ConfigError("lambda weights must be nonnegative")
        if self.k < 1 or self.horizon < 1:
            raise ConfigError(f"k/horizon: must be >= 1, got k={self.k}, horizon={self.horizon}")
        for name in ("eps_grid",):
            vals = getattr(self, name)
            if any(not 0.0 <= v <= 1.0 for v in vals):
                raise ConfigError(f"{name}: entries must lie in [0, 1], got {vals}")


_LIST_ELEM_TYPES = {
    "eps_grid": float,
    "conv_channels": int,
    "conv_kernels": int,
    "conv_strides": int,
}


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(name: str, text: str, typ):
    text = text.strip()
    try:
        if typ is bool:
            if text.lower() in ("true", "1", "yes"):
                return True
            if text.lower() in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if typ is int:
            return int(text)
        if typ is float:
            return float(text)
        if typ is str:
            return text
        if typ is list:
            elem = _LIST_ELEM_TYPES[name]
            if not text:
                return []
            return [elem(part.strip()) for part in text.split(",")]
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{name}: cannot parse {text!r} ({exc})") from exc
    raise ConfigError(f"{name}: unsupported field type {typ}")


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = []
    for f in fields(cfg):
        lines.append(f"{f.name} = {_format_value(getattr(cfg, f.name))}")
    return "\n".join(lines) + "\n"


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    cfg = dataclasses.replace(base) if base is not None else ExperimentConfig()
    known = {f.name: f for f in fields(cfg)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        name, _, value = line.partition("=")
        name = name.strip()
        if name not in known:
            raise ConfigError(f"line {lineno}: unknown key {name!r}")
        f = known[name]
        typ = f.type if isinstance(f.type, type) else {"int": int, "float": float, "str": str, "bool": bool, "list": list}[f.type]
        setattr(cfg, name, _parse_value(name, value, typ))
    return cfg


def load_config(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), base=base)


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()

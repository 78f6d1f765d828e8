"""Desk-scale preset configurations for the experiment suite.

Budgets are sized so the whole suite stays in CPU-hours territory; every
value here is an ordinary config field and can be overridden from a config
file.  The image presets declare lighter conv trunks than the package-wide
default architecture to fit the budget.
"""

from __future__ import annotations

import dataclasses

from .config import ExperimentConfig


def preset_config(name: str) -> ExperimentConfig:
    builders = {
        "chain": _chain,
        "ising": _ising,
        "pacman-eps": _pacman_eps,
        "pacman-continual": _pacman_continual,
        "pacman-ising": _pacman_ising,
        "analyze": _analyze,
    }
    if name not in builders:
        raise ValueError(f"unknown preset {name!r}, expected one of {sorted(builders)}")
    return builders[name]()


def _chain() -> ExperimentConfig:
    return ExperimentConfig(
        preset="chain",
        lr=1e-3,
        rl_weight=0.0,
        variant="driml_fix",
        k=1,
        lambda_4t4=1.0,
        lambda_3t3=0.0,
        chain_K=10,
        chain_alpha=0.499,
        chain_rollout_steps=30000,
        chain_train_steps=12000,
        log_every=50,
    )


def _ising() -> ExperimentConfig:
    return ExperimentConfig(
        preset="ising",
        lr=5e-4,
        rl_weight=0.0,
        variant="driml_noact",
        k=1,
        lambda_4t4=0.0,
        lambda_3t3=1.0,
        conv_channels=[16, 32],
        conv_kernels=[8, 3],
        conv_strides=[4, 1],
        f4_dim=256,
        local_dim=64,
        global_dim=64,
        local_hidden=64,
        head_hidden=256,
        action_dim=8,
        batch_size=32,
        log_every=20,
    )


def _pacman_desk_base() -> ExperimentConfig:
    return ExperimentConfig(
        preset="pacman-continual",
        variant="driml_fix",
        k=1,
        lambda_4t4=1.0,
        lambda_3t3=1.0,
        conv_channels=[16, 32],
        conv_kernels=[8, 3],
        conv_strides=[4, 1],
        f4_dim=256,
        local_dim=64,
        global_dim=64,
        local_hidden=64,
        head_hidden=256,
        replay_size=100000,
        warmup=1000,
        train_every=4,
        v_min=-10.0,
        v_max=50.0,
        log_every=50,
    )


def _pacman_eps() -> ExperimentConfig:
    cfg = _pacman_desk_base()
    return dataclasses.replace(
        cfg,
        preset="pacman-eps",
        pacman_env_steps=12000,
        step_cap=300,
        lethal_ghost="all",
    )


def _pacman_continual() -> ExperimentConfig:
    cfg = _pacman_desk_base()
    return dataclasses.replace(
        cfg,
        preset="pacman-continual",
        lr=1e-3,
        task_switch_every=300,
        continual_segments=8,
        step_cap=150,
        ghost_eps=0.1,
        exploration_decay=20000,
        smoothing_window=100,
    )


def _pacman_ising() -> ExperimentConfig:
    cfg = _pacman_continual()
    return dataclasses.replace(
        cfg,
        preset="pacman-ising",
        ising_walls=True,
        continual_segments=4,
    )


def _analyze() -> ExperimentConfig:
    return ExperimentConfig(preset="analyze", analyze_K=10)

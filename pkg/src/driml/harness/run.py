"""Preset execution: training loops, artifact emission, and determinism plumbing."""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .. import markov
from ..adaptivek import ActionOddsModel
from ..agent import AgentVariant, Networks, ReplayBuffer, SupportGrid, act, epsilon_by_step, train_step
from ..encoder import ChainModel, ConvEncoder, ConvTrunkSpec, DimHeads, DimHeadSpec
from ..envs import (
    ChainEnv,
    ContinualTaskSchedule,
    FrameStack,
    IsingConfig,
    IsingEnv,
    IsingWallsOverlay,
    PacManConfig,
    PacManEnv,
    LETHAL_ALL,
    augment,
)
from ..encoder import project_future, project_with_action
from ..infomax import (
    DimWeights,
    composite_dim_loss,
    diagonal_scores,
    learned_ratio_table,
    nce_loss,
    score_matrix,
)
from ..nn import tensor as T
from ..nn.checkpoint import save_checkpoint
from ..nn.optim import Adam
from .config import ConfigError, ExperimentConfig, serialize_config
from .manifest import RunManifest
from .metrics import MetricsWriter, read_metrics
from .rngs import child_seed, substream


def run(cfg: ExperimentConfig, out_dir: str | None = None) -> int:
    """Execute one preset; returns the process exit code (0 ok, 1 config, 2 runtime)."""
    try:
        cfg = dataclasses.replace(cfg)
        if out_dir is not None:
            cfg.out_dir = out_dir
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}")
        return 1
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.txt", "w", encoding="utf-8") as fh:
        fh.write(serialize_config(cfg))
    manifest = RunManifest(out, cfg)
    manifest.add_artifact("config.txt")
    try:
        runner = {
            "analyze": run_analyze,
            "chain": run_chain,
            "ising": run_ising,
            "pacman-eps": run_pacman_eps,
            "pacman-continual": run_pacman_continual,
            "pacman-ising": run_pacman_continual,
        }[cfg.preset]
        artifacts = runner(cfg, out)
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit code 2
        manifest.finalize(status=f"failed: {exc}")
        print(f"runtime error: {exc}")
        return 2
    for name in artifacts:
        manifest.add_artifact(name)
    manifest.finalize()
    return 0


def alpha_grid() -> np.ndarray:
    """0.05 .. 0.95 in steps of 0.05, with the singular 0.5 point moved to 0.499."""
    grid = np.round(np.arange(1, 20) * 0.05, 10)
    grid[grid == 0.5] = 0.499
    return grid


def run_analyze(cfg: ExperimentConfig, out: Path) -> list[str]:
    K = cfg.analyze_K
    artifacts = []
    rows = []
    for a in alpha_grid():
        Tm = markov.random_walk_chain(K, float(a))
        rho = markov.stationary_distribution(Tm)
        mi = markov.mi_consecutive(Tm, rho, 0)
        summary = markov.spectral_summary(Tm)
        rows.append((float(a), mi, 1.0 / summary.gap))
    with open(out / "alpha_curves.csv", "w", encoding="utf-8") as fh:
        fh.write("alpha,mi,inv_gap\n")
        for a, mi, ig in rows:
            fh.write(f"{a:.17g},{mi:.17g},{ig:.17g}\n")
    artifacts.append("alpha_curves.csv")

    Tm = markov.random_walk_chain(K, 0.499)
    rho = markov.stationary_distribution(Tm)
    markov.save_matrix(out / "transition.csv", Tm)
    markov.save_matrix(out / "stationary.csv", rho)
    markov.save_matrix(out / "ratio_true.csv", markov.limiting_ratio(Tm, rho))
    artifacts += ["transition.csv", "stationary.csv", "ratio_true.csv"]
    return artifacts


def run_chain(cfg: ExperimentConfig, out: Path) -> list[str]:
    env = ChainEnv(cfg.chain_K, cfg.chain_alpha, seed=child_seed(cfg.seed, "env"))
    rng_init = substream(cfg.seed, "init")
    rng_replay = substream(cfg.seed, "replay")
    model = ChainModel(cfg.chain_K, rng_init, hidden=cfg.chain_hidden, embed=cfg.chain_embed)
    opt = Adam(model.parameters(), lr=cfg.lr, clip_norm=cfg.clip_grad)

    env.reset()
    states = np.empty(cfg.chain_rollout_steps + 1, dtype=np.intp)
    states[0] = env.state
    for t in range(cfg.chain_rollout_steps):
        env.step(0)
        states[t + 1] = env.state
    eye = np.eye(cfg.chain_K)

    artifacts = []
    with MetricsWriter(out / "metrics.jsonl") as mw:
        for step in range(cfg.chain_train_steps):
            idx = rng_replay.integers(cfg.chain_burn_in, cfg.chain_rollout_steps, size=cfg.batch_size)
            s_t = eye[states[idx]]
            s_t1 = eye[states[idx + 1]]
            scores = model.pair_scores(s_t, s_t1)
            loss = nce_loss(T.reshape(scores, (1, cfg.batch_size, cfg.batch_size)))
            opt.zero_grad()
            loss.backward()
            opt.step()
            if step % cfg.log_every == 0 or step == cfg.chain_train_steps - 1:
                mw.write({"step": step, "loss_nce": loss.item()})
    artifacts.append("metrics.jsonl")

    scores, pairing = learned_ratio_table(model, cfg.chain_K)
    markov.save_matrix(out / "scores_learned.csv", scores)
    markov.save_matrix(out / "pairing_learned.csv", pairing.values)
    artifacts += ["scores_learned.csv", "pairing_learned.csv"]

    Tm = env.transition_matrix
    rho = markov.stationary_distribution(Tm)
    markov.save_matrix(out / "transition.csv", Tm)
    markov.save_matrix(out / "stationary.csv", rho)
    markov.save_matrix(out / "ratio_true.csv", markov.limiting_ratio(Tm, rho))
    artifacts += ["transition.csv", "stationary.csv", "ratio_true.csv"]

    rows = []
    for a in alpha_grid():
        Ta = markov.random_walk_chain(cfg.chain_K, float(a))
        rows.append(
            (
                float(a),
                markov.mi_consecutive(Ta, markov.stationary_distribution(Ta), 0),
                1.0 / markov.spectral_summary(Ta).gap,
            )
        )
    with open(out / "alpha_curves.csv", "w", encoding="utf-8") as fh:
        fh.write("alpha,mi,inv_gap\n")
        for a, mi, ig in rows:
            fh.write(f"{a:.17g},{mi:.17g},{ig:.17g}\n")
    artifacts.append("alpha_curves.csv")

    save_checkpoint(out / "model.ckpt", model.state_arrays())
    artifacts.append("model.ckpt")
    return artifacts


def _ising_encoder(cfg: ExperimentConfig, rng_init: np.random.Generator) -> tuple[ConvEncoder, DimHeads]:
    spec = ConvTrunkSpec(
        in_shape=(1, cfg.ising_lattice, cfg.ising_lattice),
        n_actions=1,
        channels=tuple(cfg.conv_channels),
        kernels=tuple(cfg.conv_kernels),
        strides=tuple(cfg.conv_strides),
        f4_dim=cfg.f4_dim,
    )
    enc = ConvEncoder(spec, rng_init)
    heads = DimHeads(
        DimHeadSpec(
            d3=spec.conv_output_shape()[0],
            f4_dim=cfg.f4_dim,
            n_actions=1,
            action_dim=cfg.action_dim,
            local_dim=cfg.local_dim,
            global_dim=cfg.global_dim,
            hidden=cfg.head_hidden,
            local_hidden=cfg.local_hidden,
        ),
        rng_init,
    )
    return enc, heads


def _collect_ising_episodes(cfg: ExperimentConfig, seed: int, n_episodes: int, upto: int | None = None):
    env = IsingEnv(
        IsingConfig(
            lattice_side=cfg.ising_lattice,
            patch_side=cfg.ising_patch,
            inv_temperature_beta=cfg.ising_beta,
            neighborhood=cfg.ising_neighborhood,
            episode_len=cfg.ising_episode_len,
        ),
        seed=seed,
    )
    episodes = []
    horizon = cfg.ising_episode_len if upto is None else upto
    for _ in range(n_episodes):
        frames = [env.reset()]
        for _ in range(horizon):
            res = env.step()
            frames.append(res.observation)
        episodes.append({"frames": np.stack(frames), "patch": env.patch_bounds})
    return episodes


def run_ising(cfg: ExperimentConfig, out: Path) -> list[str]:
    rng_init = substream(cfg.seed, "init")
    rng_replay = substream(cfg.seed, "replay")
    enc, heads = _ising_encoder(cfg, rng_init)
    opt = Adam(enc.parameters() + heads.parameters(), lr=cfg.lr, clip_norm=cfg.clip_grad)
    weights = DimWeights(cfg.lambda_4t4, cfg.lambda_3t3, cfg.lambda_3t4, cfg.lambda_4t3)

    episodes = _collect_ising_episodes(cfg, child_seed(cfg.seed, "env"), cfg.ising_episodes)
    pairs = [
        (e, t)
        for e in range(len(episodes))
        for t in range(cfg.ising_episode_len)
    ]
    artifacts = []
    with MetricsWriter(out / "metrics.jsonl") as mw:
        step = 0
        for epoch in range(cfg.ising_epochs):
            order = rng_replay.permutation(len(pairs))
            for lo in range(0, len(order) - cfg.batch_size + 1, cfg.batch_size):
                chosen = [pairs[i] for i in order[lo : lo + cfg.batch_size]]
                s_t = np.stack([episodes[e]["frames"][t] for e, t in chosen])
                s_t1 = np.stack([episodes[e]["frames"][t + 1] for e, t in chosen])
                actions = np.ones((cfg.batch_size, 1))
                loss, parts = composite_dim_loss(enc, heads, s_t, actions, s_t1, weights, use_action=False)
                opt.zero_grad()
                loss.backward()
                opt.step()
                if step % cfg.log_every == 0:
                    mw.write({"epoch": epoch, "step": step, **{k: v for k, v in parts.items()}})
                step += 1
    artifacts.append("metrics.jsonl")

    stats, heatmaps = evaluate_ising_scores(cfg, enc, heads, seed=child_seed(cfg.seed, "eval"))
    with open(out / "score_stats.json", "w", encoding="utf-8") as fh:
        json.dump(stats, fh, indent=2)
        fh.write("\n")
    artifacts.append("score_stats.json")
    for i, hm in enumerate(heatmaps[:3]):
        markov.save_matrix(out / f"score_heatmap_{i}.csv", hm)
        artifacts.append(f"score_heatmap_{i}.csv")
    save_checkpoint(out / "model.ckpt", {**{f"enc.{k}": v for k, v in enc.state_arrays().items()}, **{f"heads.{k}": v for k, v in heads.state_arrays().items()}})
    artifacts.append("model.ckpt")
    return artifacts


def evaluate_ising_scores(cfg: ExperimentConfig, enc: ConvEncoder, heads: DimHeads, seed: int):
    """Score the t=2 -> t=3 transition per location over an eval batch.

    Returns aggregate inside/outside statistics plus per-episode heatmaps of
    diagonal scores.
    """
    episodes = _collect_ising_episodes(cfg, seed, cfg.ising_eval_episodes, upto=3)
    s2 = np.stack([ep["frames"][2] for ep in episodes])
    s3 = np.stack([ep["frames"][3] for ep in episodes])
    actions = np.ones((len(episodes), 1))
    with T.no_grad():
        outs2 = enc.encode(s2)
        outs3 = enc.encode(s3)
        ref = project_with_action(heads, outs2, actions, 3, use_action=False)
        pos = project_future(heads, outs3, 3)
        scores = score_matrix(ref, pos)
    diag = diagonal_scores(scores)  # (locs, batch)
    _, lh, lw = enc.f3_shape
    rows, cols = enc.spec.receptive_centers()
    inside_vals, outside_vals = [], []
    heatmaps = []
    for b, ep in enumerate(episodes):
        r0, r1, c0, c1 = ep["patch"]
        grid = diag[:, b].reshape(lh, lw)
        heatmaps.append(grid)
        in_rows = (rows >= r0) & (rows <= r1)
        in_cols = (cols >= c0) & (cols <= c1)
        inside_mask = np.outer(in_rows, in_cols)
        inside_vals.extend(grid[inside_mask].tolist())
        outside_vals.extend(grid[~inside_mask].tolist())
    inside = np.asarray(inside_vals)
    outside = np.asarray(outside_vals)
    n_in, n_out = inside.size, outside.size
    pooled_sd = float(
        np.sqrt(
            ((n_in - 1) * inside.var(ddof=1) + (n_out - 1) * outside.var(ddof=1))
            / (n_in + n_out - 2)
        )
    )
    stats = {
        "mean_inside": float(inside.mean()),
        "mean_outside": float(outside.mean()),
        "pooled_sd": pooled_sd,
        "separation_sds": float((inside.mean() - outside.mean()) / pooled_sd) if pooled_sd > 0 else float("inf"),
        "n_inside": int(n_in),
        "n_outside": int(n_out),
    }
    return stats, heatmaps


def _pacman_encoder(cfg: ExperimentConfig, rng_init: np.random.Generator, obs_shape, n_actions: int):
    c_in = obs_shape[2]
    spec = ConvTrunkSpec(
        in_shape=(c_in, obs_shape[0], obs_shape[1]),
        n_actions=n_actions,
        channels=tuple(cfg.conv_channels),
        kernels=tuple(cfg.conv_kernels),
        strides=tuple(cfg.conv_strides),
        f4_dim=cfg.f4_dim,
    )
    enc = ConvEncoder(spec, rng_init)
    heads = DimHeads(
        DimHeadSpec(
            d3=spec.conv_output_shape()[0],
            f4_dim=cfg.f4_dim,
            n_actions=n_actions,
            action_dim=cfg.action_dim,
            local_dim=cfg.local_dim,
            global_dim=cfg.global_dim,
            hidden=cfg.head_hidden,
            local_hidden=cfg.local_hidden,
        ),
        rng_init,
    )
    return enc, heads


def _build_pacman_env(cfg: ExperimentConfig, seed: int, ghost_eps: float, continual: bool):
    pcfg = PacManConfig(
        ghost_random_prob_eps=ghost_eps,
        lethal_ghost_index=LETHAL_ALL if cfg.lethal_ghost == "all" else int(cfg.lethal_ghost),
        boost_duration=cfg.boost_duration,
        task_switch_every=cfg.task_switch_every,
        ising_walls=cfg.ising_walls,
        step_cap=cfg.step_cap,
    )
    env = PacManEnv(pcfg, seed=seed)
    if cfg.ising_walls:
        env = IsingWallsOverlay(env, seed=child_seed(seed, "overlay"), beta=cfg.ising_beta)
    if continual:
        env = ContinualTaskSchedule(env, cfg.task_switch_every)
    return FrameStack(env, n_frames=cfg.frame_stack, scale=2)


def _agent_loop_state(cfg: ExperimentConfig, env):
    rng_init = substream(cfg.seed, "init")
    enc, heads = _pacman_encoder(cfg, rng_init, env.observation_shape, env.n_actions)
    nets = Networks(enc, heads)
    opt = Adam(nets.trainable_parameters(), lr=cfg.lr, clip_norm=cfg.clip_grad)
    buffer = ReplayBuffer(cfg.replay_size, n_step=cfg.n_step, gamma=cfg.gamma, horizon=cfg.horizon)
    variant = AgentVariant(cfg.variant, k=cfg.k, horizon=cfg.horizon)
    weights = DimWeights(cfg.lambda_4t4, cfg.lambda_3t3, cfg.lambda_3t4, cfg.lambda_4t3)
    grid = SupportGrid(cfg.v_min, cfg.v_max)
    odds = ActionOddsModel(env.n_actions) if cfg.variant == "driml_ada" else None
    return nets, opt, buffer, variant, weights, grid, odds


def _maybe_augment(cfg: ExperimentConfig, batch, rng_augment: np.random.Generator):
    if not cfg.augment_dim_inputs or batch.s_k is None:
        return batch
    s = np.stack([augment(o, cfg.augment_crop, cfg.augment_jitter, rng_augment) for o in batch.s])
    s_k = np.stack([augment(o, cfg.augment_crop, cfg.augment_jitter, rng_augment) for o in batch.s_k])
    return dataclasses.replace(batch, s=s, s_k=s_k)


def _train_pacman(cfg: ExperimentConfig, env, out: Path, stop: dict) -> list[str]:
    """Shared acting/training loop for the image agents.

    stop: {"env_steps": n} or {"episodes": n}.
    """
    nets, opt, buffer, variant, weights, grid, odds = _agent_loop_state(cfg, env)
    rng_act = substream(cfg.seed, "act")
    rng_replay = substream(cfg.seed, "replay")
    rng_k = substream(cfg.seed, "k_sampler")

    episode = 0
    env_step = 0
    artifacts = []
    a_dumps = 0
    with MetricsWriter(out / "metrics.jsonl") as mw, MetricsWriter(out / "episodes.jsonl") as ew:
        while True:
            if "episodes" in stop and episode >= stop["episodes"]:
                break
            if "env_steps" in stop and env_step >= stop["env_steps"]:
                break
            obs = env.reset()
            buffer.start_episode(obs)
            ep_return = 0.0
            ep_steps = 0
            task_id = getattr(env, "task_id", 0)
            terminal = False
            truncated = False
            while not terminal:
                eps = epsilon_by_step(env_step, cfg.exploration_start, cfg.exploration_end, cfg.exploration_decay)
                action = act(nets.online, obs, eps, rng_act, grid)
                res = env.step(action)
                buffer.append(action, res.reward, res.observation)
                obs = res.observation
                ep_return += res.reward
                ep_steps += 1
                env_step += 1
                terminal = res.terminal
                truncated = bool(res.info.get("truncated", False))
                if env_step >= cfg.warmup and env_step % cfg.train_every == 0:
                    metrics = train_step(
                        nets,
                        buffer,
                        opt,
                        variant,
                        weights,
                        grid,
                        cfg.batch_size,
                        rng_replay,
                        rng_k,
                        odds_model=odds,
                        rl_weight=cfg.rl_weight,
                        tau=cfg.tau,
                        update_mode=cfg.update_mode,
                    )
                    if opt.step_count % cfg.log_every == 0:
                        dim_total = sum(v * w for (n, m), w in weights.items() for k2, v in metrics.items() if k2 == f"loss_dim_{n}t{m}")
                        mw.write(
                            {
                                "step": env_step,
                                "episode": episode,
                                "epsilon": eps,
                                "loss_dim_total": dim_total,
                                **metrics,
                            }
                        )
                        if odds is not None:
                            markov.save_matrix(out / "a_matrix.csv", odds.continue_matrix())
                            a_dumps += 1
                if "env_steps" in stop and env_step >= stop["env_steps"]:
                    break
            buffer.end_episode(terminal=terminal and not truncated)
            ew.write(
                {
                    "episode": episode,
                    "return": ep_return,
                    "steps": ep_steps,
                    "task_id": task_id,
                    "env_step": env_step,
                }
            )
            episode += 1
    artifacts += ["metrics.jsonl", "episodes.jsonl"]
    if odds is not None and a_dumps:
        artifacts.append("a_matrix.csv")
    save_checkpoint(
        out / "model.ckpt",
        {
            **{f"online.{k}": v for k, v in nets.online.state_arrays().items()},
            **{f"heads.{k}": v for k, v in nets.heads.state_arrays().items()},
        },
    )
    artifacts.append("model.ckpt")
    return artifacts


def run_pacman_eps(cfg: ExperimentConfig, out: Path) -> list[str]:
    artifacts = []
    summary = []
    for i, eps in enumerate(cfg.eps_grid):
        sub = out / f"eps_{i}"
        sub.mkdir(parents=True, exist_ok=True)
        env = _build_pacman_env(cfg, child_seed(cfg.seed, "env"), ghost_eps=float(eps), continual=False)
        sub_artifacts = _train_pacman(cfg, env, sub, stop={"env_steps": cfg.pacman_env_steps})
        artifacts += [f"eps_{i}/{name}" for name in sub_artifacts]
        from .metrics import read_metrics

        records = read_metrics(sub / "metrics.jsonl")
        tail = [r["loss_dim_total"] for r in records[-max(1, cfg.smoothing_window // cfg.log_every) :]]
        summary.append((float(eps), float(np.mean(tail))))
    with open(out / "summary.csv", "w", encoding="utf-8") as fh:
        fh.write("ghost_eps,final_nce\n")
        for eps, v in summary:
            fh.write(f"{eps:.17g},{v:.17g}\n")
    artifacts.append("summary.csv")
    return artifacts


def run_pacman_continual(cfg: ExperimentConfig, out: Path) -> list[str]:
    env = _build_pacman_env(cfg, child_seed(cfg.seed, "env"), ghost_eps=cfg.ghost_eps, continual=True)
    episodes = cfg.continual_segments * cfg.task_switch_every
    return _train_pacman(cfg, env, out, stop={"episodes": episodes})

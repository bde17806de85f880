"""Episode orchestration: run/eval, bench, render, and the training demo.

Episodes are independent given (master seed, episode index), so sharding
over worker processes cannot change results; outputs are merged by
episode index.
"""

from __future__ import annotations

import concurrent.futures
import os
import time
from pathlib import Path
from typing import Optional

import numpy as np

from embodied import episode_log
from embodied.config import EnvConfig
from embodied.envs import make_from_config
from embodied.linear_agent import LinearAgentParams, linear_reference_agent, sgd_update
from embodied.rl import (
    DOMAIN_DISCOUNTS, Trajectory, dual_pg_coefficients, gaussian_logp,
    gaussian_sample, vtrace_targets,
)

AGENTS = ("oracle", "random")


class RandomAgent:
    def __init__(self, env, seed: int, episode: int):
        self.rng = np.random.default_rng([seed % (2**62), episode, 0xA5])
        self.dim = env.action_dim()

    def act(self) -> np.ndarray:
        return self.rng.uniform(-1.0, 1.0, self.dim)


def _make_agent(name: str, env, seed: int, episode: int):
    if name == "oracle":
        from embodied.control import make_oracle
        return make_oracle(env)
    if name == "random":
        return RandomAgent(env, seed, episode)
    raise ValueError(f"unknown agent {name!r}; expected one of {AGENTS}")


def run_episode(config_dict: dict, seed: int, episode: int, agent_name: str,
                collect_log: bool = False) -> tuple[dict, list[str]]:
    config = EnvConfig.from_dict(dict(config_dict))
    config.seed = seed
    env = make_from_config(config)
    env.episode_counter = episode
    env.reset()
    agent = _make_agent(agent_name, env, seed, episode)
    lines = []
    if collect_log:
        lines.append(episode_log.dump_line(
            episode_log.header_record(config, seed, episode)))
    return_env = return_abs = 0.0
    steps = 0
    info = {}
    while True:
        action = agent.act()
        result = env.step(action)
        steps += 1
        return_env += result.reward_env
        return_abs += result.reward_abs
        info = result.info
        if collect_log:
            lines.append(episode_log.dump_line(
                episode_log.step_record(episode, steps, action, result)))
        if result.episode_done:
            break
    if hasattr(agent, "close"):
        agent.close()
    if hasattr(env, "close"):
        env.close()
    summary = {
        "episode": episode,
        "steps": steps,
        "return_env": round(return_env, 10),
        "return_abs": round(return_abs, 10),
        "solved": bool(info.get("solved", False)),
        "outcome": info.get("game_outcome"),
        "difficulty": info.get("difficulty"),
    }
    if collect_log:
        lines.append(episode_log.dump_line(
            episode_log.end_record(episode, summary)))
    return summary, lines


def run_many(config: EnvConfig, episodes: int, seed: int, agent: str,
             parallel: int = 1, log_path: Optional[str] = None) -> list[dict]:
    collect = log_path is not None
    jobs = [(config.to_dict(), seed, ep, agent, collect)
            for ep in range(episodes)]
    if parallel <= 1:
        results = [run_episode(*job) for job in jobs]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=parallel) as pool:
            futures = [pool.submit(run_episode, *job) for job in jobs]
            results = [f.result() for f in futures]
    if collect:
        with open(log_path, "w") as f:
            for _, lines in results:
                for line in lines:
                    f.write(line + "\n")
    return [summary for summary, _ in results]


def aggregate(summaries: list[dict]) -> dict:
    n = len(summaries)
    out = {
        "episodes": n,
        "mean_return_env": round(float(np.mean([s["return_env"] for s in summaries])), 6),
        "mean_return_abs": round(float(np.mean([s["return_abs"] for s in summaries])), 6),
        "mean_steps": round(float(np.mean([s["steps"] for s in summaries])), 2),
        "solve_rate": round(sum(s["solved"] for s in summaries) / n, 4),
    }
    outcomes = [s["outcome"] for s in summaries if s["outcome"]]
    if outcomes:
        out["win_rate"] = round(sum(o == "win" for o in outcomes) / n, 4)
        out["draw_rate"] = round(sum(o == "draw" for o in outcomes) / n, 4)
        out["loss_rate"] = round(sum(o == "loss" for o in outcomes) / n, 4)
        out["timeout_rate"] = round(sum(o == "timeout" for o in outcomes) / n, 4)
    return out


def bench(config: EnvConfig, total_steps: int = 20_000, seed: int = 0) -> dict:
    """Control steps/second without rendering; episodes restart as they end.

    Level generation inside reset() is excluded from the timing; the
    number reported is pure simulation stepping.
    """
    config = EnvConfig.from_dict(config.to_dict())
    config.include_image = False
    env = make_from_config(config)
    env.episode_counter = 0
    env.reset(seed)
    rng = np.random.default_rng(seed)
    dim = env.action_dim()
    actions = rng.uniform(-1.0, 1.0, (total_steps, dim))
    env.step(actions[0])  # warm the JIT before timing
    env.reset(seed)
    done_steps = 0
    episodes = 0
    stepping = 0.0
    start = time.perf_counter()
    while done_steps < total_steps:
        t0 = time.perf_counter()
        result = env.step(actions[done_steps])
        stepping += time.perf_counter() - t0
        done_steps += 1
        if result.episode_done:
            episodes += 1
            env.reset()
    elapsed = time.perf_counter() - start
    return {
        "steps": done_steps,
        "episodes_completed": episodes,
        "seconds": round(elapsed, 4),
        "stepping_seconds": round(stepping, 4),
        "steps_per_second": round(done_steps / stepping, 1),
    }


def render_log(log_path: str, out_dir: str, size: int = 96,
               every: int = 1) -> list[str]:
    """Re-simulate a log and write numbered frames (PPM) per step."""
    from embodied.raster import write_image

    records = episode_log.read_log(log_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for header, steps, _ in episode_log.split_episodes(records):
        config = EnvConfig.from_dict(header["config"])
        config.seed = header["seed"]
        env = make_from_config(config)
        env.episode_counter = header["episode"]
        env.reset()
        ep = header["episode"]
        path = out / f"ep{ep:04d}_t0000.ppm"
        write_image(str(path), env.render_frame(size))
        written.append(str(path))
        for rec in steps:
            result = env.step(rec["action"])
            if rec["t"] % every == 0 or result.episode_done:
                path = out / f"ep{ep:04d}_t{rec['t']:04d}.ppm"
                write_image(str(path), env.render_frame(size))
                written.append(str(path))
            if result.episode_done:
                break
    return written


HINT_FEATURE_SCALE = 6.0


def featurize(observation) -> np.ndarray:
    """Flattened observation planes plus bias, L2-normalized.

    Unit norm keeps the value regression stable at practical learning
    rates (the raw plane vector has a squared norm in the hundreds).
    The planner-action one-hot is emphasized so the per-hint policy
    differential outruns the common-mode drift that otherwise saturates
    the squashed mean before direction-following can emerge.
    """
    parts = []
    if observation.board_planes is not None:
        parts.append(observation.board_planes.ravel())
    if observation.planner_planes is not None:
        parts.append(observation.planner_planes.ravel())
    if observation.planner_action is not None:
        parts.append(HINT_FEATURE_SCALE * observation.planner_action)
    parts.append(np.ones(1))
    flat = np.concatenate(parts)
    return flat / max(float(np.linalg.norm(flat)), 1.0)


def step_repeated(env, action, repeat: int):
    """Hold one action for `repeat` control steps; accumulate both rewards."""
    r_env = r_abs = 0.0
    aux_done = False
    result = None
    for _ in range(repeat):
        result = env.step(action)
        r_env += result.reward_env
        r_abs += result.reward_abs
        aux_done = aux_done or result.aux_done
        if result.episode_done:
            break
    return result, r_env, r_abs, aux_done


def evaluate_params(config: EnvConfig, params: LinearAgentParams, episodes: int,
                    seed: int, action_repeat: int = 8) -> float:
    """Deterministic (mean-action) solve rate of the linear agent."""
    solved = 0
    for ep in range(episodes):
        env = make_from_config(config)
        env.episode_counter = ep
        obs = env.reset(seed)
        while True:
            head, _, _ = linear_reference_agent(featurize(obs), params)
            result, _, _, _ = step_repeated(env, head.mean, action_repeat)
            obs = result.observation
            if result.episode_done:
                solved += bool(result.info.get("solved"))
                break
    return solved / episodes


def train_demo(config: Optional[EnvConfig] = None, updates: int = 400,
               unroll: int = 96, learning_rate: float = 0.3,
               seed: int = 0, eval_episodes: int = 20,
               eval_every: int = 50, action_repeat: int = 8,
               time_budget_s: Optional[float] = None,
               target_solve_rate: Optional[float] = None,
               progress=None) -> dict:
    """Dual-stream policy-gradient training of the linear reference agent.

    Decisions are held for `action_repeat` control steps (discounts are
    compounded per decision); without this a per-step random walk almost
    never completes an abstract move, starving the auxiliary reward.
    """
    if config is None:
        config = EnvConfig(game="mujoban", difficulty=1, planner_mode="expert")
    g_env, g_abs = DOMAIN_DISCOUNTS[config.game]
    gamma_env, gamma_abs = g_env ** action_repeat, g_abs ** action_repeat
    env = make_from_config(config)
    env.episode_counter = 0
    obs = env.reset(seed)
    feat = featurize(obs)
    params = LinearAgentParams.zeros(len(feat), env.action_dim())
    rng = np.random.default_rng(seed)

    history = []
    initial_rate = evaluate_params(config, params, eval_episodes, seed + 1,
                                   action_repeat)
    history.append({"update": 0, "solve_rate": initial_rate})
    if progress:
        progress(history[-1])
    start = time.monotonic()

    for update in range(1, updates + 1):
        feats, actions, logps = [], [], []
        r_env, r_abs, d_env, d_abs = [], [], [], []
        v_env, v_abs = [], []
        for _ in range(unroll):
            feat = featurize(obs)
            head, ve, va = linear_reference_agent(feat, params)
            action = np.clip(gaussian_sample(head, rng), -1.0, 1.0)
            logp = gaussian_logp(head, action)
            result, re, ra, aux_done = step_repeated(env, action, action_repeat)
            feats.append(feat)
            actions.append(action)
            logps.append(logp)
            v_env.append(ve)
            v_abs.append(va)
            r_env.append(re)
            r_abs.append(ra)
            d_env.append(result.episode_done)
            d_abs.append(aux_done or result.episode_done)
            obs = result.observation
            if result.episode_done:
                obs = env.reset()
        feat = featurize(obs)
        _, ve, va = linear_reference_agent(feat, params)
        v_env.append(ve)
        v_abs.append(va)

        traj = Trajectory(r_env, r_abs, logps, logps, v_env, v_abs,
                          d_env, d_abs, gamma_env, gamma_abs)
        w_env, w_abs = dual_pg_coefficients(traj)
        targets_env, _ = vtrace_targets(traj, "env")
        targets_abs, _ = vtrace_targets(traj, "abs")
        params = sgd_update(params, np.array(feats), np.array(actions),
                            w_env + w_abs, targets_env, targets_abs,
                            learning_rate, value_loss_weight=2.0)
        if update % eval_every == 0 or update == updates:
            rate = evaluate_params(config, params, eval_episodes, seed + 1,
                                   action_repeat)
            history.append({"update": update, "solve_rate": rate})
            if progress:
                progress(history[-1])
            if target_solve_rate is not None and rate > target_solve_rate:
                break
            if time_budget_s and time.monotonic() - start > time_budget_s:
                break
    return {
        "initial_solve_rate": history[0]["solve_rate"],
        "final_solve_rate": history[-1]["solve_rate"],
        "history": history,
        "updates": history[-1]["update"],
        "seconds": round(time.monotonic() - start, 1),
    }

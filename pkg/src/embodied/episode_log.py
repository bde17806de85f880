"""Line-delimited episode logs with a versioned header; replay support.

A log holds, per episode: one header record (full config, master seed,
episode index, build id) and one record per step (action vector,
rewards, digests, events), closed by an end record. Header + steps are
sufficient to re-run the episode bit-exactly and verify it.
"""

from __future__ import annotations

import functools
import hashlib
import json
from pathlib import Path
from typing import Iterator, Optional

from embodied.config import EnvConfig

LOG_VERSION = 1


@functools.lru_cache(maxsize=1)
def build_id() -> str:
    """Content hash of the package sources, recorded for reproducibility."""
    root = Path(__file__).parent
    h = hashlib.sha256()
    for path in sorted(root.rglob("*.py")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()[:12]


def header_record(config: EnvConfig, seed: int, episode: int) -> dict:
    return {
        "type": "header",
        "version": LOG_VERSION,
        "build": build_id(),
        "seed": seed,
        "episode": episode,
        "config": config.to_dict(),
    }


def step_record(episode: int, t: int, action, result) -> dict:
    return {
        "type": "step",
        "ep": episode,
        "t": t,
        "action": [float(a) for a in action],
        "r_env": result.reward_env,
        "r_abs": result.reward_abs,
        "done": result.episode_done,
        "aux_done": result.aux_done,
        "abs": result.info["abstract_state"],
        "obs": result.observation.digest(),
        "events": result.info.get("events", []),
    }


def end_record(episode: int, summary: dict) -> dict:
    return {"type": "end", "ep": episode, **summary}


def dump_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def read_log(path: str) -> list[dict]:
    records = []
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}:{lineno}: bad log line: {e}") from e
    if not records:
        raise ValueError(f"{path}: empty log")
    return records


def split_episodes(records: list[dict]) -> Iterator[tuple[dict, list[dict], Optional[dict]]]:
    """Yield (header, step records, end record) per episode, in file order."""
    header = None
    steps: list[dict] = []
    end = None
    for rec in records:
        if rec["type"] == "header":
            if rec.get("version") != LOG_VERSION:
                raise ValueError(f"unsupported log version {rec.get('version')}")
            if header is not None:
                yield header, steps, end
            header, steps, end = rec, [], None
        elif rec["type"] == "step":
            steps.append(rec)
        elif rec["type"] == "end":
            end = rec
    if header is not None:
        yield header, steps, end


def replay_episode(header: dict, steps: list[dict]) -> tuple[bool, str]:
    """Re-run the logged actions; compare digests and rewards exactly."""
    from embodied.envs import make_from_config

    config = EnvConfig.from_dict(header["config"])
    config.seed = header["seed"]
    env = make_from_config(config)
    env.episode_counter = header["episode"]
    env.reset()
    for rec in steps:
        result = env.step(rec["action"])
        checks = (
            ("obs", result.observation.digest()),
            ("abs", result.info["abstract_state"]),
            ("r_env", result.reward_env),
            ("r_abs", result.reward_abs),
            ("done", result.episode_done),
        )
        for key, got in checks:
            if rec[key] != got:
                return False, (f"episode {header['episode']} step {rec['t']}: "
                               f"{key} mismatch: log {rec[key]!r} vs replay {got!r}")
        if result.episode_done:
            break
    return True, "ok"


def replay_log(path: str) -> tuple[bool, str]:
    records = read_log(path)
    count = 0
    for header, steps, _ in split_episodes(records):
        ok, message = replay_episode(header, steps)
        if not ok:
            return False, message
        count += 1
    return True, f"{count} episode(s) replayed bit-exactly"

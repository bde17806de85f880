"""Environment registry and the vector-of-environments helper."""

from __future__ import annotations

import re
from typing import Optional

from embodied.config import EnvConfig
from embodied.envs.base import (  # noqa: F401
    AuxEpisode, Env, Observation, StepResult, aux_episode_update,
    curriculum_sample,
)
from embodied.envs.boards import MujoGoEnv, MujoXoEnv
from embodied.envs.mujoban import MujobanEnv

_GO_NAME = re.compile(r"^go_(\d+)x(\d+)$")


def resolve_name(name: str) -> dict:
    """Map an environment name (mujoban, mujoxo, go_7x7, ...) to config fields."""
    if name in ("mujoban", "mujoxo", "mujogo"):
        return {"game": name}
    m = _GO_NAME.match(name)
    if m:
        a, b = int(m.group(1)), int(m.group(2))
        if a != b:
            raise ValueError(f"non-square go board {name!r}")
        return {"game": "mujogo", "board_size": a}
    raise ValueError(f"unknown environment name {name!r}")


def make(name: str, overrides: Optional[dict] = None,
         seed: Optional[int] = None) -> Env:
    fields = resolve_name(name)
    fields.update(overrides or {})
    if seed is not None:
        fields["seed"] = seed
    config = EnvConfig(**fields)
    return make_from_config(config)


def make_from_config(config: EnvConfig) -> Env:
    cls = {"mujoban": MujobanEnv, "mujoxo": MujoXoEnv,
           "mujogo": MujoGoEnv}[config.game]
    return cls(config)


class VectorEnv:
    """N independent instances stepped together, merged by instance index."""

    def __init__(self, configs: list[EnvConfig]):
        self.envs = [make_from_config(c) for c in configs]

    def reset(self, seeds: Optional[list[int]] = None):
        seeds = seeds or [None] * len(self.envs)
        return [env.reset(seed) for env, seed in zip(self.envs, seeds)]

    def step(self, actions):
        return [env.step(a) for env, a in zip(self.envs, actions)]

    def __len__(self):
        return len(self.envs)

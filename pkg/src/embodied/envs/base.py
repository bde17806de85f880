"""Shared environment machinery: observations, step results, auxiliary episodes."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from embodied.config import EnvConfig
from embodied.planning import AbstractState, PlannerTarget, same_position


@dataclass
class Observation:
    proprio: np.ndarray
    board_planes: Optional[np.ndarray] = None
    planner_planes: Optional[np.ndarray] = None
    planner_action: Optional[np.ndarray] = None
    topdown_image: Optional[np.ndarray] = None

    def digest(self) -> str:
        h = hashlib.sha256()
        for name in ("proprio", "board_planes", "planner_planes",
                     "planner_action", "topdown_image"):
            arr = getattr(self, name)
            h.update(b"\x00" if arr is None else np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()[:16]

    def to_payload(self) -> dict:
        out = {"digest": self.digest()}
        for name in ("proprio", "board_planes", "planner_planes", "planner_action"):
            arr = getattr(self, name)
            out[name] = None if arr is None else arr.tolist()
        img = self.topdown_image
        out["topdown_image"] = None if img is None else img.tolist()
        return out


@dataclass
class StepResult:
    observation: Observation
    reward_env: float
    reward_abs: float
    episode_done: bool
    aux_done: bool
    info: dict


@dataclass
class AuxEpisode:
    target: AbstractState
    issued_at: int
    deadline: int
    action_hint: Optional[object] = None
    current_digest: str = ""

    @classmethod
    def from_target(cls, target: PlannerTarget, step_index: int,
                    time_limit: int) -> "AuxEpisode":
        return cls(target.target, step_index, step_index + time_limit,
                   target.action_hint, target.current_digest)


def aux_episode_update(aux: AuxEpisode, estimated_state: AbstractState,
                       step_index: int, reward_scale: float):
    """(reward_abs, matched, expired) for the current step.

    The caller issues the replacement AuxEpisode when matched or expired,
    so that aux episodes tile the main episode without gaps.
    """
    if same_position(estimated_state, aux.target):
        return reward_scale, True, False
    if step_index >= aux.deadline:
        return 0.0, False, True
    return 0.0, False, False


def curriculum_sample(ratios, rng: np.random.Generator) -> int:
    """Draw a difficulty level (1-based) from the training-ratio distribution."""
    ratios = np.asarray(ratios, dtype=float)
    if np.any(ratios < 0):
        raise ValueError("negative curriculum ratio")
    if abs(float(ratios.sum()) - 1.0) > 1e-9:
        raise ValueError(f"curriculum ratios sum to {ratios.sum()}, not 1")
    return int(rng.choice(len(ratios), p=ratios)) + 1


class Env:
    """Base: seed bookkeeping and the step/reset contract."""

    def __init__(self, config: EnvConfig):
        self.config = config
        self.step_index = 0
        self.episode_done = True
        self.episode_counter = 0
        self._last_seed = config.seed

    # -- to implement -------------------------------------------------
    def action_dim(self) -> int:
        raise NotImplementedError

    def _reset_impl(self, rng_children) -> Observation:
        raise NotImplementedError

    def _step_impl(self, controls: np.ndarray) -> StepResult:
        raise NotImplementedError

    def abstract_state(self) -> AbstractState:
        raise NotImplementedError

    def world_digest(self) -> str:
        raise NotImplementedError

    # ------------------------------------------------------------------
    def reset(self, seed: Optional[int] = None) -> Observation:
        if seed is not None:
            self._last_seed = seed
        seq = np.random.SeedSequence([abs(int(self._last_seed)) % (2**63),
                                      self.episode_counter])
        children = seq.spawn(6)
        self.step_index = 0
        self.episode_done = False
        self.episode_counter += 1
        return self._reset_impl(children)

    def step(self, action) -> StepResult:
        if self.episode_done:
            raise RuntimeError("step() after the episode ended; call reset()")
        controls = np.asarray(action, dtype=float)
        if controls.shape != (self.action_dim(),):
            raise ValueError(f"action shape {controls.shape} != ({self.action_dim()},)")
        result = self._step_impl(controls)
        self.episode_done = result.episode_done
        return result

    @property
    def time_limit(self) -> int:
        return self.config.effective_time_limit

    @staticmethod
    def child_seed(child: np.random.SeedSequence) -> int:
        return int(child.generate_state(1, dtype=np.uint64)[0] % (2**62))

"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str
    build: str


class MakeEnvRequest(BaseModel):
    name: str = Field(description="mujoban, mujoxo, mujogo, or go_NxN")
    overrides: dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None


class MakeEnvResponse(BaseModel):
    env_id: str
    game: str
    action_dim: int
    config: dict[str, Any]


class ResetRequest(BaseModel):
    seed: Optional[int] = None


class ObservationPayload(BaseModel):
    digest: str
    proprio: list[float]
    board_planes: Optional[list] = None
    planner_planes: Optional[list] = None
    planner_action: Optional[list[float]] = None
    topdown_image: Optional[list] = None


class StepRequest(BaseModel):
    action: list[float]


class StepResponse(BaseModel):
    observation: ObservationPayload
    reward_env: float
    reward_abs: float
    episode_done: bool
    aux_done: bool
    info: dict[str, Any]


class RunRequest(BaseModel):
    config: dict[str, Any] = Field(default_factory=dict)
    episodes: int = 1
    seed: int = 0
    agent: str = "oracle"
    parallel: int = 1
    collect_log: bool = False


class RunResponse(BaseModel):
    summaries: list[dict[str, Any]]
    aggregate: dict[str, Any]
    log_text: Optional[str] = None


class GenLevelsRequest(BaseModel):
    difficulty: int = 1
    count: int = 1
    seed: int = 0


class GenLevelsResponse(BaseModel):
    text: str


class BenchRequest(BaseModel):
    config: dict[str, Any] = Field(default_factory=dict)
    steps: int = 20_000
    seed: int = 0


class ReplayRequest(BaseModel):
    log_text: str


class ReplayResponse(BaseModel):
    ok: bool
    message: str


class RenderRequest(BaseModel):
    log_text: str
    size: int = 96
    every: int = 1


class FramePayload(BaseModel):
    name: str
    ppm_base64: str


class RenderResponse(BaseModel):
    frames: list[FramePayload]


class TrainDemoRequest(BaseModel):
    config: dict[str, Any] = Field(default_factory=dict)
    updates: int = 400
    unroll: int = 96
    learning_rate: float = 0.3
    seed: int = 0
    eval_episodes: int = 20
    eval_every: int = 50
    action_repeat: int = 8
    time_budget_s: Optional[float] = None
    target_solve_rate: Optional[float] = None


class ErrorDetail(BaseModel):
    code: str
    message: str

"""Environment configuration and the key=value config file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

GAMES = ("mujoban", "mujoxo", "mujogo")

DEFAULT_TIME_LIMITS = {"mujoban": 900, "mujoxo": 600, "mujogo": 900}
EVAL_TIME_LIMIT_MUJOGO = 1200
DEFAULT_OPPONENT_EPSILON = {"mujoxo": 0.25, "mujogo": 0.0}
DEFAULT_CURRICULUM_RATIOS = (0.25, 0.25, 0.2, 0.2, 0.1)

PLANNER_MODES = ("expert", "random", "none")


@dataclass
class EnvConfig:
    game: str = "mujoban"
    pegs: bool = False
    difficulty: Optional[int] = None      # None: sample the curriculum each episode
    level_file: Optional[str] = None      # fixed Boxoban levels, cycled per episode
    board_size: int = 7
    opponent_epsilon: Optional[float] = None
    opponent_level: int = 10
    engine_command: Optional[str] = None  # external GTP engine for mujogo
    time_limit_steps: Optional[int] = None
    planner_mode: str = "expert"
    aux_time_limit: int = 50
    aux_reward_scale: float = 1.0
    eval_mode: bool = False
    seed: int = 0
    arm_reset: bool = True
    include_image: bool = False
    image_size: int = 96

    def __post_init__(self):
        if self.game not in GAMES:
            raise ValueError(f"unknown game {self.game!r}; expected one of {GAMES}")
        if self.planner_mode not in PLANNER_MODES:
            raise ValueError(f"unknown planner mode {self.planner_mode!r}")
        if self.difficulty is not None and not 1 <= self.difficulty <= 5:
            raise ValueError("difficulty must be in 1..5")
        if self.board_size < 5:
            raise ValueError("board_size must be at least 5")
        if self.aux_time_limit <= 0:
            raise ValueError("aux_time_limit must be positive")

    @property
    def effective_time_limit(self) -> int:
        if self.time_limit_steps is not None:
            return self.time_limit_steps
        if self.game == "mujogo" and self.eval_mode:
            return EVAL_TIME_LIMIT_MUJOGO
        return DEFAULT_TIME_LIMITS[self.game]

    @property
    def effective_opponent_epsilon(self) -> float:
        if self.opponent_epsilon is not None:
            return self.opponent_epsilon
        return DEFAULT_OPPONENT_EPSILON.get(self.game, 0.0)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EnvConfig":
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - fields
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


_BOOL = {"true": True, "false": False, "1": True, "0": False,
         "yes": True, "no": False}


def _coerce(name: str, text: str):
    text = text.strip()
    field_types = {f.name: f.type for f in dataclasses.fields(EnvConfig)}
    ftype = field_types.get(name, "str")
    if "Optional" in str(ftype) and text.lower() in ("none", ""):
        return None
    if "bool" in str(ftype):
        if text.lower() not in _BOOL:
            raise ValueError(f"bad boolean for {name}: {text!r}")
        return _BOOL[text.lower()]
    if "int" in str(ftype):
        return int(text)
    if "float" in str(ftype):
        return float(text)
    return text


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines (# comments) into config overrides."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip()] = _coerce(key.strip(), value)
    return out


def load_config_file(path: str) -> dict:
    with open(path) as f:
        return parse_config_text(f.read())


def format_config(config: EnvConfig) -> str:
    lines = []
    for key, value in config.to_dict().items():
        lines.append(f"{key} = {'none' if value is None else value}")
    return "\n".join(lines) + "\n"

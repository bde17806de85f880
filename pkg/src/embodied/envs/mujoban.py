"""Grid-pushing environment: a rolling disc solves Sokoban levels physically.

The abstract level lives on unit cells; cell (row, col) maps to world
position (col, height-1-row). Rewards follow the estimated abstract
state: +1/-1 for boxes pushed onto/off targets, +10 on the solving
transition (stacked with the shaping reward), episode end on solve or
at the step limit.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from embodied import sokoban
from embodied.config import DEFAULT_CURRICULUM_RATIOS, EnvConfig
from embodied.envs.base import (
    AuxEpisode, Env, Observation, StepResult, aux_episode_update,
    curriculum_sample,
)
from embodied.physics import (
    BOX_HALF, CELL, PEG_RADIUS, WALKER_RADIUS, WALL_HALF, Body, PhysicsWorld,
    step_world,
)
from embodied.planning import (
    NoValidTarget, SokobanExpertPlanner, SokobanRandomPlanner, abstract_digest,
)

SOLVE_REWARD = 10.0
SHAPING_REWARD = 1.0
PLANE_SIZE = 10

REWARD_VALUES = (-1.0, 0.0, 1.0, 10.0, 11.0)

_ACTION_INDEX = {d: i for i, d in enumerate(sokoban.DIRECTIONS)}


def cell_center(cell, height: int) -> tuple[float, float]:
    r, c = cell
    return (c * CELL, (height - 1 - r) * CELL)


def nearest_cell(x: float, y: float, height: int) -> tuple[int, int]:
    return (height - 1 - int(round(y / CELL)), int(round(x / CELL)))


def build_world(level: sokoban.SokobanState, pegs: bool, substeps: int = 10,
                seed: int = 0) -> PhysicsWorld:
    bodies = []
    for r, c in sorted(level.walls):
        bodies.append(Body(f"wall_{r}_{c}", "wall",
                           cell_center((r, c), level.height),
                           half_extent=WALL_HALF))
    if pegs:
        for r in range(level.height - 1):
            for c in range(level.width - 1):
                corners = [(r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1)]
                if all(cc in level.walls for cc in corners):
                    continue
                x = c * CELL + CELL / 2
                y = (level.height - 1 - r) * CELL - CELL / 2
                bodies.append(Body(f"peg_{r}_{c}", "peg", (x, y),
                                   half_extent=PEG_RADIUS))
    for i, cell in enumerate(sorted(level.boxes)):
        bodies.append(Body(f"box{i}", "box", cell_center(cell, level.height),
                           half_extent=BOX_HALF))
    bodies.append(Body("walker", "walker-disc",
                       cell_center(level.player, level.height),
                       half_extent=WALKER_RADIUS))
    markers = [cell_center(t, level.height) for t in sorted(level.targets)]
    return PhysicsWorld(bodies, substeps=substeps, seed=seed,
                        target_markers=markers)


def estimate_abstract_state(world: PhysicsWorld, level: sokoban.SokobanState,
                            prev_box_cells: list, prev_player) -> tuple:
    """Snap boxes (earlier index wins conflicts) then the player to cells.

    Returns (state, box_cells) with box_cells ordered by body index.
    """
    height = level.height
    box_cells = []
    occupied = set()
    for k, b in enumerate(world.boxes):
        x, y = world.pos[b]
        cell = nearest_cell(x, y, height)
        if (cell in occupied or cell in level.walls
                or not level.in_bounds(cell)):
            cell = prev_box_cells[k]
        box_cells.append(cell)
        occupied.add(cell)
    x, y = world.pos[world.walker]
    player = nearest_cell(x, y, height)
    if player in occupied or player in level.walls or not level.in_bounds(player):
        player = prev_player
    state = sokoban.SokobanState(level.width, level.height, level.walls,
                                 level.targets, frozenset(box_cells), player)
    return state, box_cells


def state_planes(state: sokoban.SokobanState, size: int = PLANE_SIZE) -> np.ndarray:
    padded = sokoban.pad_level(state, size)
    planes = np.zeros((size, size, 4), dtype=np.float64)
    for r, c in padded.walls:
        planes[r, c, 0] = 1.0
    for r, c in padded.targets:
        planes[r, c, 1] = 1.0
    for r, c in padded.boxes:
        planes[r, c, 2] = 1.0
    planes[padded.player[0], padded.player[1], 3] = 1.0
    return planes


class MujobanEnv(Env):
    def __init__(self, config: EnvConfig):
        super().__init__(config)
        if config.game != "mujoban":
            raise ValueError("MujobanEnv requires game=mujoban")
        self._levels_from_file = None
        if config.level_file:
            with open(config.level_file) as f:
                self._levels_from_file = sokoban.parse_levels(f.read())
            if not self._levels_from_file:
                raise ValueError(f"no levels in {config.level_file}")
        self.world: Optional[PhysicsWorld] = None
        self.level: Optional[sokoban.SokobanState] = None
        self.aux: Optional[AuxEpisode] = None
        self.planner = None
        self.difficulty = None

    def action_dim(self) -> int:
        return 2

    def abstract_state(self) -> sokoban.SokobanState:
        return self._state

    def world_digest(self) -> str:
        return self.world.digest()

    def _reset_impl(self, children) -> Observation:
        level_rng = np.random.default_rng(children[0])
        planner_rng = np.random.default_rng(children[1])
        world_seed = self.child_seed(children[2])
        if self._levels_from_file is not None:
            idx = (self.episode_counter - 1) % len(self._levels_from_file)
            self.level = self._levels_from_file[idx]
            self.difficulty = self.config.difficulty or 0
        else:
            self.difficulty = self.config.difficulty or curriculum_sample(
                DEFAULT_CURRICULUM_RATIOS, level_rng)
            spec = sokoban.level_spec(self.difficulty)
            self.level = sokoban.generate_level(self.child_seed(children[3]), spec)
        self.world = build_world(self.level, self.config.pegs, seed=world_seed)
        self._state = self.level
        self._box_cells = [nearest_cell(*self.world.pos[b], self.level.height)
                           for b in self.world.boxes]
        self._prev_vel = np.zeros(2)
        self._prev_heading = 0.0

        mode = self.config.planner_mode
        if mode == "expert":
            self.planner = SokobanExpertPlanner()
        elif mode == "random":
            self.planner = SokobanRandomPlanner(planner_rng)
        else:
            self.planner = None
        self.aux = None
        if self.planner is not None:
            self._issue_aux()
        return self._observation()

    def _issue_aux(self):
        try:
            target = self.planner.propose(self._state)
        except NoValidTarget:
            self.aux = None
            return
        self.aux = AuxEpisode.from_target(target, self.step_index,
                                          self.config.aux_time_limit)

    def _step_impl(self, controls: np.ndarray) -> StepResult:
        prev_state = self._state
        prev_vel = self.world.vel[self.world.walker].copy()
        prev_heading = self.world.walker_heading
        step_world(self.world, controls)
        self.step_index += 1
        self._state, self._box_cells = estimate_abstract_state(
            self.world, self.level, self._box_cells, prev_state.player)

        events = []
        prev_on = prev_state.boxes & prev_state.targets
        now_on = self._state.boxes & self._state.targets
        gained = len(now_on - prev_on)
        lost = len(prev_on - now_on)
        reward_env = SHAPING_REWARD * gained - SHAPING_REWARD * lost
        if gained:
            events.append("box_on_target")
        if lost:
            events.append("box_off_target")
        solved = sokoban.is_solved(self._state)
        if solved:
            reward_env += SOLVE_REWARD
            events.append("solved")

        reward_abs = 0.0
        aux_done = False
        if self.aux is not None:
            reward_abs, matched, expired = aux_episode_update(
                self.aux, self._state, self.step_index,
                self.config.aux_reward_scale)
            if matched or expired:
                aux_done = True
                events.append("aux_match" if matched else "aux_timeout")
                self._issue_aux()

        done = solved or self.step_index >= self.time_limit
        if done and not solved:
            events.append("timeout")
        obs = self._observation()
        self._prev_vel = prev_vel
        self._prev_heading = prev_heading
        info = {
            "abstract_state": abstract_digest(self._state),
            "solved": solved,
            "illegal_touch_count": 0,
            "difficulty": self.difficulty,
            "events": events,
        }
        return StepResult(obs, reward_env, reward_abs, done, aux_done, info)

    def _observation(self) -> Observation:
        w = self.world
        vel = w.vel[w.walker]
        accel = (vel - self._prev_vel) / w.control_dt
        dh = math.remainder(w.walker_heading - self._prev_heading, 2 * math.pi)
        proprio = np.array([
            w.pos[w.walker, 0], w.pos[w.walker, 1], vel[0], vel[1],
            accel[0], accel[1],
            math.cos(w.walker_heading), math.sin(w.walker_heading),
            dh / w.control_dt, 1.0 if w.walker_touch else 0.0,
        ])
        board = planner = action = None
        if self.planner is not None:
            board = state_planes(self._state)
            if self.aux is not None:
                planner = np.concatenate(
                    [board, state_planes(self.aux.target)], axis=2)
                action = np.zeros(4)
                if self.aux.action_hint is not None:
                    action[_ACTION_INDEX[self.aux.action_hint]] = 1.0
        image = None
        if self.config.include_image:
            from embodied.raster import rasterize_topdown
            image = rasterize_topdown(self.world, self.config.image_size)
        return Observation(proprio, board, planner, action, image)

    def render_frame(self, size: Optional[int] = None) -> np.ndarray:
        from embodied.raster import rasterize_topdown
        return rasterize_topdown(self.world, size or self.config.image_size)

"""Scripted motor control: grid navigation/pushing and arm reaching.

These primitives execute one abstract move in the physical world; the
oracle agent chains them with an expert planner to play whole episodes,
proving the environments solvable and calibrating the time limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from embodied import go, sokoban
from embodied.envs.boards import MujoGoEnv, MujoXoEnv, TouchBoardEnv
from embodied.envs.mujoban import MujobanEnv, cell_center
from embodied.opponents import GoExpertPlayer, OpponentConfig
from embodied.physics import (
    ARM_SPEED_LIMIT, ArmConfig, TouchPad, arm_forward_kinematics, arm_jacobian,
)
from embodied.planning import (
    NoValidTarget, PlannerTarget, SokobanExpertPlanner, abstract_digest,
)
from embodied.solver import bfs_path

PRIMITIVE_TIMEOUT = 120  # physics steps per abstract move
DLS_DAMPING = 0.1
REACH_GAIN = 6.0
NAV_GAIN = 4.0
WAYPOINT_TOL = 0.08
ALIGN_TOL = 0.04
PUSH_STOP_TOL = 0.12


class PrimitiveFailure(RuntimeError):
    pass


@dataclass
class MotorPlan:
    phase: str  # navigate | align | push (walker); reach | press (arm)
    waypoints: list
    active_target: Optional[PlannerTarget] = None
    state_digest: str = ""
    age: int = 0


def _direction_world(direction: sokoban.Direction) -> np.ndarray:
    dr, dc = direction.delta
    return np.array([float(dc), float(-dr)])


def _diff_move(state: sokoban.SokobanState, target: sokoban.SokobanState):
    """(push_cell, box_from, direction) realizing state -> target; box_from None for plain moves."""
    moved_from = state.boxes - target.boxes
    moved_to = target.boxes - state.boxes
    if not moved_from:
        dr = target.player[0] - state.player[0]
        dc = target.player[1] - state.player[1]
        direction = {d.delta: d for d in sokoban.DIRECTIONS}.get((dr, dc))
        if direction is None:
            raise PrimitiveFailure("target is not one move away")
        return target.player, None, direction
    box_from = next(iter(moved_from))
    box_to = next(iter(moved_to))
    dr, dc = box_to[0] - box_from[0], box_to[1] - box_from[1]
    direction = {d.delta: d for d in sokoban.DIRECTIONS}.get((dr, dc))
    if direction is None:
        raise PrimitiveFailure("box moved more than one cell")
    push_cell = (box_from[0] - dr, box_from[1] - dc)
    return push_cell, box_from, direction


def mujoban_primitive(world, estimated_state: sokoban.SokobanState,
                      target: PlannerTarget, plan: Optional[MotorPlan] = None
                      ) -> tuple[np.ndarray, MotorPlan, bool]:
    """Proportional controls toward executing one abstract move.

    Returns (control 2-vector, updated MotorPlan, done). Boxes are pushed
    through to the destination cell centre, not merely across the rounding
    boundary, so they cannot flicker back out of the cell when grazed.
    Raises PrimitiveFailure when no free path reaches the pushing cell.
    """
    height = estimated_state.height
    if plan is None:
        goal_cell, box_from, direction = _diff_move(estimated_state, target.target)
        path = bfs_path(estimated_state, estimated_state.player, goal_cell)
        if path is None:
            raise PrimitiveFailure(f"no free path to {goal_cell}")
        waypoints = [cell_center(c, height) for c in path[1:]]
        plan = MotorPlan("navigate" if waypoints else "align", waypoints, target)
        plan.direction = direction
        plan.anchor = cell_center(path[-1], height)
        if box_from is None:
            plan.goal_point = cell_center(goal_cell, height)
            plan.box_index = None
        else:
            box_to = next(iter(target.target.boxes - estimated_state.boxes))
            plan.goal_point = cell_center(box_to, height)
            want = cell_center(box_from, height)
            plan.box_index = min(
                range(len(world.boxes)),
                key=lambda k: float(np.hypot(world.pos[world.boxes[k], 0] - want[0],
                                             world.pos[world.boxes[k], 1] - want[1])))
    plan.age += 1

    pos = world.pos[world.walker]
    goal = np.asarray(plan.goal_point)
    moving_point = (pos if plan.box_index is None
                    else world.pos[world.boxes[plan.box_index]])
    if float(np.max(np.abs(moving_point - goal))) < PUSH_STOP_TOL:
        return np.zeros(2), plan, True

    if plan.phase == "navigate":
        while plan.waypoints and np.max(np.abs(
                pos - np.asarray(plan.waypoints[0]))) < WAYPOINT_TOL:
            plan.waypoints.pop(0)
        if plan.waypoints:
            err = np.asarray(plan.waypoints[0]) - pos
            return np.clip(NAV_GAIN * err, -1.0, 1.0), plan, False
        plan.phase = "align"
    if plan.phase == "align":
        err = np.asarray(plan.anchor) - pos
        if np.max(np.abs(err)) < ALIGN_TOL:
            plan.phase = "push"
        else:
            return np.clip(NAV_GAIN * err, -1.0, 1.0), plan, False
    # push (or walk into the neighbouring cell for plain moves)
    d = _direction_world(plan.direction)
    perp = np.array([-d[1], d[0]])
    line_err = float(np.dot(goal - pos, perp))
    control = d * 1.0 + perp * np.clip(NAV_GAIN * line_err, -0.4, 0.4)
    return np.clip(control, -1.0, 1.0), plan, False


def arm_reach(arm: ArmConfig, pad: TouchPad, gain: float = REACH_GAIN,
              damping: float = DLS_DAMPING) -> np.ndarray:
    """Damped-least-squares step toward the pad; press only once aligned."""
    center = np.asarray(pad.center, dtype=float)
    if np.linalg.norm(center - arm.base) > float(np.sum(arm.link_lengths)):
        raise PrimitiveFailure(f"pad {pad.id} outside the arm workspace")
    eff = arm_forward_kinematics(arm)
    err = center - eff
    tol = 0.6 * min(pad.half_extent)
    if abs(err[0]) < tol and abs(err[1]) < tol:
        return np.array([0.0, 0.0, 0.0, 1.0])
    jac = arm_jacobian(arm)
    jjt = jac @ jac.T + (damping ** 2) * np.eye(2)
    qdot = jac.T @ np.linalg.solve(jjt, gain * err)
    controls = np.clip(qdot / ARM_SPEED_LIMIT, -1.0, 1.0)
    return np.append(controls, -1.0)


class MujobanOracle:
    """Follows its own expert plan; independent of the env's planner mode."""

    def __init__(self, env: MujobanEnv):
        self.env = env
        self.planner = SokobanExpertPlanner()
        self.plan: Optional[MotorPlan] = None
        self.target: Optional[PlannerTarget] = None
        self._plan_state = None
        self._expected = frozenset()

    def act(self) -> np.ndarray:
        state = self.env.abstract_state()
        digest = abstract_digest(state)
        if self.target is not None:
            timed_out = self.plan is not None and self.plan.age > PRIMITIVE_TIMEOUT
            if digest not in self._expected or timed_out:
                self.target = None  # deviation or stall: replan from scratch
        if self.target is None:
            try:
                self.target = self.planner.propose(state)
            except NoValidTarget:
                return np.zeros(2)
            self.plan = None
            self._plan_state = state
            self._expected = frozenset(
                [digest, abstract_digest(self.target.target)])
        try:
            control, self.plan, done = mujoban_primitive(
                self.env.world, self._plan_state, self.target, self.plan)
        except PrimitiveFailure:
            self.target = None
            return np.zeros(2)
        if done:
            self.target = None
        return control


class BoardOracle:
    """Reaches the pad realizing the expert move for the current board."""

    def __init__(self, env: TouchBoardEnv):
        self.env = env
        if isinstance(env, MujoGoEnv):
            self.expert = GoExpertPlayer(
                OpponentConfig(epsilon=0.0, level=env.config.opponent_level, seed=0),
                env.config.engine_command)
        else:
            self.expert = None
        self._move = None
        self._board_digest = ""
        self._press_age = 0
        self._release_steps = 0
        self._best_err = math.inf
        self._no_progress = 0
        self._escape_steps = 0

    def _plan_move(self):
        board = self.env.board
        digest = abstract_digest(board)
        if self._move is not None and digest == self._board_digest:
            return self._move
        if isinstance(self.env, MujoXoEnv):
            from embodied.minimax import ttt_minimax
            self._move = ttt_minimax(board)[0]
        else:
            self._move = self.expert.move(board, self.env.history)
        self._board_digest = digest
        self._best_err = math.inf
        self._no_progress = 0
        return self._move

    def _pad_for_move(self, move) -> TouchPad:
        for pad in self.env.pads:
            if pad.bound_move == move:
                return pad
        if move == go.PASS:
            raise PrimitiveFailure("no pass pad")
        raise PrimitiveFailure(f"no pad bound to {move}")

    def act(self) -> np.ndarray:
        if self.env._is_terminal():
            return np.array([0.0, 0.0, 0.0, -1.0])
        move = self._plan_move()
        pad = self._pad_for_move(move)
        # Deterministic stall escape: a folded arm can limit-cycle under
        # damped least squares, so wiggle out when the error stops shrinking.
        eff = arm_forward_kinematics(self.env.world.arm)
        err = float(np.hypot(pad.center[0] - eff[0], pad.center[1] - eff[1]))
        if err < self._best_err - 1e-3:
            self._best_err = err
            self._no_progress = 0
        else:
            self._no_progress += 1
        if self._escape_steps > 0:
            self._escape_steps -= 1
            return np.array([0.7, -0.9, 0.5, -1.0])
        if self._no_progress > 20:
            self._no_progress = 0
            self._best_err = math.inf
            self._escape_steps = 10
            return np.array([0.7, -0.9, 0.5, -1.0])
        controls = arm_reach(self.env.world.arm, pad)
        if controls[3] < 0:
            self._press_age = 0
            return controls
        # A press normally registers within a step; if it does not, the
        # pad was already "touched" when the arm teleported here, so lift
        # the press briefly to produce a fresh contact edge.
        if self._release_steps > 0:
            self._release_steps -= 1
            controls[3] = -1.0
            return controls
        self._press_age += 1
        if self._press_age > 3:
            self._press_age = 0
            self._release_steps = 2
            controls[3] = -1.0
        return controls

    def close(self):
        if self.expert is not None:
            self.expert.close()


def make_oracle(env):
    if isinstance(env, MujobanEnv):
        return MujobanOracle(env)
    return BoardOracle(env)


def oracle_agent(env, max_steps: Optional[int] = None) -> dict:
    """Run one full episode with the scripted oracle; env must be reset."""
    oracle = make_oracle(env)
    steps = 0
    return_env = 0.0
    return_abs = 0.0
    result = None
    limit = max_steps or env.time_limit
    while steps < limit:
        result = env.step(oracle.act())
        steps += 1
        return_env += result.reward_env
        return_abs += result.reward_abs
        if result.episode_done:
            break
    if isinstance(oracle, BoardOracle):
        oracle.close()
    info = result.info if result else {}
    return {
        "steps": steps,
        "return_env": return_env,
        "return_abs": return_abs,
        "solved": info.get("solved", False),
        "outcome": info.get("game_outcome"),
        "done": bool(result.episode_done) if result else False,
    }

"""Touch-board environments: tic-tac-toe and Go played with a planar arm.

A move registers when a sensing point of the arm enters a touch pad
while the press actuator is engaged (rising edge). The agent's piece
appears at the pad centre plus placement noise, the opponent replies
immediately, captures are mirrored on the rendered stones, and the arm
teleports to a fresh random configuration.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from embodied import go, tictactoe
from embodied.config import EnvConfig
from embodied.envs.base import (
    AuxEpisode, Env, Observation, StepResult,
)
from embodied.opponents import (
    EpsilonOpponent, GoExpertPlayer, OpponentConfig, minimax_policy,
)
from embodied.physics import (
    ArmConfig, PhysicsWorld, TouchPad, arm_joint_positions, detect_pad_touch,
    step_world, validate_pads, wrap_angles,
)
from embodied.planning import (
    GoExpertPlanner, GoRandomPlanner, NoValidTarget, TttExpertPlanner,
    TttRandomPlanner, abstract_digest, same_position,
)

ARM_LINKS = (0.5, 0.45, 0.3)
BOARD_CENTER = (0.55, 0.0)
XO_PITCH = 0.2
GO_MAX_PITCH = 0.12
GO_MAX_SPAN = 0.84
PASS_PAD_HALF = (0.25, 0.08)
PASS_PAD_GAP = 0.15
PLACEMENT_NOISE = 0.1  # fraction of the board pitch


def go_pitch(size: int) -> float:
    return min(GO_MAX_PITCH, GO_MAX_SPAN / (size - 1))


def xo_pad_center(cell: int) -> tuple[float, float]:
    r, c = divmod(cell, 3)
    return (BOARD_CENTER[0] + (1 - r) * XO_PITCH,
            BOARD_CENTER[1] + (1 - c) * XO_PITCH)


def go_pad_center(vertex: go.Vertex, size: int) -> tuple[float, float]:
    col, row = vertex
    pitch = go_pitch(size)
    return (BOARD_CENTER[0] + (row - (size - 1) / 2) * pitch,
            BOARD_CENTER[1] + ((size - 1) / 2 - col) * pitch)


def build_xo_pads() -> list[TouchPad]:
    half = (XO_PITCH / 2, XO_PITCH / 2)
    pads = [TouchPad(f"cell_{i}", xo_pad_center(i), half, i) for i in range(9)]
    validate_pads(pads)
    return pads


def build_go_pads(size: int) -> list[TouchPad]:
    pitch = go_pitch(size)
    half = (pitch / 2, pitch / 2)
    pads = []
    for row in range(size):
        for col in range(size):
            pads.append(TouchPad(f"v_{col}_{row}",
                                 go_pad_center((col, row), size), half,
                                 (col, row)))
    span = (size - 1) / 2 * pitch
    for name, side in (("pass_left", 1.0), ("pass_right", -1.0)):
        center = (BOARD_CENTER[0],
                  side * (span + PASS_PAD_GAP + PASS_PAD_HALF[1]))
        pads.append(TouchPad(name, center, PASS_PAD_HALF, go.PASS))
    validate_pads(pads)
    return pads


class TouchBoardEnv(Env):
    """Common machinery; subclasses provide rules, planners, and the opponent."""

    def __init__(self, config: EnvConfig):
        super().__init__(config)
        self.world: Optional[PhysicsWorld] = None
        self.pads: list[TouchPad] = []
        self.aux: Optional[AuxEpisode] = None
        self.planner = None
        self.board = None
        self.stones: dict = {}  # move key -> (x, y, color)
        self.illegal_touch_count = 0
        self._outcome: Optional[str] = None

    def action_dim(self) -> int:
        return 4

    def abstract_state(self):
        return self.board

    def world_digest(self) -> str:
        return self.world.digest()

    # -- game-specific hooks -------------------------------------------
    def _new_board(self):
        raise NotImplementedError

    def _build_pads(self) -> list[TouchPad]:
        raise NotImplementedError

    def _touch_points(self) -> list[np.ndarray]:
        raise NotImplementedError

    def _agent_move_for_pad(self, pad: TouchPad):
        """Returns the applied board or None when the bound move is illegal."""
        raise NotImplementedError

    def _opponent_reply(self):
        raise NotImplementedError

    def _is_terminal(self) -> bool:
        raise NotImplementedError

    def _terminal_outcome(self) -> tuple[str, float]:
        raise NotImplementedError

    def _make_planner(self, rng: np.random.Generator):
        raise NotImplementedError

    def _sync_stones(self, new_key=None, color=None):
        raise NotImplementedError

    def _pitch(self) -> float:
        raise NotImplementedError

    # --------------------------------------------------------------------
    def _reset_impl(self, children) -> Observation:
        arm_rng = np.random.default_rng(children[0])
        self._noise_rng = np.random.default_rng(children[1])
        planner_rng = np.random.default_rng(children[2])
        self._opponent_seed = self.child_seed(children[3])
        self.board = self._new_board()
        self.pads = self._build_pads()
        self.stones = {}
        self.illegal_touch_count = 0
        self._outcome = None
        self._arm_rng = arm_rng
        arm = ArmConfig(joint_angles=arm_rng.uniform(-math.pi, math.pi, 3),
                        link_lengths=np.array(ARM_LINKS))
        pad_extent = max(abs(p.center[0]) + p.half_extent[0] for p in self.pads)
        lateral = max(abs(p.center[1]) + p.half_extent[1] for p in self.pads)
        view = max(pad_extent, lateral, sum(ARM_LINKS) * 0.75) + 0.1
        self.world = PhysicsWorld([], arm=arm,
                                  seed=self.child_seed(children[4]),
                                  view_bounds=((-0.25, -view), (view + 0.25, view)))
        self._setup_opponent()
        self.planner = self._make_planner(planner_rng)
        self.aux = None
        if self.planner is not None:
            self._issue_aux()
        self._prev_pad = self._detect_pad()
        return self._observation()

    def _setup_opponent(self):
        raise NotImplementedError

    def _issue_aux(self):
        if self._is_terminal():
            return
        try:
            target = self.planner.propose(self.board, self._history())
        except NoValidTarget:
            self.aux = None
            return
        self.aux = AuxEpisode.from_target(target, self.step_index,
                                          self.config.aux_time_limit)

    def _history(self):
        return []

    def _detect_pad(self) -> Optional[str]:
        press = self.world.arm.press
        for point in self._touch_points():
            pad = detect_pad_touch(point, press, self.pads)
            if pad is not None:
                return pad
        return None

    def _teleport_arm(self):
        if not self.config.arm_reset:
            return
        arm = self.world.arm
        arm.joint_angles = wrap_angles(self._arm_rng.uniform(-math.pi, math.pi, 3))
        arm.joint_velocities = np.zeros(3)

    def _placement_noise(self) -> np.ndarray:
        pitch = self._pitch()
        noise = self._noise_rng.normal(0.0, PLACEMENT_NOISE * pitch, 2)
        return np.clip(noise, -pitch / 2, pitch / 2)

    def _register_move(self, pad_id: str, events: list) -> tuple[float, bool]:
        """Apply agent + opponent moves; returns (reward_abs, aux_done)."""
        pad = next(p for p in self.pads if p.id == pad_id)
        applied = self._agent_move_for_pad(pad)
        if applied is None:
            self.illegal_touch_count += 1
            events.append("illegal_touch")
            return 0.0, False
        events.append(f"move:{pad.id}")
        reward_abs = 0.0
        aux_done = False
        if self.aux is not None:
            if (same_position(applied, self.aux.target)
                    and self.step_index <= self.aux.deadline):
                reward_abs = self.config.aux_reward_scale
                events.append("aux_match")
            aux_done = True
        self.board = applied
        self._sync_stones(new_key=self._last_agent_key, color="agent")
        if not self._is_terminal():
            self._opponent_reply()
            events.append("opponent_move")
        self._teleport_arm()
        if not self._is_terminal() and self.planner is not None:
            self._issue_aux()
        return reward_abs, aux_done

    def _step_impl(self, controls: np.ndarray) -> StepResult:
        step_world(self.world, controls)
        self.step_index += 1
        events: list[str] = []
        reward_env = 0.0
        reward_abs = 0.0
        aux_done = False
        done = False

        pad = self._detect_pad()
        if pad is not None and self._prev_pad is None and not self._is_terminal():
            reward_abs, aux_done = self._register_move(pad, events)
            pad = self._detect_pad()  # the arm may have teleported
        self._prev_pad = pad

        if self._is_terminal():
            self._outcome, reward_env = self._terminal_outcome()
            events.append(f"game_over:{self._outcome}")
            done = True
        elif self.step_index >= self.time_limit:
            self._outcome = "timeout"
            reward_env = 0.0
            events.append("timeout")
            done = True

        if (not done and not aux_done and self.aux is not None
                and self.step_index >= self.aux.deadline):
            events.append("aux_timeout")
            aux_done = True
            self._issue_aux()

        info = {
            "abstract_state": abstract_digest(self.board),
            "game_outcome": self._outcome,
            "illegal_touch_count": self.illegal_touch_count,
            "events": events,
            "moves": self._move_count(),
        }
        return StepResult(self._observation(), reward_env, reward_abs, done,
                          aux_done, info)

    def _move_count(self) -> int:
        return 0

    def _board_planes(self) -> np.ndarray:
        raise NotImplementedError

    def _observation(self) -> Observation:
        arm = self.world.arm
        eff = arm_joint_positions(arm)[-1]
        proprio = np.concatenate([
            np.cos(arm.joint_angles), np.sin(arm.joint_angles),
            arm.joint_velocities, eff, [arm.press],
        ])
        board = self._board_planes()
        planner = None
        if self.planner is not None and self.aux is not None:
            planner = np.concatenate(
                [board, self._planes_of(self.aux.target)], axis=2)
        image = None
        if self.config.include_image:
            image = self.render_frame(self.config.image_size)
        return Observation(proprio, board, planner, None, image)

    def _planes_of(self, board) -> np.ndarray:
        raise NotImplementedError

    def render_frame(self, size: Optional[int] = None) -> np.ndarray:
        from embodied.raster import (
            ARM, BOARD, Canvas, STONE_BLACK, STONE_WHITE, PEG,
        )
        size = size or self.config.image_size
        canvas = Canvas(self.world.view_lo, self.world.view_hi, size)
        pitch = self._pitch()
        n = self._board_planes().shape[0]
        half = (n - 1) / 2 * pitch + pitch / 2
        canvas.fill_rect(BOARD_CENTER[0], BOARD_CENTER[1], half, half, BOARD)
        for pad in self.pads:
            if isinstance(pad.bound_move, str):
                canvas.fill_rect(pad.center[0], pad.center[1],
                                 pad.half_extent[0], pad.half_extent[1], PEG)
        for x, y, color in self.stones.values():
            canvas.fill_disc(x, y, pitch * 0.4,
                             STONE_BLACK if color == "agent" else STONE_WHITE)
        pts = arm_joint_positions(self.world.arm)
        for a, b in zip(pts, pts[1:]):
            steps = 12
            for k in range(steps + 1):
                p = a + (b - a) * (k / steps)
                canvas.fill_disc(p[0], p[1], 0.015, ARM)
        canvas.fill_disc(pts[-1][0], pts[-1][1], 0.03, ARM)
        return canvas.img


class MujoXoEnv(TouchBoardEnv):
    def __init__(self, config: EnvConfig):
        if config.game != "mujoxo":
            raise ValueError("MujoXoEnv requires game=mujoxo")
        super().__init__(config)

    def _new_board(self):
        return tictactoe.TttBoard()

    def _build_pads(self):
        return build_xo_pads()

    def _pitch(self) -> float:
        return XO_PITCH

    def _touch_points(self):
        pts = arm_joint_positions(self.world.arm)
        base, elbow, wrist, eff = pts
        return [eff, (wrist + eff) / 2, wrist, (elbow + wrist) / 2, elbow,
                (base + elbow) / 2]

    def _setup_opponent(self):
        cfg = OpponentConfig(epsilon=self.config.effective_opponent_epsilon,
                             seed=self._opponent_seed)
        self.opponent = EpsilonOpponent(minimax_policy, cfg, tictactoe.legal_moves)

    def _make_planner(self, rng):
        if self.config.planner_mode == "expert":
            return TttExpertPlanner()
        if self.config.planner_mode == "random":
            return TttRandomPlanner(rng)
        return None

    def _agent_move_for_pad(self, pad):
        cell = pad.bound_move
        if self.board.cells[cell] != tictactoe.EMPTY:
            return None
        self._last_agent_key = cell
        return tictactoe.apply_move(self.board, cell)

    def _opponent_reply(self):
        cell = self.opponent(self.board)
        self.board = tictactoe.apply_move(self.board, cell)
        self._sync_stones(new_key=cell, color="opponent")

    def _is_terminal(self):
        return tictactoe.outcome(self.board) is not tictactoe.Outcome.ONGOING

    def _terminal_outcome(self):
        result = tictactoe.outcome(self.board)
        if result is tictactoe.Outcome.X_WINS:
            return "win", 1.0
        if result is tictactoe.Outcome.DRAW:
            return "draw", 0.5
        return "loss", 0.0

    def _move_count(self):
        return 9 - self.board.cells.count(tictactoe.EMPTY)

    def _sync_stones(self, new_key=None, color=None):
        if new_key is not None:
            x, y = xo_pad_center(new_key)
            noise = self._placement_noise()
            self.stones[new_key] = (x + noise[0], y + noise[1], color)

    def _board_planes(self):
        planes = np.zeros((3, 3, 3))
        for i, v in enumerate(self.board.cells):
            planes[i // 3, i % 3, v] = 1.0
        return planes

    def _planes_of(self, board):
        planes = np.zeros((3, 3, 3))
        for i, v in enumerate(board.cells):
            planes[i // 3, i % 3, v] = 1.0
        return planes


class MujoGoEnv(TouchBoardEnv):
    def __init__(self, config: EnvConfig):
        if config.game != "mujogo":
            raise ValueError("MujoGoEnv requires game=mujogo")
        super().__init__(config)
        self.history: list[tuple[int, go.Move]] = []

    def _new_board(self):
        self.history = []
        return go.new_board(self.config.board_size)

    def _build_pads(self):
        return build_go_pads(self.config.board_size)

    def _pitch(self) -> float:
        return go_pitch(self.config.board_size)

    def _touch_points(self):
        # Only the effector segment registers moves.
        pts = arm_joint_positions(self.world.arm)
        _, _, wrist, eff = pts
        return [eff, (wrist + eff) / 2, wrist]

    def _setup_opponent(self):
        cfg = OpponentConfig(epsilon=self.config.effective_opponent_epsilon,
                             level=self.config.opponent_level,
                             seed=self._opponent_seed)
        self.opponent = GoExpertPlayer(cfg, self.config.engine_command)

    def _make_planner(self, rng):
        if self.config.planner_mode == "expert":
            expert = GoExpertPlayer(OpponentConfig(epsilon=0.0,
                                                   level=self.config.opponent_level,
                                                   seed=0),
                                    self.config.engine_command)
            return GoExpertPlanner(expert)
        if self.config.planner_mode == "random":
            return GoRandomPlanner(rng)
        return None

    def _history(self):
        return list(self.history)

    def _agent_move_for_pad(self, pad):
        move = pad.bound_move
        try:
            applied = go.apply_move(self.board, move)
        except go.IllegalGoMove:
            return None
        self._last_agent_key = move
        self.history.append((go.BLACK, move))
        return applied

    def _opponent_reply(self):
        move = self.opponent.move(self.board, self.history)
        self.board = go.apply_move(self.board, move)
        self.history.append((go.WHITE, move))
        self._sync_stones(new_key=move, color="opponent")

    def _is_terminal(self):
        return go.is_terminal(self.board)

    def _terminal_outcome(self):
        score = go.tromp_taylor_score(self.board)
        return ("win", 1.0) if score > 0 else ("loss", 0.0)

    def _move_count(self):
        return len(self.history)

    def _sync_stones(self, new_key=None, color=None):
        alive = {}
        black = go.stones(self.board, go.BLACK)
        white = go.stones(self.board, go.WHITE)
        for key, entry in self.stones.items():
            if key in black or key in white:
                alive[key] = entry
        self.stones = alive
        if new_key is not None and new_key != go.PASS:
            x, y = go_pad_center(new_key, self.board.size)
            noise = self._placement_noise()
            self.stones[new_key] = (x + noise[0], y + noise[1], color)

    def _board_planes(self):
        return self._planes_of(self.board)

    def _planes_of(self, board):
        n = board.size
        planes = np.zeros((n, n, 3))
        for idx, v in enumerate(board.cells):
            col, row = idx % n, idx // n
            planes[row, col, v] = 1.0
        return planes

    def to_sgf(self) -> str:
        result = ""
        if go.is_terminal(self.board):
            result = go.format_result(go.tromp_taylor_score(self.board))
        return go.to_sgf(self.board.size, self.board.komi, self.history, result)

    def close(self):
        self.opponent.close()
        if isinstance(self.planner, GoExpertPlanner):
            self.planner.player.close()

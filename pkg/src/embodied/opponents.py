"""Opponent policies: epsilon randomization, minimax, and the Go engine wrapper.

The Go opponent talks GTP to an external engine when one is configured
(per-move history replay keeps the exchange stateless); otherwise a
built-in fallback policy is used: capture if possible, else the 1-ply
move with the best Tromp-Taylor score, else pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from embodied import go, gtp, tictactoe
from embodied.go import BLACK, GoBoard, IllegalGoMove, Move, PASS
from embodied.minimax import ttt_minimax
from embodied.tictactoe import TttBoard


@dataclass(frozen=True)
class OpponentConfig:
    epsilon: float = 0.0
    level: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon {self.epsilon} outside [0, 1]")


class EpsilonOpponent:
    """Plays a uniform random legal move with probability epsilon, else the base move."""

    def __init__(self, base_policy: Callable, config: OpponentConfig,
                 legal_fn: Callable):
        self.base_policy = base_policy
        self.epsilon = config.epsilon
        self.legal_fn = legal_fn
        self.rng = np.random.default_rng(config.seed)

    def __call__(self, board):
        legal = self.legal_fn(board)
        if not legal:
            raise ValueError("no legal moves")
        if self.epsilon > 0 and self.rng.random() < self.epsilon:
            return legal[self.rng.integers(len(legal))]
        return self.base_policy(board)


def epsilon_opponent(base_policy: Callable, config: OpponentConfig,
                     board, legal_fn: Callable):
    """One-shot form of EpsilonOpponent (fresh rng from config.seed)."""
    return EpsilonOpponent(base_policy, config, legal_fn)(board)


def minimax_policy(board: TttBoard) -> int:
    return ttt_minimax(board)[0]


def make_ttt_opponent(config: OpponentConfig) -> EpsilonOpponent:
    return EpsilonOpponent(minimax_policy, config, tictactoe.legal_moves)


def _captures(board: GoBoard, move: Move) -> int:
    before = sum(1 for v in board.cells if v == go.opponent(board.to_move))
    after_board = go.apply_move(board, move)
    after = sum(1 for v in after_board.cells if v == go.opponent(board.to_move))
    return before - after


def fallback_go_policy(board: GoBoard) -> Move:
    """Capture if possible, else best 1-ply Tromp-Taylor score, else pass."""
    me = board.to_move
    sign = 1.0 if me == BLACK else -1.0
    best_capture: Optional[tuple[int, Move]] = None
    best_greedy: Optional[tuple[float, Move]] = None
    current = sign * go.tromp_taylor_score(board)
    for row in range(board.size):
        for col in range(board.size):
            move = (col, row)
            try:
                child = go.apply_move(board, move)
            except IllegalGoMove:
                continue
            captured = _captures(board, move)
            if captured > 0 and (best_capture is None or captured > best_capture[0]):
                best_capture = (captured, move)
            score = sign * go.tromp_taylor_score(child)
            if best_greedy is None or score > best_greedy[0]:
                best_greedy = (score, move)
    if best_capture is not None:
        return best_capture[1]
    if best_greedy is not None and best_greedy[0] > current:
        return best_greedy[1]
    return PASS


class GoExpertPlayer:
    """Move source for Go: an external GTP engine, or the built-in fallback.

    Each request replays the whole game to the engine (clear_board, komi,
    play...) so the exchange does not depend on engine-side state.
    """

    def __init__(self, config: OpponentConfig,
                 engine_command: Optional[str] = None,
                 timeout: float = gtp.DEFAULT_TIMEOUT):
        self.config = config
        self.engine_command = engine_command
        self.timeout = timeout
        self._session: Optional[gtp.GtpSession] = None
        self.rng = np.random.default_rng(config.seed)

    def _ensure_session(self) -> gtp.GtpSession:
        if self._session is None or not self._session.alive:
            self._session = gtp.gtp_connect(self.engine_command, self.timeout)
            self._session.send("protocol_version")
        return self._session

    def _engine_move(self, board: GoBoard, history: Sequence[tuple[int, Move]]) -> Move:
        session = self._ensure_session()
        session.send(f"boardsize {board.size}")
        session.send("clear_board")
        session.send(f"komi {board.komi}")
        if self.config.level is not None:
            try:
                session.send(f"level {self.config.level}")
            except gtp.GtpEngineError:
                pass  # optional command; engines without it keep their default
        for color, move in history:
            name = "black" if color == BLACK else "white"
            session.send(f"play {name} {gtp.format_move(move, board.size)}")
        me = "black" if board.to_move == BLACK else "white"
        reply = session.send(f"genmove {me}")
        if reply.lower() == "resign":
            return PASS
        return gtp.parse_vertex(reply, board.size)

    def move(self, board: GoBoard, history: Sequence[tuple[int, Move]]) -> Move:
        legal = go.legal_moves(board)
        if not legal:
            raise ValueError("no legal moves on a terminal board")
        if self.config.epsilon > 0 and self.rng.random() < self.config.epsilon:
            return legal[self.rng.integers(len(legal))]
        if self.engine_command:
            candidate = self._engine_move(board, history)
            if candidate not in legal:
                # Engines may answer with a move legal under their own rule
                # set but not under positional superko; fall back then.
                candidate = fallback_go_policy(board)
            return candidate
        return fallback_go_policy(board)

    def close(self):
        if self._session is not None:
            self._session.close()
            self._session = None

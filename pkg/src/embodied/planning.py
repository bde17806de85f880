"""Abstract planners: map a game state to a one-move-away target state.

Expert planners use the game solvers (A* for Sokoban, minimax for
tic-tac-toe, the engine/fallback player for Go); random planners pick a
uniform valid successor. Targets feed the auxiliary-task machinery and
the scripted controllers.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from embodied import go, sokoban, tictactoe
from embodied.minimax import ttt_minimax
from embodied.opponents import GoExpertPlayer
from embodied.solver import solve_sokoban

AbstractState = Union[sokoban.SokobanState, tictactoe.TttBoard, go.GoBoard]


def abstract_digest(state: AbstractState) -> str:
    if isinstance(state, sokoban.SokobanState):
        payload = f"skb:{state.player}:{sorted(state.boxes)}:{sorted(state.targets)}"
    elif isinstance(state, tictactoe.TttBoard):
        payload = f"ttt:{state.cells}:{state.to_move}"
    elif isinstance(state, go.GoBoard):
        payload = f"go:{state.size}:{state.cells}:{state.to_move}"
    else:
        raise TypeError(f"not an abstract state: {type(state)}")
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def same_position(a: AbstractState, b: AbstractState) -> bool:
    """Equality on the visible position (histories/counters ignored)."""
    if isinstance(a, sokoban.SokobanState):
        return (a.boxes, a.player) == (b.boxes, b.player)
    if isinstance(a, tictactoe.TttBoard):
        return a.cells == b.cells
    if isinstance(a, go.GoBoard):
        return a.cells == b.cells
    raise TypeError(f"not an abstract state: {type(a)}")


@dataclass(frozen=True)
class PlannerTarget:
    current_digest: str
    target: AbstractState
    action_hint: Optional[sokoban.Direction] = None


class NoValidTarget(RuntimeError):
    """The planner found no legal successor (terminal or deadlocked state)."""


class SokobanExpertPlanner:
    """Proposes the first move of an A* solution from the current state."""

    def __init__(self, node_budget: int = 100_000):
        self.node_budget = node_budget
        self._cache: dict[str, list[sokoban.Direction]] = {}

    def propose(self, state: sokoban.SokobanState, history=None) -> PlannerTarget:
        digest = abstract_digest(state)
        plan = self._cache.get(digest)
        if not plan:
            plan = solve_sokoban(state, node_budget=self.node_budget)
        if not plan:
            # Unsolvable or budget exhausted: fall back to any legal move so
            # the auxiliary stream keeps running after an abstract deadlock.
            moves = sokoban.legal_moves(state)
            if not moves:
                raise NoValidTarget("no legal sokoban move")
            plan = [moves[0]]
        action = plan[0]
        target = sokoban.apply_move(state, action)
        self._cache[abstract_digest(target)] = plan[1:]
        return PlannerTarget(digest, target, action)


class SokobanRandomPlanner:
    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def propose(self, state: sokoban.SokobanState, history=None) -> PlannerTarget:
        moves = sokoban.legal_moves(state)
        if not moves:
            raise NoValidTarget("no legal sokoban move")
        action = moves[self.rng.integers(len(moves))]
        return PlannerTarget(abstract_digest(state),
                             sokoban.apply_move(state, action), action)


class TttExpertPlanner:
    def propose(self, board: tictactoe.TttBoard, history=None) -> PlannerTarget:
        if tictactoe.outcome(board) is not tictactoe.Outcome.ONGOING:
            raise NoValidTarget("terminal board")
        move, _ = ttt_minimax(board)
        return PlannerTarget(abstract_digest(board),
                             tictactoe.apply_move(board, move))


class TttRandomPlanner:
    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def propose(self, board: tictactoe.TttBoard, history=None) -> PlannerTarget:
        moves = tictactoe.legal_moves(board)
        if not moves:
            raise NoValidTarget("terminal board")
        move = moves[self.rng.integers(len(moves))]
        return PlannerTarget(abstract_digest(board),
                             tictactoe.apply_move(board, move))


class GoExpertPlanner:
    """Suggests the engine's (or fallback's) move for the side to play."""

    def __init__(self, player: GoExpertPlayer):
        self.player = player

    def propose(self, board: go.GoBoard,
                history: Sequence[tuple[int, go.Move]] = ()) -> PlannerTarget:
        if go.is_terminal(board):
            raise NoValidTarget("terminal board")
        move = self.player.move(board, history or [])
        return PlannerTarget(abstract_digest(board), go.apply_move(board, move))


class GoRandomPlanner:
    """Uniform legal placement (pass excluded) for the side to play."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def propose(self, board: go.GoBoard, history=None) -> PlannerTarget:
        placements = [m for m in go.legal_moves(board) if m != go.PASS]
        if not placements:
            raise NoValidTarget("no legal placement")
        move = placements[self.rng.integers(len(placements))]
        return PlannerTarget(abstract_digest(board), go.apply_move(board, move))


def random_planner(abstract_state: AbstractState,
                   rng: Optional[np.random.Generator] = None) -> PlannerTarget:
    """Uniform one-move successor of any supported abstract state."""
    rng = rng or np.random.default_rng()
    if isinstance(abstract_state, sokoban.SokobanState):
        return SokobanRandomPlanner(rng).propose(abstract_state)
    if isinstance(abstract_state, tictactoe.TttBoard):
        return TttRandomPlanner(rng).propose(abstract_state)
    if isinstance(abstract_state, go.GoBoard):
        return GoRandomPlanner(rng).propose(abstract_state)
    raise TypeError(f"not an abstract state: {type(abstract_state)}")

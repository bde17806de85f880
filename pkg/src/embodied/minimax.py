"""Perfect-play tic-tac-toe via memoized full-depth minimax."""

from __future__ import annotations

import functools

from embodied.tictactoe import EMPTY, X, Outcome, TttBoard, apply_move, outcome


@functools.lru_cache(maxsize=None)
def _value(cells: tuple[int, ...], to_move: int) -> int:
    """Game value for the side to move: +1 win, 0 draw, -1 loss."""
    board = TttBoard(cells, to_move)
    result = outcome(board)
    if result is Outcome.DRAW:
        return 0
    if result is not Outcome.ONGOING:
        won_by_x = result is Outcome.X_WINS
        return 1 if won_by_x == (to_move == X) else -1
    best = -2
    for cell in range(9):
        if cells[cell] == EMPTY:
            child = apply_move(board, cell)
            best = max(best, -_value(child.cells, child.to_move))
            if best == 1:
                break
    return best


def ttt_minimax(board: TttBoard) -> tuple[int, int]:
    """Optimal (move, value) for the side to move; ties break to the lowest cell."""
    if outcome(board) is not Outcome.ONGOING:
        raise ValueError("minimax called on a terminal board")
    best_move, best_value = -1, -2
    for cell in range(9):
        if board.cells[cell] != EMPTY:
            continue
        child = apply_move(board, cell)
        value = -_value(child.cells, child.to_move)
        if value > best_value:
            best_move, best_value = cell, value
    return best_move, best_value

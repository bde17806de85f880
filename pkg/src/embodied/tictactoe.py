"""Tic-tac-toe rules on a 9-cell board."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

EMPTY, X, O = 0, 1, 2

LINES = ((0, 1, 2), (3, 4, 5), (6, 7, 8),
         (0, 3, 6), (1, 4, 7), (2, 5, 8),
         (0, 4, 8), (2, 4, 6))


class Outcome(Enum):
    ONGOING = "ongoing"
    X_WINS = "x_wins"
    O_WINS = "o_wins"
    DRAW = "draw"


class IllegalTttMove(Exception):
    pass


@dataclass(frozen=True)
class TttBoard:
    cells: tuple[int, ...] = (EMPTY,) * 9
    to_move: int = X

    def __post_init__(self):
        if len(self.cells) != 9:
            raise ValueError("board has 9 cells")
        x, o = self.cells.count(X), self.cells.count(O)
        if x - o not in (0, 1):
            raise ValueError(f"impossible mark counts: {x} X vs {o} O")


def apply_move(board: TttBoard, cell: int) -> TttBoard:
    if not 0 <= cell < 9:
        raise IllegalTttMove(f"cell {cell} out of range")
    if board.cells[cell] != EMPTY:
        raise IllegalTttMove(f"cell {cell} is occupied")
    cells = list(board.cells)
    cells[cell] = board.to_move
    return TttBoard(tuple(cells), O if board.to_move == X else X)


def legal_moves(board: TttBoard) -> list[int]:
    if outcome(board) is not Outcome.ONGOING:
        return []
    return [i for i in range(9) if board.cells[i] == EMPTY]


def outcome(board: TttBoard) -> Outcome:
    for a, b, c in LINES:
        v = board.cells[a]
        if v != EMPTY and v == board.cells[b] == board.cells[c]:
            return Outcome.X_WINS if v == X else Outcome.O_WINS
    if EMPTY not in board.cells:
        return Outcome.DRAW
    return Outcome.ONGOING

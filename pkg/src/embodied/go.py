"""Go rules: Tromp-Taylor scoring, suicide allowed, positional superko.

Vertices are ``(col, row)`` with row 0 the bottom row (GTP row "1").
Boards are immutable; ``apply_move`` returns a new board. Position
repetition is tracked with an incrementally updated 64-bit Zobrist
digest; a collision would wrongly flag a move as superko, which tests
cross-check against full-board comparison.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

EMPTY, BLACK, WHITE = 0, 1, 2

PASS = "pass"
Vertex = tuple[int, int]
Move = Union[Vertex, str]

DEFAULT_KOMI = 5.5


class IllegalGoMove(Exception):
    pass


def opponent(color: int) -> int:
    return WHITE if color == BLACK else BLACK


@functools.lru_cache(maxsize=None)
def _neighbors(size: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for idx in range(size * size):
        col, row = idx % size, idx // size
        adj = []
        if col > 0:
            adj.append(idx - 1)
        if col < size - 1:
            adj.append(idx + 1)
        if row > 0:
            adj.append(idx - size)
        if row < size - 1:
            adj.append(idx + size)
        out.append(tuple(adj))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def _zobrist_keys(size: int) -> tuple[tuple[int, int], ...]:
    rng = np.random.default_rng(0x60BADD1CE ^ size)
    keys = rng.integers(1, 2**63, size=(size * size, 2), dtype=np.int64)
    return tuple((int(a), int(b)) for a, b in keys)


def _digest(size: int, cells: tuple[int, ...]) -> int:
    keys = _zobrist_keys(size)
    h = 0
    for idx, v in enumerate(cells):
        if v != EMPTY:
            h ^= keys[idx][v - 1]
    return h


@dataclass(frozen=True)
class GoBoard:
    size: int
    cells: tuple[int, ...]
    to_move: int
    position_history: frozenset[int]
    consecutive_passes: int
    komi: float
    digest: int


def new_board(size: int = 7, komi: float = DEFAULT_KOMI) -> GoBoard:
    if size < 5:
        raise ValueError("board sizes below 5 are not supported")
    cells = (EMPTY,) * (size * size)
    return GoBoard(size, cells, BLACK, frozenset({0}), 0, komi, 0)


def is_terminal(board: GoBoard) -> bool:
    return board.consecutive_passes >= 2


def _index(board: GoBoard, vertex: Vertex) -> int:
    col, row = vertex
    if not (0 <= col < board.size and 0 <= row < board.size):
        raise IllegalGoMove(f"vertex {vertex} off the board")
    return row * board.size + col


def _group(size: int, cells, start: int) -> tuple[set[int], set[int]]:
    """Connected group of stones at ``start`` and its liberty set."""
    color = cells[start]
    nbrs = _neighbors(size)
    group, libs = {start}, set()
    stack = [start]
    while stack:
        idx = stack.pop()
        for n in nbrs[idx]:
            v = cells[n]
            if v == EMPTY:
                libs.add(n)
            elif v == color and n not in group:
                group.add(n)
                stack.append(n)
    return group, libs


def apply_move(board: GoBoard, move: Move, allow_suicide: bool = True) -> GoBoard:
    """Apply a vertex placement or PASS; raises IllegalGoMove on violations.

    Full Tromp-Taylor permits suicide (the own group is removed); pass
    allow_suicide=False for rule sets that forbid it.
    """
    if is_terminal(board):
        raise ValueError("move applied to a terminal board")
    me, opp = board.to_move, opponent(board.to_move)
    if move == PASS:
        return GoBoard(board.size, board.cells, opp, board.position_history,
                       board.consecutive_passes + 1, board.komi, board.digest)

    idx = _index(board, move)
    if board.cells[idx] != EMPTY:
        raise IllegalGoMove(f"vertex {move} is occupied")

    keys = _zobrist_keys(board.size)
    cells = list(board.cells)
    cells[idx] = me
    digest = board.digest ^ keys[idx][me - 1]

    for n in _neighbors(board.size)[idx]:
        if cells[n] == opp:
            group, libs = _group(board.size, cells, n)
            if not libs:
                for g in group:
                    cells[g] = EMPTY
                    digest ^= keys[g][opp - 1]
    group, libs = _group(board.size, cells, idx)
    if not libs:
        if not allow_suicide:
            raise IllegalGoMove(f"move {move} is suicide")
        for g in group:
            cells[g] = EMPTY
            digest ^= keys[g][me - 1]

    if digest in board.position_history:
        raise IllegalGoMove(f"move {move} repeats a previous position (superko)")
    return GoBoard(board.size, tuple(cells), opp,
                   board.position_history | {digest}, 0, board.komi, digest)


def legal_moves(board: GoBoard, allow_suicide: bool = True) -> list[Move]:
    """Moves for which apply_move succeeds, plus PASS on non-terminal boards."""
    if is_terminal(board):
        return []
    moves: list[Move] = []
    for row in range(board.size):
        for col in range(board.size):
            try:
                apply_move(board, (col, row), allow_suicide)
            except IllegalGoMove:
                continue
            moves.append((col, row))
    moves.append(PASS)
    return moves


def tromp_taylor_score(board: GoBoard, komi: Optional[float] = None) -> float:
    """Area score, positive means Black leads.

    A point counts for a color if occupied by it, or empty and reaching
    only that color through 4-connected empty paths.
    """
    komi = board.komi if komi is None else komi
    size, cells = board.size, board.cells
    nbrs = _neighbors(size)
    black = sum(1 for v in cells if v == BLACK)
    white = sum(1 for v in cells if v == WHITE)
    seen = set()
    for start in range(size * size):
        if cells[start] != EMPTY or start in seen:
            continue
        region = {start}
        stack = [start]
        reaches = set()
        while stack:
            idx = stack.pop()
            for n in nbrs[idx]:
                v = cells[n]
                if v == EMPTY:
                    if n not in region:
                        region.add(n)
                        stack.append(n)
                else:
                    reaches.add(v)
        seen |= region
        if reaches == {BLACK}:
            black += len(region)
        elif reaches == {WHITE}:
            white += len(region)
    return black - white - komi


def stones(board: GoBoard, color: int) -> set[Vertex]:
    return {(i % board.size, i // board.size)
            for i, v in enumerate(board.cells) if v == color}


_SGF_COORDS = "abcdefghijklmnopqrs"


def to_sgf(size: int, komi: float, moves: Iterable[tuple[int, Move]],
           result: str = "") -> str:
    """Minimal SGF export (SZ, KM, B[]/W[] nodes, RE)."""
    props = [f"(;GM[1]FF[4]SZ[{size}]KM[{komi}]"]
    if result:
        props.append(f"RE[{result}]")
    for color, move in moves:
        tag = "B" if color == BLACK else "W"
        if move == PASS:
            props.append(f";{tag}[]")
        else:
            col, row = move
            # SGF rows count from the top.
            props.append(f";{tag}[{_SGF_COORDS[col]}{_SGF_COORDS[size - 1 - row]}]")
    return "".join(props) + ")"


def format_result(score: float) -> str:
    if score > 0:
        return f"B+{score}"
    if score < 0:
        return f"W+{-score}"
    return "0"

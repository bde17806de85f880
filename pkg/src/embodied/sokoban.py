"""Sokoban rules, Boxoban-format level text, and level generation.

Cells are ``(row, col)`` with row 0 at the top line of the level text.
States are immutable; applying a move returns a new state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional

import numpy as np

WALL, FLOOR, TARGET, BOX, BOX_ON_TARGET, PLAYER, PLAYER_ON_TARGET = "# .$*@+"
_CHARSET = set("#.$*@+ ")

Cell = tuple[int, int]


class Direction(Enum):
    NORTH = (-1, 0)
    EAST = (0, 1)
    SOUTH = (1, 0)
    WEST = (0, -1)

    @property
    def delta(self) -> Cell:
        return self.value

    @property
    def opposite(self) -> "Direction":
        dr, dc = self.value
        return _BY_DELTA[(-dr, -dc)]


_BY_DELTA = {d.value: d for d in Direction}
DIRECTIONS = tuple(Direction)


class IllegalMove(Exception):
    """A Sokoban move blocked by a wall or an unpushable box."""


class LevelParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class LevelGenerationError(RuntimeError):
    """Procedural generation failed to produce a solver-verified level."""


@dataclass(frozen=True)
class SokobanState:
    width: int
    height: int
    walls: frozenset[Cell]
    targets: frozenset[Cell]
    boxes: frozenset[Cell]
    player: Cell

    def in_bounds(self, cell: Cell) -> bool:
        r, c = cell
        return 0 <= r < self.height and 0 <= c < self.width

    def is_free(self, cell: Cell) -> bool:
        """Free for the player or a pushed box: in bounds, no wall, no box."""
        return self.in_bounds(cell) and cell not in self.walls and cell not in self.boxes

    def validate(self) -> "SokobanState":
        cells = list(self.walls) + list(self.boxes) + [self.player] + list(self.targets)
        if not all(self.in_bounds(c) for c in cells):
            raise ValueError("cell out of bounds")
        if self.player in self.walls or self.player in self.boxes:
            raise ValueError("player overlaps a wall or box")
        if self.walls & self.boxes:
            raise ValueError("box overlaps a wall")
        if len(self.boxes) != len(self.targets):
            raise ValueError("box/target count mismatch")
        for r in range(self.height):
            for c in (0, self.width - 1):
                if (r, c) not in self.walls:
                    raise ValueError(f"boundary cell ({r},{c}) is not a wall")
        for c in range(self.width):
            for r in (0, self.height - 1):
                if (r, c) not in self.walls:
                    raise ValueError(f"boundary cell ({r},{c}) is not a wall")
        return self


def apply_move(state: SokobanState, direction: Direction) -> SokobanState:
    """One player move; pushes a single box if one is in the way.

    Raises IllegalMove (state unchanged) when the destination is a wall,
    or holds a box that cannot move into the next cell.
    """
    dr, dc = direction.delta
    r, c = state.player
    dest = (r + dr, c + dc)
    if not state.in_bounds(dest) or dest in state.walls:
        raise IllegalMove(f"blocked by wall at {dest}")
    if dest in state.boxes:
        beyond = (dest[0] + dr, dest[1] + dc)
        if not state.is_free(beyond):
            raise IllegalMove(f"box at {dest} cannot move to {beyond}")
        boxes = (state.boxes - {dest}) | {beyond}
        return replace(state, boxes=frozenset(boxes), player=dest)
    return replace(state, player=dest)


def legal_moves(state: SokobanState) -> list[Direction]:
    moves = []
    for d in DIRECTIONS:
        try:
            apply_move(state, d)
        except IllegalMove:
            continue
        moves.append(d)
    return moves


def is_solved(state: SokobanState) -> bool:
    return state.boxes == state.targets


def parse_level(text: str) -> SokobanState:
    """Parse one Boxoban-format level (``#``, ``.``, ``$``, ``@``, ``*``, ``+``, space)."""
    lines = [ln.rstrip("\n") for ln in text.strip("\n").split("\n")]
    if not lines or not lines[0]:
        raise LevelParseError("empty level", 1, 1)
    width = len(lines[0])
    walls, targets, boxes = set(), set(), set()
    player = None
    for r, line in enumerate(lines):
        if len(line) != width:
            raise LevelParseError(
                f"non-rectangular grid: row has width {len(line)}, expected {width}",
                r + 1, len(line) + 1)
        for c, ch in enumerate(line):
            if ch not in _CHARSET:
                raise LevelParseError(f"unknown character {ch!r}", r + 1, c + 1)
            cell = (r, c)
            if ch == WALL:
                walls.add(cell)
            elif ch in (TARGET, BOX_ON_TARGET, PLAYER_ON_TARGET):
                targets.add(cell)
            if ch in (BOX, BOX_ON_TARGET):
                boxes.add(cell)
            if ch in (PLAYER, PLAYER_ON_TARGET):
                if player is not None:
                    raise LevelParseError("second player", r + 1, c + 1)
                player = cell
    if player is None:
        raise LevelParseError("missing player", len(lines), 1)
    if len(boxes) != len(targets):
        raise LevelParseError(
            f"{len(boxes)} boxes but {len(targets)} targets", len(lines), 1)
    state = SokobanState(width, len(lines), frozenset(walls), frozenset(targets),
                         frozenset(boxes), player)
    try:
        return state.validate()
    except ValueError as e:
        raise LevelParseError(str(e), len(lines), 1) from e


def format_level(state: SokobanState) -> str:
    rows = []
    for r in range(state.height):
        row = []
        for c in range(state.width):
            cell = (r, c)
            if cell in state.walls:
                ch = WALL
            elif cell == state.player:
                ch = PLAYER_ON_TARGET if cell in state.targets else PLAYER
            elif cell in state.boxes:
                ch = BOX_ON_TARGET if cell in state.targets else BOX
            elif cell in state.targets:
                ch = TARGET
            else:
                ch = FLOOR
            row.append(ch)
        rows.append("".join(row))
    return "\n".join(rows)


def parse_levels(text: str) -> list[SokobanState]:
    """Parse a Boxoban file: blocks separated by lines starting with ``;``."""
    blocks: list[list[str]] = [[]]
    for line in text.split("\n"):
        if line.startswith(";"):
            blocks.append([])
        else:
            blocks[-1].append(line)
    levels = []
    for block in blocks:
        body = "\n".join(block).strip("\n")
        if body.strip():
            levels.append(parse_level(body))
    return levels


def format_levels(levels: Iterable[SokobanState]) -> str:
    out = []
    for i, lvl in enumerate(levels):
        out.append(f"; {i}")
        out.append(format_level(lvl))
    return "\n".join(out) + "\n"


def pad_level(state: SokobanState, size: int = 10) -> SokobanState:
    """Pad a small level with walls up to ``size`` x ``size`` (anchored top-left)."""
    if state.width > size or state.height > size:
        raise ValueError(f"level {state.width}x{state.height} exceeds pad size {size}")
    if state.width == size and state.height == size:
        return state
    walls = set(state.walls)
    for r in range(size):
        for c in range(size):
            if r >= state.height or c >= state.width:
                walls.add((r, c))
    return SokobanState(size, size, frozenset(walls), state.targets, state.boxes,
                        state.player)


@dataclass(frozen=True)
class LevelSpec:
    difficulty: int
    grid_size: int
    num_boxes: int
    training_ratio: float


CURRICULUM = (
    LevelSpec(1, 5, 1, 0.25),
    LevelSpec(2, 7, 1, 0.25),
    LevelSpec(3, 7, 2, 0.2),
    LevelSpec(4, 8, 3, 0.2),
    LevelSpec(5, 10, 4, 0.1),
)


def level_spec(difficulty: int) -> LevelSpec:
    for spec in CURRICULUM:
        if spec.difficulty == difficulty:
            return spec
    raise ValueError(f"unknown difficulty {difficulty}")


# Reverse-play pull counts per difficulty; larger counts push the boxes
# further from their targets and make random play less likely to solve.
_PULLS_BY_DIFFICULTY = {1: 5, 2: 8, 3: 10, 4: 12, 5: 16}
_WALL_FRACTION = 0.12
_GENERATION_NODE_BUDGET = 30_000
_MAX_ATTEMPTS = 200


def _connected(floor: set[Cell]) -> bool:
    if not floor:
        return False
    start = next(iter(floor))
    seen = {start}
    stack = [start]
    while stack:
        r, c = stack.pop()
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            n = (r + dr, c + dc)
            if n in floor and n not in seen:
                seen.add(n)
                stack.append(n)
    return seen == floor


def _candidate(rng: np.random.Generator, spec: LevelSpec) -> Optional[SokobanState]:
    n = spec.grid_size
    walls = {(r, c) for r in range(n) for c in range(n)
             if r in (0, n - 1) or c in (0, n - 1)}
    interior = [(r, c) for r in range(1, n - 1) for c in range(1, n - 1)]
    for cell in interior:
        if rng.random() < _WALL_FRACTION:
            walls.add(cell)
    floor = {c for c in interior if c not in walls}
    if len(floor) < spec.num_boxes * 2 + 2 or not _connected(floor):
        return None

    order = rng.permutation(len(interior))
    targets = []
    for idx in order:
        cell = interior[idx]
        if cell in floor:
            targets.append(cell)
        if len(targets) == spec.num_boxes:
            break
    if len(targets) < spec.num_boxes:
        return None
    boxes = set(targets)

    starts = [c for c in floor if c not in boxes]
    if not starts:
        return None
    player = starts[rng.integers(len(starts))]

    # Reverse play: walk the player backwards, pulling boxes off their
    # targets.  Every pull has a forward push undoing it, so the result is
    # solvable by construction (still verified by the solver below).
    pulls_wanted = _PULLS_BY_DIFFICULTY[spec.difficulty]
    pulls_done = 0
    for _ in range(pulls_wanted * 12):
        if pulls_done >= pulls_wanted:
            break
        candidates = []
        for d in DIRECTIONS:
            dr, dc = d.delta
            back = (player[0] - dr, player[1] - dc)
            if back in walls or back in boxes or not (0 <= back[0] < n and 0 <= back[1] < n):
                continue
            ahead = (player[0] + dr, player[1] + dc)
            is_pull = ahead in boxes
            candidates.append((d, back, is_pull))
        if not candidates:
            break
        pullers = [c for c in candidates if c[2]]
        pool = pullers if pullers and rng.random() < 0.7 else candidates
        d, back, is_pull = pool[rng.integers(len(pool))]
        if is_pull:
            dr, dc = d.delta
            boxes.discard((player[0] + dr, player[1] + dc))
            boxes.add(player)
            pulls_done += 1
        player = back

    if pulls_done == 0:
        return None
    state = SokobanState(n, n, frozenset(walls), frozenset(targets),
                         frozenset(boxes), player)
    if is_solved(state):
        return None
    return state


def generate_level(seed: int, spec: LevelSpec,
                   node_budget: int = _GENERATION_NODE_BUDGET) -> SokobanState:
    """Generate a solver-verified level. Deterministic in ``seed``."""
    from embodied.solver import solve_sokoban

    for attempt in range(_MAX_ATTEMPTS):
        rng = np.random.default_rng([abs(int(seed)) % (2**63), attempt])
        state = _candidate(rng, spec)
        if state is None:
            continue
        plan = solve_sokoban(state, node_budget=node_budget)
        if plan is not None:
            return state
    raise LevelGenerationError(
        f"no solvable level after {_MAX_ATTEMPTS} attempts (seed={seed}, "
        f"difficulty={spec.difficulty})")

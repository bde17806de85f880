"""A* Sokoban solver over push sequences, with simple-deadlock pruning.

Search states are (player region, box set); successors are single box
pushes whose pushing cell the player can reach. Plans are expanded back
to player moves, so replaying them through ``sokoban.apply_move`` from
the start state reaches a solved state.
"""

from __future__ import annotations

import heapq
from collections import deque
from typing import Optional

from embodied.sokoban import (
    DIRECTIONS, Cell, Direction, SokobanState, is_solved,
)

_DELTAS = tuple(d.value for d in DIRECTIONS)
_BY_DELTA = {d.value: d for d in DIRECTIONS}


def bfs_path(state: SokobanState, start: Cell, goal: Cell,
             extra_blocked: frozenset[Cell] = frozenset()) -> Optional[list[Cell]]:
    """Shortest path over floor cells (walls and boxes block), incl. endpoints."""
    blocked = state.walls | state.boxes | extra_blocked
    if start == goal:
        return [start]
    if goal in blocked:
        return None
    parent: dict[Cell, Cell] = {start: start}
    queue = deque([start])
    while queue:
        cell = queue.popleft()
        for dr, dc in _DELTAS:
            n = (cell[0] + dr, cell[1] + dc)
            if n in parent or n in blocked or not state.in_bounds(n):
                continue
            parent[n] = cell
            if n == goal:
                path = [n]
                while path[-1] != start:
                    path.append(parent[path[-1]])
                return path[::-1]
            queue.append(n)
    return None


def dead_cells(state: SokobanState) -> frozenset[Cell]:
    """Non-target cells where a box is wedged in a corner (simple deadlock)."""
    dead = set()
    for r in range(state.height):
        for c in range(state.width):
            cell = (r, c)
            if cell in state.walls or cell in state.targets:
                continue
            n = (r - 1, c) in state.walls or not state.in_bounds((r - 1, c))
            s = (r + 1, c) in state.walls or not state.in_bounds((r + 1, c))
            w = (r, c - 1) in state.walls or not state.in_bounds((r, c - 1))
            e = (r, c + 1) in state.walls or not state.in_bounds((r, c + 1))
            if (n or s) and (w or e):
                dead.add(cell)
    return frozenset(dead)


def _reachable(walls, boxes, width, height, player):
    """Player-reachable floor cells and BFS parents for path reconstruction."""
    parent = {player: player}
    queue = deque([player])
    while queue:
        cell = queue.popleft()
        r, c = cell
        for dr, dc in _DELTAS:
            n = (r + dr, c + dc)
            if (n in parent or n in walls or n in boxes
                    or not (0 <= n[0] < height and 0 <= n[1] < width)):
                continue
            parent[n] = cell
            queue.append(n)
    return parent


def _heuristic(boxes, targets) -> int:
    total = 0
    for br, bc in boxes:
        total += min(abs(br - tr) + abs(bc - tc) for tr, tc in targets)
    return total


def _trace(parent, start, end) -> list[Cell]:
    path = [end]
    while path[-1] != start:
        path.append(parent[path[-1]])
    return path[::-1]


def _cells_to_moves(path: list[Cell]) -> list[Direction]:
    return [_BY_DELTA[(r1 - r0, c1 - c0)]
            for (r0, c0), (r1, c1) in zip(path, path[1:])]


def solve_sokoban(state: SokobanState,
                  node_budget: int = 100_000) -> Optional[list[Direction]]:
    """Plan player moves solving the level, or None (budget hit / unsolvable)."""
    if is_solved(state):
        return []
    dead = dead_cells(state)
    if any(b in dead for b in state.boxes):
        return None
    walls, targets = state.walls, state.targets
    width, height = state.width, state.height

    start_boxes = state.boxes
    # Node: (f, tiebreak, boxes, player, moves-so-far)
    counter = 0
    open_heap = [(_heuristic(start_boxes, targets), 0, start_boxes, state.player, [])]
    best_g: dict[tuple, int] = {}
    expanded = 0
    while open_heap:
        f, _, boxes, player, moves = heapq.heappop(open_heap)
        g = len(moves)
        reach = _reachable(walls, boxes, width, height, player)
        key = (boxes, min(reach))
        if key in best_g and best_g[key] <= g:
            continue
        best_g[key] = g
        expanded += 1
        if expanded > node_budget:
            return None
        for box in boxes:
            for d in DIRECTIONS:
                dr, dc = d.delta
                dest = (box[0] + dr, box[1] + dc)
                push_from = (box[0] - dr, box[1] - dc)
                if push_from not in reach or dest in dead:
                    continue
                if (dest in walls or dest in boxes
                        or not (0 <= dest[0] < height and 0 <= dest[1] < width)):
                    continue
                new_boxes = (boxes - {box}) | {dest}
                walk = _trace(reach, player, push_from)
                new_moves = moves + _cells_to_moves(walk) + [d]
                if new_boxes == targets:
                    return new_moves
                counter += 1
                h = _heuristic(new_boxes, targets)
                heapq.heappush(open_heap,
                               (len(new_moves) + h, counter,
                                frozenset(new_boxes), box, new_moves))
    return None

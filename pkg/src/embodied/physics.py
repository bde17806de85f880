"""Deterministic fixed-timestep planar physics.

Bodies are discs (the walker, pegs) and axis-aligned non-rotating
squares (boxes, walls). Contact is resolved by positional projection
with no restitution; boxes move only when pushed into, so pulling a box
is impossible by construction. Pegs block boxes but not the walker.
The inner stepping loop is JIT-compiled; evolution is a pure function
of (world state, controls) and replays bit-identically.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from numba import njit

CELL = 1.0
WALL_HALF = 0.5
BOX_HALF = 0.35
WALKER_RADIUS = 0.25
PEG_RADIUS = 0.08
CONTROL_DT = 0.05
SUBSTEPS = 10
WALKER_MAX_SPEED = 1.0
ARM_SPEED_LIMIT = 2.0
PRESS_THRESHOLD = 0.5
RESOLUTION_TOL = 1e-6

_WALKER, _BOX, _PEG, _WALL = 0, 1, 2, 3
_KIND_CODE = {"walker-disc": _WALKER, "box": _BOX, "peg": _PEG, "wall": _WALL}
_KIND_NAME = {v: k for k, v in _KIND_CODE.items()}


class BodyKind(str, Enum):
    WALKER = "walker-disc"
    BOX = "box"
    PEG = "peg"
    WALL = "wall"


@dataclass
class Body:
    id: str
    kind: str
    position: tuple[float, float]
    velocity: tuple[float, float] = (0.0, 0.0)
    half_extent: float = BOX_HALF
    movable: bool = False

    def __post_init__(self):
        kind = self.kind.value if isinstance(self.kind, BodyKind) else self.kind
        if kind not in _KIND_CODE:
            raise ValueError(f"unknown body kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.half_extent <= 0:
            raise ValueError("half_extent must be positive")
        if kind in ("peg", "wall"):
            if self.movable or self.velocity != (0.0, 0.0):
                raise ValueError(f"{kind} bodies are immovable with zero velocity")
        else:
            self.movable = True


@dataclass
class ArmConfig:
    joint_angles: np.ndarray
    joint_velocities: np.ndarray = None
    press: float = 0.0
    link_lengths: np.ndarray = None
    base: np.ndarray = None
    speed_limit: float = ARM_SPEED_LIMIT

    def __post_init__(self):
        self.joint_angles = wrap_angles(np.asarray(self.joint_angles, dtype=float))
        if self.joint_velocities is None:
            self.joint_velocities = np.zeros_like(self.joint_angles)
        self.joint_velocities = np.asarray(self.joint_velocities, dtype=float)
        if self.link_lengths is None:
            self.link_lengths = np.array([0.4, 0.4, 0.2])
        self.link_lengths = np.asarray(self.link_lengths, dtype=float)
        if self.base is None:
            self.base = np.zeros(2)
        self.base = np.asarray(self.base, dtype=float)


@dataclass(frozen=True)
class TouchPad:
    id: str
    center: tuple[float, float]
    half_extent: tuple[float, float]
    bound_move: object


def wrap_angles(angles: np.ndarray) -> np.ndarray:
    """Wrap to (-pi, pi]."""
    wrapped = np.mod(-np.asarray(angles) + np.pi, 2 * np.pi)
    return -(wrapped - np.pi)


def arm_forward_kinematics(arm: ArmConfig) -> np.ndarray:
    """End-effector position of the planar chain."""
    return arm_joint_positions(arm)[-1]


def arm_joint_positions(arm: ArmConfig) -> np.ndarray:
    """Positions of base, elbow, wrist, effector: shape (4, 2)."""
    pts = [np.array(arm.base, dtype=float)]
    angle = 0.0
    for theta, length in zip(arm.joint_angles, arm.link_lengths):
        angle += theta
        pts.append(pts[-1] + length * np.array([math.cos(angle), math.sin(angle)]))
    return np.stack(pts)


def arm_jacobian(arm: ArmConfig) -> np.ndarray:
    """2x3 positional Jacobian of the effector wrt joint angles."""
    pts = arm_joint_positions(arm)
    eff = pts[-1]
    jac = np.zeros((2, len(arm.joint_angles)))
    for j in range(len(arm.joint_angles)):
        r = eff - pts[j]
        jac[0, j] = -r[1]
        jac[1, j] = r[0]
    return jac


def validate_pads(pads: Sequence[TouchPad]):
    """Pads bound to distinct moves must not overlap in their interiors."""
    for i, a in enumerate(pads):
        for b in pads[i + 1:]:
            if a.bound_move == b.bound_move:
                continue
            tol = 1e-9  # exactly-adjacent pads share edges, not interiors
            if (abs(a.center[0] - b.center[0]) < a.half_extent[0] + b.half_extent[0] - tol
                    and abs(a.center[1] - b.center[1]) < a.half_extent[1] + b.half_extent[1] - tol):
                raise ValueError(f"pads {a.id} and {b.id} overlap")


def detect_pad_touch(effector: Sequence[float], press: float,
                     pads: Sequence[TouchPad],
                     press_threshold: float = PRESS_THRESHOLD) -> Optional[str]:
    """Pad containing the effector (min edge inclusive, max exclusive), if pressed."""
    if press < press_threshold:
        return None
    x, y = float(effector[0]), float(effector[1])
    for pad in pads:
        if (pad.center[0] - pad.half_extent[0] <= x < pad.center[0] + pad.half_extent[0]
                and pad.center[1] - pad.half_extent[1] <= y < pad.center[1] + pad.half_extent[1]):
            return pad.id
    return None


@njit(cache=True)
def _circle_aabb(cx, cy, r, bx, by, h):
    """Overlap of a disc with a square; normal points disc -> square."""
    px = min(max(cx, bx - h), bx + h)
    py = min(max(cy, by - h), by + h)
    dx = px - cx
    dy = py - cy
    d2 = dx * dx + dy * dy
    if d2 > 1e-24:
        if d2 >= r * r:
            return 0.0, 0.0, 0.0
        dist = math.sqrt(d2)
        return r - dist, dx / dist, dy / dist
    # centre inside the square: least-penetrated axis
    ox = h + r - abs(cx - bx)
    oy = h + r - abs(cy - by)
    if ox <= oy:
        return ox, (1.0 if bx >= cx else -1.0), 0.0
    return oy, 0.0, (1.0 if by >= cy else -1.0)


@njit(cache=True)
def _aabb_aabb(ax, ay, ah, bx, by, bh):
    """Overlap of two squares; normal points a -> b along least penetration."""
    ox = ah + bh - abs(ax - bx)
    if ox <= 0.0:
        return 0.0, 0.0, 0.0
    oy = ah + bh - abs(ay - by)
    if oy <= 0.0:
        return 0.0, 0.0, 0.0
    if ox <= oy:
        return ox, (1.0 if bx >= ax else -1.0), 0.0
    return oy, 0.0, (1.0 if by >= ay else -1.0)


@njit(cache=True)
def _grid_cell(x, y, ox, oy, inv, gw, gh):
    gx = int(math.floor((x - ox) * inv))
    gy = int(math.floor((y - oy) * inv))
    if gx < 0:
        gx = 0
    if gx >= gw:
        gx = gw - 1
    if gy < 0:
        gy = 0
    if gy >= gh:
        gy = gh - 1
    return gy * gw + gx


@njit(cache=True)
def _project_disc_statics(pos, half, kind, i, cell_start, cell_items,
                          ox, oy, inv, gw, gh):
    touched = False
    for _ in range(2):
        c = _grid_cell(pos[i, 0], pos[i, 1], ox, oy, inv, gw, gh)
        for k in range(cell_start[c], cell_start[c + 1]):
            s = cell_items[k]
            if kind[s] != _WALL:
                continue  # the walker rolls over pegs
            d, nx, ny = _circle_aabb(pos[i, 0], pos[i, 1], half[i],
                                     pos[s, 0], pos[s, 1], half[s])
            if d > 0.0:
                pos[i, 0] -= nx * d
                pos[i, 1] -= ny * d
                touched = True
    return touched


@njit(cache=True)
def _project_box_statics(pos, half, kind, b, cell_start, cell_items,
                         ox, oy, inv, gw, gh):
    for _ in range(2):
        c = _grid_cell(pos[b, 0], pos[b, 1], ox, oy, inv, gw, gh)
        for k in range(cell_start[c], cell_start[c + 1]):
            s = cell_items[k]
            if kind[s] == _WALL:
                d, nx, ny = _aabb_aabb(pos[b, 0], pos[b, 1], half[b],
                                       pos[s, 0], pos[s, 1], half[s])
                if d > 0.0:
                    pos[b, 0] -= nx * d
                    pos[b, 1] -= ny * d
            else:  # peg: disc static, normal points peg -> box
                d, nx, ny = _circle_aabb(pos[s, 0], pos[s, 1], half[s],
                                         pos[b, 0], pos[b, 1], half[b])
                if d > 0.0:
                    pos[b, 0] += nx * d
                    pos[b, 1] += ny * d


@njit(cache=True)
def _resolve_substep(pos, half, kind, walker, boxes, cvx, cvy,
                     cell_start, cell_items, ox, oy, inv, gw, gh,
                     queue, visited, chain_src, chain_dst):
    touched = False
    nb = boxes.shape[0]
    if walker >= 0:
        touched = _project_disc_statics(pos, half, kind, walker, cell_start,
                                        cell_items, ox, oy, inv, gw, gh)
    for t in range(nb):
        visited[t] = False
    qn = 0
    chain_n = 0
    # Walker contacts seed the push chains; only approach contacts push.
    if walker >= 0:
        for t in range(nb):
            b = boxes[t]
            d, nx, ny = _circle_aabb(pos[walker, 0], pos[walker, 1], half[walker],
                                     pos[b, 0], pos[b, 1], half[b])
            if d > 0.0:
                touched = True
                if cvx * nx + cvy * ny > 1e-12:
                    pos[b, 0] += nx * d
                    pos[b, 1] += ny * d
                    visited[t] = True
                    queue[qn] = t
                    qn += 1
                    chain_src[chain_n] = -1
                    chain_dst[chain_n] = t
                    chain_n += 1
                else:
                    pos[walker, 0] -= nx * d
                    pos[walker, 1] -= ny * d
    qi = 0
    while qi < qn:
        t = queue[qi]
        qi += 1
        a = boxes[t]
        _project_box_statics(pos, half, kind, a, cell_start, cell_items,
                             ox, oy, inv, gw, gh)
        for u in range(nb):
            if u == t or visited[u]:
                continue
            b = boxes[u]
            d, nx, ny = _aabb_aabb(pos[a, 0], pos[a, 1], half[a],
                                   pos[b, 0], pos[b, 1], half[b])
            if d > 0.0:
                pos[b, 0] += nx * d
                pos[b, 1] += ny * d
                visited[u] = True
                queue[qn] = u
                qn += 1
                chain_src[chain_n] = t
                chain_dst[chain_n] = u
                chain_n += 1
    # Unwind: a blocked pushee moves its pusher back.
    for k in range(chain_n - 1, -1, -1):
        t = chain_src[k]
        u = chain_dst[k]
        b = boxes[u]
        if t < 0:
            d, nx, ny = _circle_aabb(pos[walker, 0], pos[walker, 1], half[walker],
                                     pos[b, 0], pos[b, 1], half[b])
            if d > 0.0:
                pos[walker, 0] -= nx * d
                pos[walker, 1] -= ny * d
        else:
            a = boxes[t]
            d, nx, ny = _aabb_aabb(pos[a, 0], pos[a, 1], half[a],
                                   pos[b, 0], pos[b, 1], half[b])
            if d > 0.0:
                pos[a, 0] -= nx * d
                pos[a, 1] -= ny * d
    if walker >= 0 and chain_n > 0:
        _project_disc_statics(pos, half, kind, walker, cell_start, cell_items,
                              ox, oy, inv, gw, gh)
    return touched


@njit(cache=True)
def _step_kernel(pos, vel, half, kind, walker, boxes, cvx, cvy, substeps, dt,
                 cell_start, cell_items, ox, oy, inv, gw, gh,
                 queue, visited, chain_src, chain_dst):
    sub_dt = dt / substeps
    touched = False
    if walker >= 0:
        for _ in range(substeps):
            pos[walker, 0] += cvx * sub_dt
            pos[walker, 1] += cvy * sub_dt
            if _resolve_substep(pos, half, kind, walker, boxes, cvx, cvy,
                                cell_start, cell_items, ox, oy, inv, gw, gh,
                                queue, visited, chain_src, chain_dst):
                touched = True
    return touched


class PhysicsWorld:
    """Mutable planar scene advanced in-place by ``step_world``."""

    def __init__(self, bodies: Sequence[Body], arm: Optional[ArmConfig] = None,
                 control_dt: float = CONTROL_DT, substeps: int = SUBSTEPS,
                 seed: int = 0, view_bounds=None,
                 target_markers: Sequence[tuple[float, float]] = ()):
        ids = [b.id for b in bodies]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate body ids")
        self.ids = ids
        self.index = {bid: i for i, bid in enumerate(ids)}
        n = len(bodies)
        self.pos = np.zeros((n, 2))
        self.vel = np.zeros((n, 2))
        self.half = np.zeros(n)
        self.kind = np.zeros(n, dtype=np.int64)
        for i, b in enumerate(bodies):
            self.pos[i] = b.position
            self.vel[i] = b.velocity
            self.half[i] = b.half_extent
            self.kind[i] = _KIND_CODE[b.kind]
        walkers = np.flatnonzero(self.kind == _WALKER)
        if len(walkers) > 1:
            raise ValueError("at most one walker disc")
        self.walker = int(walkers[0]) if len(walkers) else -1
        self.boxes = np.flatnonzero(self.kind == _BOX).astype(np.int64)
        self.movable = (self.kind == _WALKER) | (self.kind == _BOX)

        self.arm = arm
        self.control_dt = float(control_dt)
        self.substeps = int(substeps)
        self.time_step_index = 0
        self.rng = np.random.default_rng(seed)
        self.walker_heading = 0.0
        self.walker_touch = False
        self.target_markers = [tuple(map(float, m)) for m in target_markers]

        statics = np.flatnonzero(~self.movable)
        if view_bounds is not None:
            self.view_lo = np.asarray(view_bounds[0], dtype=float)
            self.view_hi = np.asarray(view_bounds[1], dtype=float)
        elif len(statics):
            lo = (self.pos[statics] - self.half[statics, None]).min(axis=0)
            hi = (self.pos[statics] + self.half[statics, None]).max(axis=0)
            self.view_lo, self.view_hi = lo, hi
        else:
            self.view_lo = np.array([0.0, 0.0])
            self.view_hi = np.array([1.0, 1.0])
        self._build_static_grid(statics)
        nb = len(self.boxes)
        self._queue = np.zeros(max(nb, 1), dtype=np.int64)
        self._visited = np.zeros(max(nb, 1), dtype=np.bool_)
        self._chain_src = np.zeros(max(nb + 1, 1), dtype=np.int64)
        self._chain_dst = np.zeros(max(nb + 1, 1), dtype=np.int64)

    def _build_static_grid(self, statics):
        inflate = 0.45  # max movable half-extent plus clearance
        self._grid_origin = self.view_lo - 2 * CELL
        span = (self.view_hi + 2 * CELL) - self._grid_origin
        self._gw = max(int(math.ceil(span[0] / CELL)), 1)
        self._gh = max(int(math.ceil(span[1] / CELL)), 1)
        cells: list[list[int]] = [[] for _ in range(self._gw * self._gh)]
        for s in statics:
            r = self.half[s] + inflate
            lo_x = int(math.floor((self.pos[s, 0] - r - self._grid_origin[0]) / CELL))
            hi_x = int(math.floor((self.pos[s, 0] + r - self._grid_origin[0]) / CELL))
            lo_y = int(math.floor((self.pos[s, 1] - r - self._grid_origin[1]) / CELL))
            hi_y = int(math.floor((self.pos[s, 1] + r - self._grid_origin[1]) / CELL))
            for gy in range(max(lo_y, 0), min(hi_y, self._gh - 1) + 1):
                for gx in range(max(lo_x, 0), min(hi_x, self._gw - 1) + 1):
                    cells[gy * self._gw + gx].append(int(s))
        start = np.zeros(len(cells) + 1, dtype=np.int64)
        for i, items in enumerate(cells):
            start[i + 1] = start[i] + len(items)
        flat = np.zeros(max(int(start[-1]), 1), dtype=np.int64)
        for i, items in enumerate(cells):
            flat[start[i]:start[i] + len(items)] = items
        self._cell_start = start
        self._cell_items = flat

    def body(self, body_id: str) -> Body:
        i = self.index[body_id]
        return Body(body_id, _KIND_NAME[int(self.kind[i])],
                    tuple(self.pos[i]), tuple(self.vel[i]),
                    float(self.half[i]), bool(self.movable[i]))

    def control_dim(self) -> int:
        if self.arm is not None:
            return 4
        return 2 if self.walker >= 0 else 0

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.pos.tobytes())
        h.update(self.vel.tobytes())
        h.update(np.float64(self.walker_heading).tobytes())
        h.update(np.int64(self.time_step_index).tobytes())
        if self.arm is not None:
            h.update(self.arm.joint_angles.tobytes())
            h.update(self.arm.joint_velocities.tobytes())
            h.update(np.float64(self.arm.press).tobytes())
        return h.hexdigest()


def resolve_collisions(world: PhysicsWorld) -> PhysicsWorld:
    """Separate any overlapping pairs without advancing time."""
    _resolve_substep(world.pos, world.half, world.kind, world.walker,
                     world.boxes, 0.0, 0.0,
                     world._cell_start, world._cell_items,
                     world._grid_origin[0], world._grid_origin[1],
                     1.0 / CELL, world._gw, world._gh,
                     world._queue, world._visited,
                     world._chain_src, world._chain_dst)
    for t in range(len(world.boxes)):
        _project_box_statics(world.pos, world.half, world.kind,
                             world.boxes[t], world._cell_start,
                             world._cell_items, world._grid_origin[0],
                             world._grid_origin[1], 1.0 / CELL,
                             world._gw, world._gh)
    return world


def step_world(world: PhysicsWorld, controls) -> PhysicsWorld:
    """Advance exactly ``control_dt`` seconds in ``substeps`` sub-integrations."""
    controls = np.asarray(controls, dtype=float)
    expected = world.control_dim()
    if controls.shape != (expected,):
        raise ValueError(
            f"control dimension {controls.shape} does not match actuated body "
            f"({expected},)")
    controls = np.clip(controls, -1.0, 1.0)

    if world.walker >= 0:
        cvx = controls[0] * WALKER_MAX_SPEED
        cvy = controls[1] * WALKER_MAX_SPEED
        start = world.pos[world.movable].copy()
        touched = _step_kernel(
            world.pos, world.vel, world.half, world.kind, world.walker,
            world.boxes, cvx, cvy, world.substeps, world.control_dt,
            world._cell_start, world._cell_items,
            world._grid_origin[0], world._grid_origin[1], 1.0 / CELL,
            world._gw, world._gh, world._queue, world._visited,
            world._chain_src, world._chain_dst)
        world.vel[world.movable] = (world.pos[world.movable] - start) / world.control_dt
        world.walker_touch = bool(touched)
        if cvx * cvx + cvy * cvy > 1e-18:
            world.walker_heading = math.atan2(cvy, cvx)

    if world.arm is not None:
        arm = world.arm
        arm.joint_velocities = controls[:3] * arm.speed_limit
        arm.joint_angles = wrap_angles(
            arm.joint_angles + arm.joint_velocities * world.control_dt)
        arm.press = (controls[3] + 1.0) / 2.0

    world.time_step_index += 1
    return world

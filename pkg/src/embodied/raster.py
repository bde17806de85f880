"""Software top-down rasterizer and PPM image output.

Fixed palette: grey walls, blue walker disc (blue left ear, red right
ear showing heading), yellow boxes, red targets, dark grey pegs.
"""

from __future__ import annotations

import math
import numpy as np

from embodied.physics import PhysicsWorld

FLOOR = (222, 222, 222)
WALL = (128, 128, 128)
BOX = (255, 213, 0)
TARGET = (214, 40, 40)
PEG = (80, 80, 80)
WALKER = (60, 110, 210)
EAR_LEFT = (0, 0, 255)
EAR_RIGHT = (255, 0, 0)
STONE_BLACK = (20, 20, 20)
STONE_WHITE = (245, 245, 245)
BOARD = (181, 136, 80)
ARM = (60, 60, 60)

DEFAULT_SIZE = 96

_KIND_COLOR = {1: BOX, 2: PEG, 3: WALL}


class Canvas:
    """Maps a world rectangle onto a square pixel image (row 0 = top)."""

    def __init__(self, lo, hi, size: int):
        self.lo = np.asarray(lo, dtype=float)
        span = np.asarray(hi, dtype=float) - self.lo
        self.scale = size / max(float(span.max()), 1e-9)
        self.size = size
        self.img = np.empty((size, size, 3), dtype=np.uint8)
        self.img[:] = FLOOR

    def _px(self, x, y):
        return ((x - self.lo[0]) * self.scale,
                self.size - (y - self.lo[1]) * self.scale)

    def fill_rect(self, cx, cy, hx, hy, color):
        x0, y1 = self._px(cx - hx, cy - hy)
        x1, y0 = self._px(cx + hx, cy + hy)
        c0, c1 = max(int(round(x0)), 0), min(int(round(x1)), self.size)
        r0, r1 = max(int(round(y0)), 0), min(int(round(y1)), self.size)
        if c1 > c0 and r1 > r0:
            self.img[r0:r1, c0:c1] = color

    def fill_disc(self, cx, cy, radius, color):
        px, py = self._px(cx, cy)
        pr = radius * self.scale
        r0 = max(int(math.floor(py - pr)), 0)
        r1 = min(int(math.ceil(py + pr)) + 1, self.size)
        c0 = max(int(math.floor(px - pr)), 0)
        c1 = min(int(math.ceil(px + pr)) + 1, self.size)
        if r1 <= r0 or c1 <= c0:
            return
        rows = np.arange(r0, r1)[:, None] + 0.5
        cols = np.arange(c0, c1)[None, :] + 0.5
        mask = (rows - py) ** 2 + (cols - px) ** 2 <= pr * pr
        self.img[r0:r1, c0:c1][mask] = color


def rasterize_topdown(world: PhysicsWorld, size: int = DEFAULT_SIZE) -> np.ndarray:
    """Orthographic top-down RGB view of the scene, shape (size, size, 3)."""
    if size < 16:
        raise ValueError("image size must be at least 16")
    canvas = Canvas(world.view_lo, world.view_hi, size)
    for x, y in world.target_markers:
        canvas.fill_rect(x, y, 0.4, 0.4, TARGET)
    order = [3, 2, 1]  # walls, pegs, boxes; walker on top
    for kind in order:
        for i in np.flatnonzero(world.kind == kind):
            x, y = world.pos[i]
            h = world.half[i]
            if kind == 2:
                canvas.fill_disc(x, y, h, _KIND_COLOR[kind])
            else:
                canvas.fill_rect(x, y, h, h, _KIND_COLOR[kind])
    if world.walker >= 0:
        x, y = world.pos[world.walker]
        r = world.half[world.walker]
        canvas.fill_disc(x, y, r, WALKER)
        heading = world.walker_heading
        for side, color in ((1.0, EAR_LEFT), (-1.0, EAR_RIGHT)):
            angle = heading + side * math.pi / 2
            ex = x + 0.55 * r * math.cos(angle)
            ey = y + 0.55 * r * math.sin(angle)
            canvas.fill_disc(ex, ey, 0.3 * r, color)
    return canvas.img


def encode_ppm(img: np.ndarray) -> bytes:
    """Plain (ASCII, P3) PPM: dependency-free and bit-exact."""
    h, w, _ = img.shape
    lines = [f"P3\n{w} {h}\n255\n"]
    flat = img.reshape(-1, 3)
    lines.extend(f"{r} {g} {b}\n" for r, g, b in flat)
    return "".join(lines).encode()


def write_image(path: str, img: np.ndarray):
    """PPM always; PNG when the filename asks for it and Pillow is present."""
    if path.endswith(".png"):
        try:
            from PIL import Image
        except ImportError as e:
            raise RuntimeError("PNG output needs Pillow; use .ppm instead") from e
        Image.fromarray(img).save(path)
        return
    with open(path, "wb") as f:
        f.write(encode_ppm(img))

"""Content mask production: shape rasterization, bitmap text, file ingestion."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from PIL import Image

from . import font8x8
from .types import ContentMask, DepthSequence, MixedDimensions


class OutOfCanvas(ValueError):
    pass


class DegenerateShape(ValueError):
    pass


class UnsupportedGlyph(ValueError):
    pass


class TextTooLarge(ValueError):
    pass


class UnreadableImage(ValueError):
    pass


class EmptyMask(ValueError):
    pass


class EmptyDirectory(ValueError):
    pass


@dataclass(frozen=True)
class ShapeSpec:
    """Geometric shape on a pixel canvas.

    kind selects which geometry fields apply:
      rectangle: corner=(x, y), size=(w, h)
      circle:    center=(cx, cy), radius
      polygon:   vertices=[(x, y), ...] with >= 3 points, simple
    All coordinates are integer pixels; the rasterized boundary is inclusive.
    """

    kind: str
    canvas: tuple[int, int]
    corner: Optional[tuple[int, int]] = None
    size: Optional[tuple[int, int]] = None
    center: Optional[tuple[int, int]] = None
    radius: Optional[int] = None
    vertices: Optional[tuple[tuple[int, int], ...]] = None

    def __post_init__(self):
        if self.kind not in ("rectangle", "circle", "polygon"):
            raise ValueError(f"unknown shape kind {self.kind!r}")
        if self.vertices is not None:
            object.__setattr__(self, "vertices", tuple(tuple(v) for v in self.vertices))


@dataclass(frozen=True)
class TextSpec:
    """A text string rendered from the embedded font, centered on the canvas."""

    text: str
    scale: int
    canvas: tuple[int, int]


def _segments_intersect(p1, p2, p3, p4) -> bool:
    # proper intersection of open segments, integer-exact
    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    d1 = cross(p3, p4, p1)
    d2 = cross(p3, p4, p2)
    d3 = cross(p1, p2, p3)
    d4 = cross(p1, p2, p4)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0


def _check_simple(verts: Sequence[tuple[int, int]]):
    n = len(verts)
    for i in range(n):
        a1, a2 = verts[i], verts[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            b1, b2 = verts[j], verts[(j + 1) % n]
            if _segments_intersect(a1, a2, b1, b2):
                raise DegenerateShape("polygon is self-intersecting")


def _point_on_segment(px, py, x1, y1, x2, y2) -> np.ndarray:
    cross = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
    on_line = cross == 0
    within = (px >= min(x1, x2)) & (px <= max(x1, x2)) & (py >= min(y1, y2)) & (py <= max(y1, y2))
    return on_line & within


def _polygon_fill(verts: Sequence[tuple[int, int]], w: int, h: int) -> np.ndarray:
    """Even-odd fill over integer lattice points, boundary inclusive."""
    xs, ys = np.meshgrid(np.arange(w), np.arange(h))
    inside = np.zeros((h, w), dtype=bool)
    boundary = np.zeros((h, w), dtype=bool)
    n = len(verts)
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        boundary |= _point_on_segment(xs, ys, x1, y1, x2, y2)
        if y1 == y2:
            continue
        # half-open rule on y avoids double-counting shared vertices
        cond = (ys >= min(y1, y2)) & (ys < max(y1, y2))
        # count edge crossings strictly left of the point; the comparison
        # x_edge(y) < x is done exactly via cross-multiplication
        lhs = (xs - x1) * (y2 - y1)
        rhs = (x2 - x1) * (ys - y1)
        crosses = np.where(y2 > y1, lhs > rhs, lhs < rhs)
        inside ^= cond & crosses
    return inside | boundary


def render_shape_mask(s: ShapeSpec) -> ContentMask:
    """Rasterize a shape spec to a mask (scanline / direct-evaluation, deterministic)."""
    w, h = s.canvas
    if w <= 0 or h <= 0:
        raise OutOfCanvas("canvas must be positive")

    if s.kind == "rectangle":
        if s.corner is None or s.size is None:
            raise ValueError("rectangle needs corner and size")
        x0, y0 = s.corner
        rw, rh = s.size
        if rw <= 0 or rh <= 0:
            raise DegenerateShape("rectangle has zero area")
        if x0 < 0 or y0 < 0 or x0 + rw > w or y0 + rh > h:
            raise OutOfCanvas("rectangle extends beyond canvas")
        bits = np.zeros((h, w), dtype=bool)
        bits[y0:y0 + rh, x0:x0 + rw] = True
        return ContentMask(bits=bits)

    if s.kind == "circle":
        if s.center is None or s.radius is None:
            raise ValueError("circle needs center and radius")
        cx, cy = s.center
        r = s.radius
        if r <= 0:
            raise DegenerateShape("circle radius must be >= 1")
        if cx - r < 0 or cy - r < 0 or cx + r >= w or cy + r >= h:
            raise OutOfCanvas("circle extends beyond canvas")
        xs, ys = np.meshgrid(np.arange(w), np.arange(h))
        bits = (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
        return ContentMask(bits=bits)

    # polygon
    if s.vertices is None or len(s.vertices) < 3:
        raise DegenerateShape("polygon needs at least 3 vertices")
    for (x, y) in s.vertices:
        if x < 0 or y < 0 or x >= w or y >= h:
            raise OutOfCanvas(f"vertex ({x},{y}) outside canvas")
    _check_simple(s.vertices)
    bits = _polygon_fill(s.vertices, w, h)
    if not bits.any():
        raise DegenerateShape("polygon rasterized to zero area")
    return ContentMask(bits=bits)


def render_text_mask(t: TextSpec) -> ContentMask:
    """Render text with the embedded font: glyphs left to right, one cell column
    between glyphs, integer pixel replication by ``scale``, centered on canvas."""
    if not t.text:
        raise ValueError("text must be non-empty")
    if t.scale < 1:
        raise ValueError("scale must be >= 1")
    for ch in t.text:
        if not font8x8.supported(ch):
            raise UnsupportedGlyph(f"no glyph for {ch!r}")

    g = font8x8.GLYPH_SIZE
    n = len(t.text)
    cells_w = n * g + (n - 1)
    text_w = cells_w * t.scale
    text_h = g * t.scale
    w, h = t.canvas
    if text_w > w or text_h > h:
        raise TextTooLarge(f"text needs {text_w}x{text_h}, canvas is {w}x{h}")

    strip = np.zeros((g, cells_w), dtype=bool)
    for i, ch in enumerate(t.text):
        x0 = i * (g + 1)
        strip[:, x0:x0 + g] = font8x8.glyph_bitmap(ch)
    scaled = np.repeat(np.repeat(strip, t.scale, axis=0), t.scale, axis=1)

    bits = np.zeros((h, w), dtype=bool)
    ox = (w - text_w) // 2
    oy = (h - text_h) // 2
    bits[oy:oy + text_h, ox:ox + text_w] = scaled
    return ContentMask(bits=bits)


def load_mask_image(path: str | os.PathLike, target_size: Optional[tuple[int, int]] = None) -> ContentMask:
    """Read a raster image as a mask: foreground where intensity >= 128.

    target_size, when given as (width, height), rescales with nearest-neighbor
    before thresholding. An all-background result raises EmptyMask; an
    all-foreground mask is accepted here and rejected later by the encoder.
    """
    try:
        img = Image.open(path).convert("L")
    except Exception as e:
        raise UnreadableImage(f"cannot read {path}: {e}") from e
    if target_size is not None:
        img = img.resize(target_size, resample=Image.NEAREST)
    arr = np.asarray(img, dtype=np.uint8)
    bits = arr >= 128
    if not bits.any():
        raise EmptyMask(f"{path} thresholded to an empty mask")
    return ContentMask(bits=bits)


def load_depth_sequence(directory: str | os.PathLike) -> DepthSequence:
    """Read a directory of same-sized grayscale frames in lexicographic order."""
    names = sorted(
        n for n in os.listdir(directory)
        if n.lower().endswith((".png", ".pgm", ".bmp", ".tif", ".tiff"))
    )
    if not names:
        raise EmptyDirectory(f"no depth frames in {directory}")
    frames = []
    shape = None
    for n in names:
        try:
            img = Image.open(os.path.join(directory, n)).convert("L")
        except Exception as e:
            raise UnreadableImage(f"cannot read {n}: {e}") from e
        arr = np.asarray(img, dtype=np.uint8)
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise MixedDimensions(f"{n} has shape {arr.shape}, expected {shape}")
        frames.append(arr)
    return DepthSequence(frames=tuple(frames))

"""Temporal encoders.

Two animation modes over binary speckle carriers:

* Mask animation: foreground pixels sample a foreground pattern scrolled
  forward in time, background pixels a second pattern scrolled the opposite
  way. Any single frame is pure speckle; the content exists only in the
  opposing motion.
* Depth animation: pixels whose depth lies inside a brightness band sample a
  single pattern scrolled in time; everything else shows the static pattern.

Offsets are integer pixels, floor(velocity * t), wrapped modularly, so frames
stay strictly binary and every video is regenerable bit-for-bit from its
parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import floor

import numpy as np

from .noise import generate_noise, pattern_seed, SUBSTREAM_BACKGROUND, SUBSTREAM_FOREGROUND
from .types import ContentMask, DepthSequence, FrameBuffer, ValidatedParams


class DimensionMismatch(ValueError):
    pass


class DegenerateMask(ValueError):
    pass


@dataclass(frozen=True)
class DepthThresholds:
    """Inclusive brightness band [t_l, t_u] selecting the moving pixels."""

    t_l: int
    t_u: int

    def __post_init__(self):
        if not (0 <= self.t_l <= self.t_u <= 255):
            raise ValueError(f"need 0 <= t_l <= t_u <= 255, got ({self.t_l}, {self.t_u})")


@dataclass(frozen=True)
class FrameSequence:
    """Ordered frames plus the parameters that produced them."""

    frames: tuple[FrameBuffer, ...]
    fps: int
    params: ValidatedParams | None = None

    def __post_init__(self):
        if len(self.frames) == 0:
            raise ValueError("frame sequence must be non-empty")
        shape = self.frames[0].pixels.shape
        for i, f in enumerate(self.frames):
            if f.pixels.shape != shape:
                raise DimensionMismatch(f"frame {i} has shape {f.pixels.shape}, expected {shape}")
        if self.params is not None and len(self.frames) != self.params.frame_count:
            raise ValueError(
                f"{len(self.frames)} frames but params specify {self.params.frame_count}"
            )

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    def as_array(self) -> np.ndarray:
        """(frames, height, width) uint8 view-stack."""
        return np.stack([f.pixels for f in self.frames])


def _offsets(velocity: tuple[float, float], t: int) -> tuple[int, int]:
    vx, vy = velocity
    return floor(vx * t), floor(vy * t)


def _rolled(pixels: np.ndarray, dx: int, dy: int) -> np.ndarray:
    """View of pattern where out[y, x] = pattern[(y + dy) mod h, (x + dx) mod w]."""
    return np.roll(pixels, shift=(-dy, -dx), axis=(0, 1))


def encode_mask_animation(mask: ContentMask, p: ValidatedParams) -> FrameSequence:
    """Opposing-scroll animation of a content mask.

    Frame t, pixel (x, y):
      mask true:  fg_pattern[(y + floor(vy t)) mod h, (x + floor(vx t)) mod w]
      mask false: bg_pattern[(y - floor(vy t)) mod h, (x - floor(vx t)) mod w]
    """
    if (mask.width, mask.height) != (p.width, p.height):
        raise DimensionMismatch(
            f"mask is {mask.width}x{mask.height}, params want {p.width}x{p.height}"
        )
    fg_count = mask.foreground_count
    if fg_count == 0 or fg_count == mask.width * mask.height:
        raise DegenerateMask("mask needs at least one foreground and one background pixel")

    bg = generate_noise(p.width, p.height, p.block_size, p.density,
                        pattern_seed(p.seed, SUBSTREAM_BACKGROUND))
    fg = generate_noise(p.width, p.height, p.block_size, p.density,
                        pattern_seed(p.seed, SUBSTREAM_FOREGROUND))

    bits = mask.bits
    frames = []
    for t in range(p.frame_count):
        dx, dy = _offsets(p.velocity, t)
        frame = np.where(bits, _rolled(fg.pixels, dx, dy), _rolled(bg.pixels, -dx, -dy))
        frames.append(FrameBuffer(pixels=frame))
    return FrameSequence(frames=tuple(frames), fps=p.fps, params=p)


def resample_depth_indices(n_source: int, n_out: int) -> list[int]:
    """Nearest-neighbor time resampling: output frame t uses source frame
    round(t * (n_source - 1) / (n_out - 1)); a single source map repeats."""
    if n_out == 1 or n_source == 1:
        return [0] * n_out
    return [int(round(t * (n_source - 1) / (n_out - 1))) for t in range(n_out)]


def encode_depth_animation(depth: DepthSequence, th: DepthThresholds, p: ValidatedParams) -> FrameSequence:
    """Depth-band scroll animation.

    Frame t, pixel (x, y) with d the resampled depth there:
      t_l <= d <= t_u: pattern[(y + floor(vy t)) mod h, (x + floor(vx t)) mod w]
      otherwise:       pattern[y, x]  (static)
    """
    if (depth.width, depth.height) != (p.width, p.height):
        raise DimensionMismatch(
            f"depth is {depth.width}x{depth.height}, params want {p.width}x{p.height}"
        )

    pattern = generate_noise(p.width, p.height, p.block_size, p.density,
                             pattern_seed(p.seed, SUBSTREAM_BACKGROUND))
    indices = resample_depth_indices(len(depth), p.frame_count)

    frames = []
    for t in range(p.frame_count):
        d = depth.frames[indices[t]]
        moving = (d >= th.t_l) & (d <= th.t_u)
        dx, dy = _offsets(p.velocity, t)
        frame = np.where(moving, _rolled(pattern.pixels, dx, dy), pattern.pixels)
        frames.append(FrameBuffer(pixels=frame))
    return FrameSequence(frames=tuple(frames), fps=p.fps, params=p)

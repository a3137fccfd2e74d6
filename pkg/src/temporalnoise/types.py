"""Shared value types: frames, masks, depth stacks, flow fields, encoding parameters.

Everything here is immutable after construction (backing arrays are marked
read-only), so instances are safe to share across threads and processes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ParamViolation(ValueError):
    """Base class for encoding-parameter violations."""


class ZeroVelocity(ParamViolation):
    """Velocity (0,0) would freeze the carrier and make content permanently invisible."""


class NonPositiveDuration(ParamViolation):
    pass


class ZeroDimension(ParamViolation):
    pass


class InvalidParams(ValueError):
    """Raised by validate_params; carries the full list of violations."""

    def __init__(self, violations: list[ParamViolation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FrameBuffer:
    """A single grayscale frame. ``pixels`` is a read-only (height, width) uint8 grid."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels)
        if p.ndim != 2 or p.size == 0:
            raise ZeroDimension(f"frame must be a non-empty 2-D grid, got shape {p.shape}")
        if p.dtype != np.uint8:
            if not np.issubdtype(p.dtype, np.integer):
                raise ValueError("frame intensities must be integers in [0,255]")
            if p.min() < 0 or p.max() > 255:
                raise ValueError("frame intensities must lie in [0,255]")
            p = p.astype(np.uint8)
        object.__setattr__(self, "pixels", _readonly(p))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrameBuffer):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def __hash__(self):
        return hash((self.pixels.shape, self.pixels.tobytes()))


@dataclass(frozen=True)
class ContentMask:
    """Binary foreground mask; ``bits`` is a read-only (height, width) bool grid."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.ndim != 2 or b.size == 0:
            raise ZeroDimension(f"mask must be a non-empty 2-D grid, got shape {b.shape}")
        if b.dtype != np.bool_:
            b = b.astype(bool)
        object.__setattr__(self, "bits", _readonly(b))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def foreground_count(self) -> int:
        return int(self.bits.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ContentMask):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self):
        return hash((self.bits.shape, self.bits.tobytes()))


class MixedDimensions(ValueError):
    pass


@dataclass(frozen=True)
class DepthSequence:
    """Ordered stack of grayscale depth maps, all the same size."""

    frames: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.frames) == 0:
            raise ValueError("depth sequence must be non-empty")
        cleaned = []
        shape = None
        for i, f in enumerate(self.frames):
            a = np.asarray(f)
            if a.ndim != 2 or a.size == 0:
                raise ZeroDimension(f"depth frame {i} must be a non-empty 2-D grid")
            if a.dtype != np.uint8:
                a = np.clip(a, 0, 255).astype(np.uint8)
            if shape is None:
                shape = a.shape
            elif a.shape != shape:
                raise MixedDimensions(f"depth frame {i} has shape {a.shape}, expected {shape}")
            cleaned.append(_readonly(a))
        object.__setattr__(self, "frames", tuple(cleaned))

    @property
    def width(self) -> int:
        return self.frames[0].shape[1]

    @property
    def height(self) -> int:
        return self.frames[0].shape[0]

    def __len__(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class FlowField:
    """Dense per-pixel displacement between two frames, in pixels/frame.

    ``u`` is horizontal displacement, ``v_comp`` vertical; both are read-only
    float32 grids of identical shape and must be finite everywhere.
    """

    u: np.ndarray
    v_comp: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.float32)
        v = np.asarray(self.v_comp, dtype=np.float32)
        if u.ndim != 2 or u.shape != v.shape or u.size == 0:
            raise ValueError(f"u/v grids must be matching non-empty 2-D arrays, got {u.shape} vs {v.shape}")
        if not (np.isfinite(u).all() and np.isfinite(v).all()):
            raise ValueError("flow components must be finite")
        object.__setattr__(self, "u", _readonly(u))
        object.__setattr__(self, "v_comp", _readonly(v))

    @property
    def width(self) -> int:
        return self.u.shape[1]

    @property
    def height(self) -> int:
        return self.u.shape[0]


@dataclass(frozen=True)
class EncodingParams:
    """User-facing knobs for both encoders.

    velocity is in pixels/frame as (vx, vy); positive vy scrolls the foreground
    carrier downward. density is the probability that a noise block is white.
    """

    width: int = 960
    height: int = 540
    fps: int = 30
    duration_s: float = 4.0
    velocity: tuple[float, float] = (0.0, 3.0)
    block_size: int = 2
    density: float = 0.5
    seed: int = 0


@dataclass(frozen=True)
class ValidatedParams:
    """EncodingParams after validation, with the derived frame count attached."""

    width: int
    height: int
    fps: int
    duration_s: float
    velocity: tuple[float, float]
    block_size: int
    density: float
    seed: int
    frame_count: int

    def as_params(self) -> EncodingParams:
        return EncodingParams(
            width=self.width,
            height=self.height,
            fps=self.fps,
            duration_s=self.duration_s,
            velocity=self.velocity,
            block_size=self.block_size,
            density=self.density,
            seed=self.seed,
        )


def validate_params(p: EncodingParams) -> ValidatedParams:
    """Check an EncodingParams and attach the frame count.

    Collects every violation before raising, so callers can report all
    problems at once. Frame count is round(fps * duration_s) and must be >= 2.
    """
    violations: list[ParamViolation] = []
    if p.width <= 0 or p.height <= 0:
        violations.append(ZeroDimension(f"dimensions must be positive, got {p.width}x{p.height}"))
    if p.fps < 1:
        violations.append(ParamViolation(f"fps must be >= 1, got {p.fps}"))
    if p.duration_s <= 0:
        violations.append(NonPositiveDuration(f"duration must be positive, got {p.duration_s}"))
    vx, vy = p.velocity
    if abs(vx) + abs(vy) == 0:
        violations.append(ZeroVelocity("velocity (0,0) is rejected for animated encodings"))
    if p.block_size not in (1, 2, 3):
        violations.append(ParamViolation(f"block_size must be 1, 2 or 3, got {p.block_size}"))
    if not (0.0 <= p.density <= 1.0):
        violations.append(ParamViolation(f"density must lie in [0,1], got {p.density}"))
    if not (0 <= p.seed < 2**64):
        violations.append(ParamViolation("seed must be a 64-bit unsigned integer"))

    frame_count = int(round(p.fps * p.duration_s)) if p.duration_s > 0 else 0
    if not violations and frame_count < 2:
        violations.append(NonPositiveDuration(
            f"fps={p.fps} and duration={p.duration_s}s yield {frame_count} frames; need >= 2"
        ))
    if violations:
        raise InvalidParams(violations)

    return ValidatedParams(
        width=p.width,
        height=p.height,
        fps=p.fps,
        duration_s=p.duration_s,
        velocity=(float(vx), float(vy)),
        block_size=p.block_size,
        density=float(p.density),
        seed=p.seed,
        frame_count=frame_count,
    )

"""Deterministic tileable binary speckle noise.

The carrier patterns are reproducible bit-for-bit on any platform. The PRNG
contract, which any re-implementation must follow exactly:

* Generator: SplitMix64. Seeded with state ``s``, its i-th output (0-based) is
  ``mix64((s + (i+1) * GOLDEN) mod 2**64)`` where GOLDEN = 0x9E3779B97F4A7C15
  and mix64 is the finalizer
  ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31`` (all mod 2**64).
* Sub-stream keys: pattern k of master seed s is seeded with output k of the
  master stream (k = 0 for background / single-pattern use, k = 1 for
  foreground).
* Stream layout: one draw per block, row-major block order (block row 0 left
  to right, then block row 1, ...).
* White decision: a block is white iff ``(r >> 11) * 2**-53 < density`` with r
  the block's 64-bit draw; this maps r to a uniform double in [0,1).

After the blocks are rendered to pixels, the pattern is made tileable by
copying edge pixels to the opposite boundaries: last row := first row, then
last column := first column (in that order, so the corner comes from (0,0)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1

SUBSTREAM_BACKGROUND = 0
SUBSTREAM_FOREGROUND = 1


class InvalidBlockSize(ValueError):
    pass


class InvalidDensity(ValueError):
    pass


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int (mod 2**64)."""
    z &= _MASK64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


def stream_output(seed: int, index: int) -> int:
    """index-th output of the SplitMix64 stream seeded with ``seed``."""
    return mix64((seed + (index + 1) * GOLDEN) & _MASK64)


def pattern_seed(seed: int, substream: int) -> int:
    """Seed for sub-pattern ``substream`` (0 = background, 1 = foreground)."""
    return stream_output(seed, substream)


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps mod 2**64, matching mix64 exactly
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class NoisePattern:
    """Rendered speckle texture over {0,255} with block structure and tileable edges."""

    pixels: np.ndarray
    block_size: int
    density: float
    seed: int

    def __post_init__(self):
        p = np.asarray(self.pixels, dtype=np.uint8)
        p = np.ascontiguousarray(p)
        p.setflags(write=False)
        object.__setattr__(self, "pixels", p)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def generate_noise(width: int, height: int, block_size: int, density: float, seed: int) -> NoisePattern:
    """Generate one tileable speckle pattern; pure function of its arguments."""
    if width < 2 or height < 2:
        raise ValueError(f"pattern must be at least 2x2, got {width}x{height}")
    if not (1 <= block_size <= min(width, height)):
        raise InvalidBlockSize(
            f"block size {block_size} outside [1, {min(width, height)}]"
        )
    if not (0.0 <= density <= 1.0):
        raise InvalidDensity(f"density {density} outside [0,1]")

    blocks_y = -(-height // block_size)
    blocks_x = -(-width // block_size)
    n_blocks = blocks_y * blocks_x

    # One draw per block, row-major block order.
    idx = np.arange(1, n_blocks + 1, dtype=np.uint64)
    states = np.uint64(seed) + idx * np.uint64(GOLDEN)
    draws = _mix64_vec(states)
    uniforms = (draws >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)
    white = (uniforms < density).reshape(blocks_y, blocks_x)

    pixels = np.where(
        np.repeat(np.repeat(white, block_size, axis=0), block_size, axis=1)[:height, :width],
        np.uint8(255),
        np.uint8(0),
    )
    # Tileability: last row := first row, then last column := first column.
    pixels[height - 1, :] = pixels[0, :]
    pixels[:, width - 1] = pixels[:, 0]

    return NoisePattern(pixels=pixels, block_size=block_size, density=float(density), seed=seed)


def generate_pattern_pair(width: int, height: int, block_size: int, density: float, seed: int) -> tuple[NoisePattern, NoisePattern]:
    """Background and foreground patterns keyed off one master seed."""
    bg = generate_noise(width, height, block_size, density, pattern_seed(seed, SUBSTREAM_BACKGROUND))
    fg = generate_noise(width, height, block_size, density, pattern_seed(seed, SUBSTREAM_FOREGROUND))
    return bg, fg


def sample_wrapped(p: NoisePattern, x_offset: int, y_offset: int) -> int:
    """Pattern value at (x_offset mod width, y_offset mod height).

    Python's % already implements the mathematically correct modulus for
    negative offsets, which the background carrier's reverse scroll needs.
    """
    return int(p.pixels[y_offset % p.height, x_offset % p.width])

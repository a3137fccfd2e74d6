"""Dense optical flow by block matching with coarse-to-fine refinement.

Binary speckle breaks the brightness-smoothness assumptions gradient flow
methods rely on, so the estimator is plain SAD block matching:

* A pyramid is built by 2x2 box averaging; the number of levels is capped so
  the coarsest level still fits a 2*(window + max_disp) margin.
* At the coarsest level every integer displacement within the scaled search
  radius is a candidate. At finer levels the candidate set is the doubled
  distinct winners from the level below (the 8 most frequent, counted over
  pixels) dilated by +-1 in each component and clamped to +-max_disp.
* For each pixel the candidate minimizing windowed SAD wins; ties break
  toward smaller u^2+v^2, then smaller v, then smaller u. Candidates are
  evaluated in exactly that order with strict-improvement updates, and all
  window sums are exact integers in float32, so results are deterministic
  across platforms.
* Sign convention: flow (u, v) at (x, y) means frame b at (x, y) shows what
  frame a showed at (x + u, y + v). A region whose carrier offset grows by
  (vx, vy) per frame therefore measures flow (+vx, +vy).
* Frames are extended by edge replication for out-of-bounds samples, and the
  window sum uses replicated borders too; callers exclude a boundary band of
  width window + max_disp from metric aggregation.
* The integer winner field is finished with a box smoothing of the given
  radius (0 disables it).
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from .encode import FrameSequence
from .types import FlowField, FrameBuffer

_TOP_SEEDS = 8
_REFINE_RADIUS = 1


class DimensionMismatch(ValueError):
    pass


class FrameTooSmall(ValueError):
    pass


class TooFewFrames(ValueError):
    pass


@dataclass(frozen=True)
class FlowOptions:
    window: int = 4
    max_disp: int = 8
    levels: int = 2
    smoothing: int = 1

    def __post_init__(self):
        if self.window < 1 or self.max_disp < 1 or self.levels < 1 or self.smoothing < 0:
            raise ValueError(f"invalid flow options {self}")

    @property
    def border_exclude(self) -> int:
        return self.window + self.max_disp


def _sorted_candidates(cands: set[tuple[int, int]]) -> list[tuple[int, int]]:
    return sorted(cands, key=lambda d: (d[0] * d[0] + d[1] * d[1], d[1], d[0]))


def _match_level(a: np.ndarray, b: np.ndarray, cands: list[tuple[int, int]],
                 window: int, max_abs: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel SAD argmin over the candidate list (already in tie-break order).

    Candidate (dx, dy) scores |a(x+dx, y+dy) - b(x, y)| summed over the window:
    positive flow means frame b reads the carrier at a larger offset, matching
    the encoders' sampling convention (a foreground scrolling at +vy measures
    flow +vy).
    """
    h, w = a.shape
    pad = max_abs
    ap = cv2.copyMakeBorder(a, pad, pad, pad, pad, cv2.BORDER_REPLICATE)
    k = 2 * window + 1

    best_sad = np.full((h, w), np.inf, dtype=np.float32)
    best_idx = np.zeros((h, w), dtype=np.int32)
    diff = np.empty((h, w), dtype=np.uint8)
    for i, (dx, dy) in enumerate(cands):
        shifted = ap[pad + dy: pad + dy + h, pad + dx: pad + dx + w]
        cv2.absdiff(shifted, b, dst=diff)
        sad = cv2.boxFilter(diff, cv2.CV_32F, (k, k), normalize=False,
                            borderType=cv2.BORDER_REPLICATE)
        better = sad < best_sad
        np.copyto(best_idx, i, where=better)
        np.minimum(best_sad, sad, out=best_sad)

    cu = np.array([c[0] for c in cands], dtype=np.int32)
    cv_ = np.array([c[1] for c in cands], dtype=np.int32)
    return cu[best_idx], cv_[best_idx]


def _seed_displacements(u: np.ndarray, v: np.ndarray, max_disp: int) -> list[tuple[int, int]]:
    """The up-to-8 most frequent distinct displacements, most frequent first;
    frequency ties break by (v, u) ascending."""
    span = 2 * max_disp + 1
    keys = (u.ravel() + max_disp) * span + (v.ravel() + max_disp)
    counts = np.bincount(keys, minlength=span * span)
    present = np.flatnonzero(counts)
    du, dv = divmod(present, span)
    order = np.lexsort((du, dv, -counts[present]))[:_TOP_SEEDS]
    return [(int(du[i]) - max_disp, int(dv[i]) - max_disp) for i in order]


def _downsample(img: np.ndarray) -> np.ndarray:
    h2, w2 = img.shape[0] // 2, img.shape[1] // 2
    c = img[: 2 * h2, : 2 * w2].astype(np.uint16)
    pooled = (c[0::2, 0::2] + c[0::2, 1::2] + c[1::2, 0::2] + c[1::2, 1::2] + 2) // 4
    return pooled.astype(np.uint8)


def estimate_flow(a: FrameBuffer, b: FrameBuffer, o: FlowOptions = FlowOptions()) -> FlowField:
    if a.pixels.shape != b.pixels.shape:
        raise DimensionMismatch(f"{a.pixels.shape} vs {b.pixels.shape}")
    min_side = 2 * (o.window + o.max_disp)
    if a.width < min_side or a.height < min_side:
        raise FrameTooSmall(f"frames must be at least {min_side} pixels per side")

    # pyramid, coarsest last; extra levels that would underflow the margin are dropped
    pyr_a = [a.pixels]
    pyr_b = [b.pixels]
    for _ in range(o.levels - 1):
        nxt = _downsample(pyr_a[-1])
        if min(nxt.shape) < min_side:
            break
        pyr_a.append(nxt)
        pyr_b.append(_downsample(pyr_b[-1]))

    depth = len(pyr_a)
    coarse_radius = -(-o.max_disp // (2 ** (depth - 1)))
    cands = _sorted_candidates({
        (dx, dy)
        for dx in range(-coarse_radius, coarse_radius + 1)
        for dy in range(-coarse_radius, coarse_radius + 1)
    })
    u = v = None
    for level in range(depth - 1, -1, -1):
        if u is not None:
            seeds = _seed_displacements(u, v, o.max_disp)
            cset = set()
            for (sx, sy) in seeds:
                for ddx in range(-_REFINE_RADIUS, _REFINE_RADIUS + 1):
                    for ddy in range(-_REFINE_RADIUS, _REFINE_RADIUS + 1):
                        nx = max(-o.max_disp, min(o.max_disp, 2 * sx + ddx))
                        ny = max(-o.max_disp, min(o.max_disp, 2 * sy + ddy))
                        cset.add((nx, ny))
            cands = _sorted_candidates(cset)
        u, v = _match_level(pyr_a[level], pyr_b[level], cands, o.window, o.max_disp)

    uf = u.astype(np.float32)
    vf = v.astype(np.float32)
    if o.smoothing > 0:
        k = 2 * o.smoothing + 1
        uf = cv2.boxFilter(uf, -1, (k, k), normalize=True, borderType=cv2.BORDER_REPLICATE)
        vf = cv2.boxFilter(vf, -1, (k, k), normalize=True, borderType=cv2.BORDER_REPLICATE)
    return FlowField(u=uf, v_comp=vf)


def flow_sequence(seq: FrameSequence, o: FlowOptions = FlowOptions()) -> list[FlowField]:
    """Flows between consecutive frames; flows[i] maps frame i to frame i+1."""
    if len(seq.frames) < 2:
        raise TooFewFrames("need at least 2 frames")
    return [estimate_flow(seq.frames[i], seq.frames[i + 1], o) for i in range(len(seq.frames) - 1)]

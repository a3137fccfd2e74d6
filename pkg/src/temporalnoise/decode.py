"""Recover hidden content from temporal flow statistics.

The decoder never sees ground truth: it works purely from flow-derived maps.
The two map kernels here (motion boundary strength and directional coherence)
are also the kernels behind the corresponding SNR metrics, shared so the
decoder and the metrics cannot drift apart.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Union

import numpy as np
from scipy import ndimage

from .types import ContentMask, FlowField, FrameBuffer

if TYPE_CHECKING:
    from .metrics import MetricConfig


class NoRegionFound(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ScalarMap:
    """Per-pixel statistic derived from a flow stack. Boundary and coherence
    maps are non-negative; direction maps are signed."""

    values: np.ndarray
    kind: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.size == 0:
            raise ValueError("scalar map must be a non-empty 2-D grid")
        if not np.isfinite(v).all():
            raise ValueError("scalar map must be finite")
        v = np.ascontiguousarray(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


def jacobian_energy(f: FlowField) -> np.ndarray:
    """Squared Frobenius norm of the flow Jacobian (central differences)."""
    du_dy, du_dx = np.gradient(f.u.astype(np.float64))
    dv_dy, dv_dx = np.gradient(f.v_comp.astype(np.float64))
    return du_dx ** 2 + du_dy ** 2 + dv_dx ** 2 + dv_dy ** 2


def boundary_strength_values(flows: list[FlowField]) -> np.ndarray:
    """Per-pixel time-average of the Frobenius norm of the flow Jacobian."""
    if not flows:
        raise ValueError("need at least one flow field")
    acc = np.zeros(flows[0].u.shape, dtype=np.float64)
    for f in flows:
        acc += np.sqrt(jacobian_energy(f))
    return acc / len(flows)


def coherence_values(flows: list[FlowField], tau: float) -> np.ndarray:
    """Directional coherence map C.

    Per pixel: Var_theta = 1 - |time mean of unit direction vectors| with
    zero-magnitude samples contributing a zero vector; C = exp(-Var_theta)
    gated by (time-mean magnitude > tau). Values lie in {0} union [1/e, 1].
    """
    if len(flows) < 2:
        raise ValueError("coherence needs at least 2 flow fields")
    shape = flows[0].u.shape
    sum_ux = np.zeros(shape, dtype=np.float64)
    sum_uy = np.zeros(shape, dtype=np.float64)
    sum_mag = np.zeros(shape, dtype=np.float64)
    for f in flows:
        u = f.u.astype(np.float64)
        v = f.v_comp.astype(np.float64)
        mag = np.hypot(u, v)
        nz = mag > 0
        inv = np.zeros_like(mag)
        inv[nz] = 1.0 / mag[nz]
        sum_ux += u * inv
        sum_uy += v * inv
        sum_mag += mag
    t = len(flows)
    resultant = np.hypot(sum_ux, sum_uy) / t
    var_theta = 1.0 - np.clip(resultant, 0.0, 1.0)
    mean_mag = sum_mag / t
    return np.exp(-var_theta) * (mean_mag > tau)


def motion_boundary_map(flows: list[FlowField]) -> ScalarMap:
    return ScalarMap(values=boundary_strength_values(flows), kind="boundary_strength")


def coherence_decode_map(flows: list[FlowField], cfg: "MetricConfig") -> ScalarMap:
    return ScalarMap(values=coherence_values(flows, cfg.tau), kind="coherence")


def motion_direction_map(flows: list[FlowField]) -> ScalarMap:
    """Signed projection of the time-mean flow onto the dominant motion axis.

    The axis is the per-pixel-mean absolute flow direction, normalized; with
    the default vertical scroll this is simply the mean vertical flow. The
    sign separates the two opposing carriers, which the mask estimator uses
    to tell content holes (background showing through) from content interior.
    """
    if not flows:
        raise ValueError("need at least one flow field")
    shape = flows[0].u.shape
    mu = np.zeros(shape, dtype=np.float64)
    mv = np.zeros(shape, dtype=np.float64)
    for f in flows:
        mu += f.u
        mv += f.v_comp
    mu /= len(flows)
    mv /= len(flows)
    ax_u = float(np.abs(mu).mean())
    ax_v = float(np.abs(mv).mean())
    norm = np.hypot(ax_u, ax_v)
    if norm == 0:
        return ScalarMap(values=np.zeros(shape), kind="direction")
    return ScalarMap(values=(mu * ax_u + mv * ax_v) / norm, kind="direction")


def estimate_mask(boundary: ScalarMap, coherence: ScalarMap,
                  direction: ScalarMap | None = None, *,
                  percentile: float = 90.0,
                  method: str = "percentile",
                  closing_iterations: int = 2,
                  min_component_frac: float = 0.25,
                  direction_tolerance: float = 1.0,
                  max_trim: int = 12,
                  border: int = 12) -> ContentMask:
    """Segment the content region from flow-derived maps.

    Pipeline: zero a border band (flow there is clamped-window junk), threshold
    the boundary map (percentile of interior values, or Otsu-style bimodal
    split with method="bimodal"), close with a 3x3 element, fill enclosed
    regions, keep every connected component at least min_component_frac of the
    largest one (multi-glyph content is several same-scale components; speckle
    false positives are far smaller), then erode while the estimate's rim
    climbs toward the boundary-map crest, shaving the threshold halo.

    When a ``direction`` map is supplied, an enclosed region whose motion is
    within direction_tolerance of the outside background's motion is background
    showing through a content hole and stays unfilled.
    """
    if boundary.values.shape != coherence.values.shape:
        raise DimensionMismatch("boundary and coherence maps differ in shape")
    if direction is not None and direction.values.shape != boundary.values.shape:
        raise DimensionMismatch("direction map differs in shape")
    vals = np.array(boundary.values)
    h, w = vals.shape
    if border > 0:
        if 2 * border >= min(h, w):
            raise ValueError("border band leaves no interior")
        mask_band = np.zeros_like(vals, dtype=bool)
        mask_band[border:h - border, border:w - border] = True
        vals[~mask_band] = 0.0
        interior_vals = vals[mask_band]
    else:
        interior_vals = vals.ravel()

    if method == "percentile":
        thr = float(np.percentile(interior_vals, percentile))
    elif method == "bimodal":
        thr = _bimodal_threshold(interior_vals)
    else:
        raise ValueError(f"unknown threshold method {method!r}")

    binary = vals > thr
    if not binary.any():
        raise NoRegionFound("nothing above threshold; video looks contentless")

    structure = np.ones((3, 3), dtype=bool)
    closed = ndimage.binary_closing(binary, structure=structure, iterations=closing_iterations)
    filled = ndimage.binary_fill_holes(closed)

    if direction is not None:
        filled = _unfill_background_holes(closed, filled, direction.values, direction_tolerance)

    labels, n = ndimage.label(filled, structure=structure)
    if n == 0:
        raise NoRegionFound("no connected component survived morphology")
    sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=np.arange(1, n + 1))
    keep = np.flatnonzero(sizes >= min_component_frac * sizes.max()) + 1
    bits = np.isin(labels, keep)
    bits = _crest_trim(bits, boundary.values, max_trim)
    return ContentMask(bits=bits)


def _unfill_background_holes(closed: np.ndarray, filled: np.ndarray,
                             direction: np.ndarray, tolerance: float) -> np.ndarray:
    """Keep enclosed regions open when they move with the outside background."""
    holes = filled & ~closed
    outside = ~filled
    if not holes.any() or not outside.any():
        return filled
    bg_dir = float(direction[outside].mean())
    out = filled.copy()
    labels, n = ndimage.label(holes)
    for i in range(1, n + 1):
        region = labels == i
        if abs(float(direction[region].mean()) - bg_dir) < tolerance:
            out[region] = False
    return out


def _crest_trim(bits: np.ndarray, boundary_values: np.ndarray, max_trim: int) -> np.ndarray:
    """Erode while the rim's mean boundary strength still rises inward, so the
    estimate's edge settles on the motion-boundary crest instead of its halo."""
    est = bits
    for _ in range(max_trim):
        eroded = ndimage.binary_erosion(est)
        rim = est & ~eroded
        inner = eroded & ~ndimage.binary_erosion(eroded)
        if not rim.any() or not inner.any():
            break
        if boundary_values[inner].mean() > boundary_values[rim].mean():
            est = eroded
        else:
            break
    return est


def _bimodal_threshold(values: np.ndarray) -> float:
    """Otsu's split over a 256-bin histogram of the value range."""
    lo, hi = float(values.min()), float(values.max())
    if hi <= lo:
        return hi
    hist, edges = np.histogram(values, bins=256, range=(lo, hi))
    p = hist.astype(np.float64) / hist.sum()
    centers = (edges[:-1] + edges[1:]) / 2
    w0 = np.cumsum(p)
    w1 = 1.0 - w0
    mu = np.cumsum(p * centers)
    mu_t = mu[-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        between = (mu_t * w0 - mu) ** 2 / (w0 * w1)
    between[~np.isfinite(between)] = -1.0
    return float(centers[int(np.argmax(between))])


def mask_iou(a: ContentMask, b: ContentMask) -> float:
    if a.bits.shape != b.bits.shape:
        raise DimensionMismatch("masks differ in shape")
    inter = np.logical_and(a.bits, b.bits).sum()
    union = np.logical_or(a.bits, b.bits).sum()
    return float(inter) / float(union) if union else 0.0


@dataclass(frozen=True)
class OverlayStyle:
    color: tuple[int, int, int] = (255, 0, 0)
    opacity: float = 0.5

    def __post_init__(self):
        if not (0.0 <= self.opacity <= 1.0):
            raise ValueError("opacity must lie in [0,1]")


def render_overlay(base: FrameBuffer, layer: Union[ContentMask, ScalarMap],
                   style: OverlayStyle = OverlayStyle()) -> tuple[FrameBuffer, FrameBuffer, FrameBuffer]:
    """Colorized composite for documentation and the study UI; never feeds metrics.

    Per channel: out = rint((1 - a) * base + a * color) with a = opacity for
    mask pixels, or opacity * value / max(value) for scalar maps.
    """
    if isinstance(layer, ContentMask):
        if layer.bits.shape != base.pixels.shape:
            raise DimensionMismatch("layer does not match base frame")
        alpha = style.opacity * layer.bits.astype(np.float64)
    else:
        if layer.values.shape != base.pixels.shape:
            raise DimensionMismatch("layer does not match base frame")
        peak = layer.values.max()
        alpha = style.opacity * (layer.values / peak if peak > 0 else np.zeros_like(layer.values))

    g = base.pixels.astype(np.float64)
    channels = []
    for c in style.color:
        blended = np.rint((1.0 - alpha) * g + alpha * float(c)).astype(np.uint8)
        channels.append(FrameBuffer(pixels=blended))
    return tuple(channels)

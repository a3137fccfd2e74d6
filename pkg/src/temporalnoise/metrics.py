"""Optical-flow signal-to-noise metrics and the per-video report.

Four metrics, all in decibels, all computed over the interior region (a
border band of flow artifacts is excluded from every aggregation):

* basic: mean squared Jacobian norm of the flow against the first frame's
  intensity variance.
* perceptual: spectra of the time-averaged motion boundary map and of the
  first frame, each weighted by the contrast sensitivity curve
  W(f) = f * exp(-f / f0) over radial frequency in cycles/pixel.
* temporal coherence: global variance of the directional coherence map over
  the mean of its local variances.
* motion contrast: squared distance between mean foreground/background flow
  vectors over the pooled within-region variance.

Variances are population variances throughout, matching the expectation
semantics of the definitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from .decode import (NoRegionFound, boundary_strength_values, coherence_values,
                     estimate_mask, jacobian_energy, motion_boundary_map,
                     coherence_decode_map, motion_direction_map)
from .encode import FrameSequence
from .flow import FlowOptions, flow_sequence
from .types import ContentMask, FlowField, FrameBuffer

MASK_GROUND_TRUTH = "ground_truth"
MASK_ESTIMATED = "estimated"


class ZeroNoiseVariance(ValueError):
    pass


class ZeroWeightedNoise(ValueError):
    pass


class DegenerateCoherence(ValueError):
    """C is constant; both variances vanish and the ratio is undefined."""


class EmptyRegion(ValueError):
    pass


class DegenerateContrast(ValueError):
    """Zero within-region variance with distinct means; ratio is unbounded."""


class TooFewFlows(ValueError):
    pass


class MaskRequired(ValueError):
    pass


@dataclass(frozen=True)
class MetricConfig:
    f0: float = 0.1
    tau: float = 0.5
    local_window: int = 5
    border_exclude: int = 12
    mask_source: str = MASK_GROUND_TRUTH

    def __post_init__(self):
        if self.f0 <= 0:
            raise ValueError("f0 must be positive")
        if self.tau < 0:
            raise ValueError("tau must be non-negative")
        if self.local_window < 3 or self.local_window % 2 == 0:
            raise ValueError("local_window must be odd and >= 3")
        if self.border_exclude < 0:
            raise ValueError("border_exclude must be non-negative")
        if self.mask_source not in (MASK_GROUND_TRUTH, MASK_ESTIMATED):
            raise ValueError(f"unknown mask_source {self.mask_source!r}")


def _interior(a: np.ndarray, border: int) -> np.ndarray:
    if border == 0:
        return a
    h, w = a.shape[:2]
    if 2 * border >= h or 2 * border >= w:
        raise ValueError(f"border {border} leaves no interior on {w}x{h}")
    return a[border:h - border, border:w - border]


def basic_snr(flows: list[FlowField], first_frame: FrameBuffer, cfg: MetricConfig = MetricConfig()) -> float:
    """10 log10(P_S / P_N): motion boundary energy over static-frame variance."""
    if not flows:
        raise TooFewFlows("need at least one flow field")
    p_s = 0.0
    for f in flows:
        p_s += float(_interior(jacobian_energy(f), cfg.border_exclude).mean())
    p_s /= len(flows)
    p_n = float(_interior(first_frame.pixels.astype(np.float64), cfg.border_exclude).var())
    if p_n == 0.0:
        raise ZeroNoiseVariance("first frame is constant; the ratio is undefined")
    if p_s == 0.0:
        return float("-inf")
    return 10.0 * math.log10(p_s / p_n)


def csf_weights(shape: tuple[int, int], f0: float) -> np.ndarray:
    """W(f) = f exp(-f/f0) over radial frequency of an fft2 grid (cycles/pixel)."""
    fy = np.fft.fftfreq(shape[0])
    fx = np.fft.fftfreq(shape[1])
    f = np.hypot(fy[:, None], fx[None, :])
    return f * np.exp(-f / f0)


def _next_pow2(n: int) -> int:
    return 1 << (n - 1).bit_length()


def weighted_spectral_snr_db(signal_map: np.ndarray, noise_map: np.ndarray,
                             cfg: MetricConfig = MetricConfig()) -> float:
    """The spectral core of the perceptual metric, on already-cropped maps.

    Both maps go onto the same zero-padded power-of-two square grid; each
    frequency bin is weighted by W(f) before the energy ratio is taken.
    """
    if signal_map.shape != noise_map.shape:
        raise ValueError("signal and noise maps must match in shape")
    n = _next_pow2(max(signal_map.shape))
    w2 = csf_weights((n, n), cfg.f0) ** 2
    num = float((np.abs(np.fft.fft2(signal_map, s=(n, n))) ** 2 * w2).sum())
    den = float((np.abs(np.fft.fft2(noise_map, s=(n, n))) ** 2 * w2).sum())
    if den == 0.0:
        raise ZeroWeightedNoise("noise frame has no weighted spectral energy")
    if num == 0.0:
        return float("-inf")
    return 10.0 * math.log10(num / den)


def perceptual_snr(flows: list[FlowField], noise_frame: FrameBuffer,
                   cfg: MetricConfig = MetricConfig()) -> float:
    b = _interior(boundary_strength_values(flows), cfg.border_exclude)
    n = _interior(noise_frame.pixels.astype(np.float64), cfg.border_exclude)
    return weighted_spectral_snr_db(b, n, cfg)


def temporal_coherence_snr(flows: list[FlowField], cfg: MetricConfig = MetricConfig()) -> float:
    if len(flows) < 2:
        raise TooFewFlows("temporal variance needs at least 2 flow fields")
    c = coherence_values(flows, cfg.tau)
    ci = _interior(c, cfg.border_exclude)
    var_c = float(ci.var())
    m = ndimage.uniform_filter(c, size=cfg.local_window, mode="nearest")
    m2 = ndimage.uniform_filter(c * c, size=cfg.local_window, mode="nearest")
    local_var = np.clip(m2 - m * m, 0.0, None)
    mean_local = float(_interior(local_var, cfg.border_exclude).mean())
    if mean_local == 0.0:
        if var_c == 0.0:
            raise DegenerateCoherence("coherence map is constant")
        raise DegenerateCoherence("coherence map is locally constant everywhere")
    if var_c == 0.0:
        return float("-inf")
    return 10.0 * math.log10(var_c / mean_local)


def motion_contrast_snr(flows: list[FlowField], mask: ContentMask,
                        cfg: MetricConfig = MetricConfig()) -> float:
    if not flows:
        raise TooFewFlows("need at least one flow field")
    if mask.bits.shape != flows[0].u.shape:
        raise ValueError("mask does not match flow dimensions")
    m = _interior(mask.bits, cfg.border_exclude)
    fg = m
    bg = ~m
    n_fg = int(fg.sum())
    n_bg = int(bg.sum())
    if n_fg == 0 or n_bg == 0:
        raise EmptyRegion("both regions must be non-empty after border exclusion")

    sums = np.zeros((2, 2), dtype=np.float64)   # [region][component] of flow
    sq = np.zeros(2, dtype=np.float64)          # [region] sum of u^2+v^2
    for f in flows:
        u = _interior(f.u.astype(np.float64), cfg.border_exclude)
        v = _interior(f.v_comp.astype(np.float64), cfg.border_exclude)
        for r, sel in enumerate((fg, bg)):
            sums[r, 0] += u[sel].sum()
            sums[r, 1] += v[sel].sum()
            sq[r] += (u[sel] ** 2).sum() + (v[sel] ** 2).sum()

    t = len(flows)
    counts = np.array([n_fg * t, n_bg * t], dtype=np.float64)
    mu = sums / counts[:, None]
    sigma2 = sq / counts - (mu ** 2).sum(axis=1)
    num = float(((mu[0] - mu[1]) ** 2).sum())
    if num == 0.0:
        return float("-inf")
    den = 0.5 * float(sigma2.sum())
    if den <= 0.0:
        raise DegenerateContrast("within-region variance is zero")
    return 10.0 * math.log10(num / den)


@dataclass(frozen=True)
class SnrReport:
    """Per-video metric report. -inf marks documented degenerate cases; a None
    temporal_coherence_db means the coherence ratio was not applicable.
    combined_db is the arithmetic mean of the finite metric values only, a
    toolkit convention (no published formula exists), flagged as such."""

    basic_db: float
    perceptual_db: float
    temporal_coherence_db: Optional[float]
    motion_contrast_db: float
    combined_db: Optional[float]
    contentless: bool
    provenance: dict = field(default_factory=dict)

    COMBINED_NOTE = "combined_db = arithmetic mean of finite metrics (toolkit convention)"


def analyze_video(seq: FrameSequence, mask: Optional[ContentMask] = None,
                  cfg: MetricConfig = MetricConfig(),
                  flow_opts: FlowOptions = FlowOptions()) -> SnrReport:
    """Run the flow and all four metrics over one video."""
    if len(seq.frames) < 3:
        raise TooFewFlows("analysis needs at least 3 frames")
    flows = flow_sequence(seq, flow_opts)
    first = seq.frames[0]

    basic = basic_snr(flows, first, cfg)
    perceptual = perceptual_snr(flows, first, cfg)

    coherence: Optional[float]
    try:
        coherence = temporal_coherence_snr(flows, cfg)
    except DegenerateCoherence:
        coherence = None

    mask_used = cfg.mask_source
    decoder_note = None
    if cfg.mask_source == MASK_GROUND_TRUTH and mask is not None:
        contrast_mask: Optional[ContentMask] = mask
    else:
        mask_used = MASK_ESTIMATED
        try:
            contrast_mask = estimate_mask(
                motion_boundary_map(flows),
                coherence_decode_map(flows, cfg),
                motion_direction_map(flows),
                border=cfg.border_exclude,
            )
        except NoRegionFound:
            contrast_mask = None
            decoder_note = "mask estimation found no region"

    if contrast_mask is not None:
        try:
            contrast = motion_contrast_snr(flows, contrast_mask, cfg)
        except EmptyRegion:
            contrast = float("-inf")
            decoder_note = "contrast region empty after border exclusion"
    else:
        contrast = float("-inf")

    values = [basic, perceptual, coherence, contrast]
    finite = [v for v in values if v is not None and math.isfinite(v)]
    combined = sum(finite) / len(finite) if finite else None
    contentless = not finite

    provenance = {
        "metric_config": {
            "f0": cfg.f0, "tau": cfg.tau, "local_window": cfg.local_window,
            "border_exclude": cfg.border_exclude, "mask_source": mask_used,
        },
        "flow_options": {
            "window": flow_opts.window, "max_disp": flow_opts.max_disp,
            "levels": flow_opts.levels, "smoothing": flow_opts.smoothing,
        },
        "frame_count": len(seq.frames),
        "fps": seq.fps,
        "combined_note": SnrReport.COMBINED_NOTE,
    }
    if seq.params is not None:
        provenance["params"] = {
            "width": seq.params.width, "height": seq.params.height,
            "fps": seq.params.fps, "duration_s": seq.params.duration_s,
            "velocity": list(seq.params.velocity), "block_size": seq.params.block_size,
            "density": seq.params.density, "seed": seq.params.seed,
        }
    if decoder_note:
        provenance["note"] = decoder_note

    return SnrReport(
        basic_db=basic,
        perceptual_db=perceptual,
        temporal_coherence_db=coherence,
        motion_contrast_db=contrast,
        combined_db=combined,
        contentless=contentless,
        provenance=provenance,
    )


def summarize_by_category(rows: list[tuple[str, SnrReport]]) -> dict[str, dict[str, tuple[float, float]]]:
    """Per-category mean and population stdev of each finite metric."""
    metrics = {
        "basic_db": lambda r: r.basic_db,
        "perceptual_db": lambda r: r.perceptual_db,
        "temporal_coherence_db": lambda r: r.temporal_coherence_db,
        "motion_contrast_db": lambda r: r.motion_contrast_db,
    }
    out: dict[str, dict[str, tuple[float, float]]] = {}
    for category in sorted({c for c, _ in rows}):
        stats = {}
        for name, get in metrics.items():
            vals = [get(r) for c, r in rows if c == category]
            vals = [v for v in vals if v is not None and math.isfinite(v)]
            if vals:
                a = np.array(vals)
                stats[name] = (float(a.mean()), float(a.std()))
        out[category] = stats
    return out


def format_category_table(summary: dict[str, dict[str, tuple[float, float]]]) -> str:
    """Fixed-layout aggregate table: one row per category, mean +- stdev."""
    cols = [
        ("basic_db", "Basic SNR (dB)"),
        ("perceptual_db", "Perceptual SNR"),
        ("temporal_coherence_db", "Temporal Coherence"),
        ("motion_contrast_db", "Motion Contrast"),
    ]
    header = f"{'Category':<16}" + "".join(f"{label:>22}" for _, label in cols)
    lines = [header, "-" * len(header)]
    for category, stats in summary.items():
        cells = []
        for key, _ in cols:
            if key in stats:
                mean, sd = stats[key]
                cells.append(f"{mean:9.2f} +- {sd:6.2f}")
            else:
                cells.append("n/a")
        lines.append(f"{category:<16}" + "".join(f"{c:>22}" for c in cells))
    return "\n".join(lines)

"""Toolkit for hiding content in temporal motion patterns of binary noise,
measuring it with optical-flow SNR metrics, decoding it back, and scoring
identification studies."""

from .types import (ContentMask, DepthSequence, EncodingParams, FlowField, FrameBuffer,
                    ValidatedParams, validate_params)
from .noise import NoisePattern, generate_noise, generate_pattern_pair, sample_wrapped
from .masks import (ShapeSpec, TextSpec, load_depth_sequence, load_mask_image,
                    render_shape_mask, render_text_mask)
from .encode import (DepthThresholds, FrameSequence, encode_depth_animation,
                     encode_mask_animation)
from .flow import FlowOptions, estimate_flow, flow_sequence
from .metrics import (MetricConfig, SnrReport, analyze_video, basic_snr,
                      motion_contrast_snr, perceptual_snr, temporal_coherence_snr)
from .decode import (OverlayStyle, ScalarMap, coherence_decode_map, estimate_mask,
                     mask_iou, motion_boundary_map, render_overlay)
from .evaluate import (AccuracyReport, LabelSet, ResponseRecord, ThresholdReport,
                       normalize_response, perceptibility_summary, score,
                       snr_threshold_analysis)
from .store import (Manifest, ManifestEntry, load_manifest, read_y4m, read_y4m_file,
                    regenerate_entry, save_manifest, verify_entry, write_y4m,
                    write_y4m_file)

__version__ = "0.1.0"

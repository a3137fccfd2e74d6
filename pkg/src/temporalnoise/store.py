"""Persistence: Y4M containers, PNG frame sequences, manifests, response logs.

All structured files share one canonical text serialization: JSON with sorted
keys, floats at 6 significant digits, no NaN/inf (degenerate metric values are
encoded as the strings "-inf" / "n/a"). Every file embeds a schema tag.
Response logs are newline-delimited records, one canonical JSON object per
line, appended with a single write so concurrent writers never interleave
within a record.
"""

from __future__ import annotations

import io
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Optional, Union

import numpy as np
from PIL import Image

from .encode import (DepthThresholds, FrameSequence, encode_depth_animation,
                     encode_mask_animation)
from .evaluate import CATEGORIES, ResponseRecord
from .masks import (ShapeSpec, TextSpec, load_depth_sequence, load_mask_image,
                    render_shape_mask, render_text_mask)
from .metrics import SnrReport
from .types import EncodingParams, FrameBuffer, validate_params

MANIFEST_SCHEMA = "manifest/1"
RESPONSE_SCHEMA = "response/1"
SEQUENCE_SCHEMA = "framesq/1"
SNR_REPORT_SCHEMA = "snr_report/1"


class SchemaViolation(ValueError):
    def __init__(self, path: str, message: str):
        self.field_path = path
        super().__init__(f"{path}: {message}")


class DuplicateVideoId(ValueError):
    pass


class OddDimensions(ValueError):
    pass


class BadHeader(ValueError):
    pass


class TruncatedFrame(ValueError):
    pass


class UnsupportedChromaTag(ValueError):
    pass


# ---------------------------------------------------------------------------
# canonical serialization
# ---------------------------------------------------------------------------

def _canonical_fragment(obj) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise SchemaViolation("<value>", "non-finite floats must be encoded as strings")
        if obj == 0.0:
            return "0"  # avoid the unstable "-0" spelling
        return format(obj, ".6g")
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_canonical_fragment(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = []
        for k in sorted(obj):
            if not isinstance(k, str):
                raise SchemaViolation("<key>", f"keys must be strings, got {type(k).__name__}")
            items.append(json.dumps(k, ensure_ascii=False) + ":" + _canonical_fragment(obj[k]))
        return "{" + ",".join(items) + "}"
    raise SchemaViolation("<value>", f"unserializable type {type(obj).__name__}")


def canonical_dumps(obj) -> str:
    """One canonical text form: sorted keys, floats at 6 significant digits."""
    return _canonical_fragment(obj)


def canonical_loads(text: str):
    return json.loads(text)


# ---------------------------------------------------------------------------
# Y4M container
# ---------------------------------------------------------------------------

_C420_TAGS = {"420jpeg", "420mpeg2", "420paldv", "420"}


def write_y4m(seq: FrameSequence, sink: BinaryIO) -> int:
    """Lossless luma-only Y4M: neutral chroma planes, byte-deterministic."""
    w, h = seq.width, seq.height
    if w % 2 or h % 2:
        raise OddDimensions(f"Y4M needs even dimensions, got {w}x{h}")
    written = 0
    header = f"YUV4MPEG2 W{w} H{h} F{seq.fps}:1 Ip A1:1 C420jpeg\n".encode("ascii")
    written += sink.write(header)
    chroma = b"\x80" * ((w // 2) * (h // 2))
    for f in seq.frames:
        written += sink.write(b"FRAME\n")
        written += sink.write(f.pixels.tobytes())
        written += sink.write(chroma)
        written += sink.write(chroma)
    return written


def write_y4m_file(seq: FrameSequence, path: Union[str, os.PathLike]) -> int:
    with open(path, "wb") as f:
        return write_y4m(seq, f)


def _read_line(source: BinaryIO, what: str) -> bytes:
    chunks = []
    while True:
        b = source.read(1)
        if not b:
            raise BadHeader(f"stream ended inside {what}")
        if b == b"\n":
            return b"".join(chunks)
        chunks.append(b)
        if len(chunks) > 512:
            raise BadHeader(f"{what} is implausibly long")


def read_y4m(source: BinaryIO) -> FrameSequence:
    header = _read_line(source, "header").decode("ascii", errors="replace")
    tokens = header.split(" ")
    if tokens[0] != "YUV4MPEG2":
        raise BadHeader("missing YUV4MPEG2 magic")
    w = h = None
    fps = None
    chroma_tag = "420jpeg"
    for tok in tokens[1:]:
        if not tok:
            continue
        key, val = tok[0], tok[1:]
        if key == "W":
            w = int(val)
        elif key == "H":
            h = int(val)
        elif key == "F":
            num, _, den = val.partition(":")
            n, d = int(num), int(den or "1")
            if d <= 0 or n % d:
                raise BadHeader(f"unsupported frame rate {val}")
            fps = n // d
        elif key == "C":
            chroma_tag = val
    if w is None or h is None or fps is None:
        raise BadHeader("header must carry W, H and F tags")
    if chroma_tag not in _C420_TAGS:
        raise UnsupportedChromaTag(f"C{chroma_tag} is not a 4:2:0 tag")

    luma_size = w * h
    chroma_size = (w // 2) * (h // 2)
    frames = []
    while True:
        first = source.read(1)
        if not first:
            break
        marker = first
        while not marker.endswith(b"\n"):
            b = source.read(1)
            if not b:
                raise BadHeader("stream ended inside FRAME marker")
            marker += b
            if len(marker) > 512:
                raise BadHeader("FRAME marker is implausibly long")
        if not marker.startswith(b"FRAME"):
            raise BadHeader(f"expected FRAME marker, got {marker[:16]!r}")
        luma = source.read(luma_size)
        cb = source.read(chroma_size)
        cr = source.read(chroma_size)
        if len(luma) < luma_size or len(cb) < chroma_size or len(cr) < chroma_size:
            raise TruncatedFrame(f"frame {len(frames)} is truncated")
        pixels = np.frombuffer(luma, dtype=np.uint8).reshape(h, w)
        frames.append(FrameBuffer(pixels=pixels))
    if not frames:
        raise BadHeader("no frames in stream")
    return FrameSequence(frames=tuple(frames), fps=fps)


def read_y4m_file(path: Union[str, os.PathLike]) -> FrameSequence:
    with open(path, "rb") as f:
        return read_y4m(f)


# ---------------------------------------------------------------------------
# PNG frame sequences
# ---------------------------------------------------------------------------

def params_to_dict(p) -> dict:
    return {
        "width": p.width, "height": p.height, "fps": p.fps,
        "duration_s": p.duration_s, "velocity": [p.velocity[0], p.velocity[1]],
        "block_size": p.block_size, "density": p.density, "seed": p.seed,
    }


def params_from_dict(d: dict, path: str = "params") -> EncodingParams:
    try:
        return EncodingParams(
            width=int(d["width"]), height=int(d["height"]), fps=int(d["fps"]),
            duration_s=float(d["duration_s"]),
            velocity=(float(d["velocity"][0]), float(d["velocity"][1])),
            block_size=int(d["block_size"]), density=float(d["density"]),
            seed=int(d["seed"]),
        )
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise SchemaViolation(path, f"bad encoding params: {e}") from e


def write_png_sequence(seq: FrameSequence, directory: Union[str, os.PathLike]) -> list[str]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    names = []
    for i, f in enumerate(seq.frames):
        name = f"frame_{i:06d}.png"
        Image.fromarray(f.pixels, mode="L").save(d / name)
        names.append(name)
    meta = {
        "schema": SEQUENCE_SCHEMA,
        "fps": seq.fps,
        "frame_count": len(seq.frames),
        "width": seq.width,
        "height": seq.height,
        "params": params_to_dict(seq.params) if seq.params else None,
    }
    (d / "sequence.json").write_text(canonical_dumps(meta) + "\n", encoding="utf-8")
    return names


def read_png_sequence(directory: Union[str, os.PathLike]) -> FrameSequence:
    d = Path(directory)
    meta_path = d / "sequence.json"
    if not meta_path.exists():
        raise SchemaViolation("sequence.json", "missing sidecar metadata")
    meta = canonical_loads(meta_path.read_text(encoding="utf-8"))
    if meta.get("schema") != SEQUENCE_SCHEMA:
        raise SchemaViolation("sequence.json.schema", f"expected {SEQUENCE_SCHEMA}")
    frames = []
    shape = None
    for i in range(int(meta["frame_count"])):
        p = d / f"frame_{i:06d}.png"
        if not p.exists():
            raise SchemaViolation(f"frame_{i:06d}.png", "missing frame file")
        arr = np.asarray(Image.open(p).convert("L"), dtype=np.uint8)
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise SchemaViolation(f"frame_{i:06d}.png", "mixed frame dimensions")
        frames.append(FrameBuffer(pixels=arr))
    params = None
    if meta.get("params"):
        params = validate_params(params_from_dict(meta["params"], "sequence.json.params"))
    return FrameSequence(frames=tuple(frames), fps=int(meta["fps"]), params=params)


def save_overlay_png(rgb: tuple[FrameBuffer, FrameBuffer, FrameBuffer],
                     path: Union[str, os.PathLike]) -> None:
    arr = np.stack([c.pixels for c in rgb], axis=-1)
    Image.fromarray(arr, mode="RGB").save(path)


def save_mask_png(bits: np.ndarray, path: Union[str, os.PathLike]) -> None:
    Image.fromarray(np.where(bits, 255, 0).astype(np.uint8), mode="L").save(path)


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    """One dataset row; regenerable from these fields alone."""

    video_id: str
    category: str
    labels: tuple[str, ...]
    params: EncodingParams
    source: dict
    container: str
    prompts: Optional[dict] = None

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise SchemaViolation(f"{self.video_id}.category", f"unknown category {self.category!r}")
        if not self.labels:
            raise SchemaViolation(f"{self.video_id}.labels", "label set is empty")
        object.__setattr__(self, "labels", tuple(self.labels))

    def to_dict(self) -> dict:
        d = {
            "video_id": self.video_id,
            "category": self.category,
            "labels": list(self.labels),
            "params": params_to_dict(self.params),
            "source": self.source,
            "container": self.container,
        }
        if self.prompts is not None:
            d["prompts"] = self.prompts
        return d


@dataclass(frozen=True)
class Manifest:
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e.video_id in seen:
                raise DuplicateVideoId(e.video_id)
            seen.add(e.video_id)
        object.__setattr__(self, "entries", tuple(self.entries))

    def __len__(self):
        return len(self.entries)

    def get(self, video_id: str) -> ManifestEntry:
        for e in self.entries:
            if e.video_id == video_id:
                return e
        raise KeyError(video_id)


def manifest_to_text(m: Manifest) -> str:
    return canonical_dumps({
        "schema": MANIFEST_SCHEMA,
        "entries": [e.to_dict() for e in m.entries],
    }) + "\n"


def save_manifest(m: Manifest, path: Union[str, os.PathLike]) -> None:
    Path(path).write_text(manifest_to_text(m), encoding="utf-8")


def _entry_from_dict(d: dict, path: str) -> ManifestEntry:
    for key in ("video_id", "category", "labels", "params", "source", "container"):
        if key not in d:
            raise SchemaViolation(f"{path}.{key}", "missing required field")
    if not isinstance(d["source"], dict) or "type" not in d["source"]:
        raise SchemaViolation(f"{path}.source", "source must carry a type")
    return ManifestEntry(
        video_id=str(d["video_id"]),
        category=str(d["category"]),
        labels=tuple(str(l) for l in d["labels"]),
        params=params_from_dict(d["params"], f"{path}.params"),
        source=d["source"],
        prompts=d.get("prompts"),
        container=str(d["container"]),
    )


def manifest_from_text(text: str) -> Manifest:
    try:
        data = canonical_loads(text)
    except json.JSONDecodeError as e:
        raise SchemaViolation("<root>", f"not valid JSON: {e}") from e
    if not isinstance(data, dict) or data.get("schema") != MANIFEST_SCHEMA:
        raise SchemaViolation("schema", f"expected {MANIFEST_SCHEMA}")
    entries = [
        _entry_from_dict(d, f"entries[{i}]")
        for i, d in enumerate(data.get("entries", []))
    ]
    return Manifest(entries=tuple(entries))


def load_manifest(path: Union[str, os.PathLike]) -> Manifest:
    return manifest_from_text(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# response log
# ---------------------------------------------------------------------------

def response_to_dict(r: ResponseRecord) -> dict:
    d = {
        "schema": RESPONSE_SCHEMA,
        "video_id": r.video_id,
        "responder_id": r.responder_id,
        "response_text": r.response_text,
        "timestamp": r.timestamp,
    }
    if r.perceptibility is not None:
        d["perceptibility"] = r.perceptibility
    if r.fps_shown is not None:
        d["fps_shown"] = r.fps_shown
    if r.prompt_id is not None:
        d["prompt_id"] = r.prompt_id
    if r.session_id is not None:
        d["session_id"] = r.session_id
    return d


def response_from_dict(d: dict, path: str = "<record>") -> ResponseRecord:
    if d.get("schema") != RESPONSE_SCHEMA:
        raise SchemaViolation(f"{path}.schema", f"expected {RESPONSE_SCHEMA}")
    for key in ("video_id", "responder_id", "response_text"):
        if key not in d:
            raise SchemaViolation(f"{path}.{key}", "missing required field")
    perceptibility = d.get("perceptibility")
    if perceptibility is not None:
        if not isinstance(perceptibility, int) or not (1 <= perceptibility <= 5):
            raise SchemaViolation(f"{path}.perceptibility", "must be an integer in [1,5]")
    try:
        return ResponseRecord(
            video_id=str(d["video_id"]),
            responder_id=str(d["responder_id"]),
            response_text=str(d["response_text"]),
            perceptibility=perceptibility,
            fps_shown=d.get("fps_shown"),
            prompt_id=d.get("prompt_id"),
            session_id=d.get("session_id"),
            timestamp=int(d.get("timestamp", 0)),
        )
    except ValueError as e:
        raise SchemaViolation(path, str(e)) from e


def append_response(path: Union[str, os.PathLike], r: ResponseRecord) -> None:
    """One canonical line per record, written with a single call (line-atomic)."""
    line = canonical_dumps(response_to_dict(r)) + "\n"
    with open(path, "a", encoding="utf-8") as f:
        f.write(line)


def read_responses(path: Union[str, os.PathLike]) -> list[ResponseRecord]:
    out = []
    with open(path, "r", encoding="utf-8") as f:
        for i, line in enumerate(f):
            line = line.strip()
            if not line:
                continue
            try:
                d = canonical_loads(line)
            except json.JSONDecodeError as e:
                raise SchemaViolation(f"line {i + 1}", f"not valid JSON: {e}") from e
            out.append(response_from_dict(d, f"line {i + 1}"))
    return out


# ---------------------------------------------------------------------------
# SNR report serialization
# ---------------------------------------------------------------------------

def _db_out(v: Optional[float]):
    if v is None:
        return "n/a"
    if v == float("-inf"):
        return "-inf"
    if v == float("inf"):
        return "inf"
    return v


def _db_in(v, path: str) -> Optional[float]:
    if v == "n/a" or v is None:
        return None
    if v == "-inf":
        return float("-inf")
    if v == "inf":
        return float("inf")
    if isinstance(v, (int, float)):
        return float(v)
    raise SchemaViolation(path, f"bad metric value {v!r}")


def report_to_dict(r: SnrReport, video_id: Optional[str] = None) -> dict:
    d = {
        "schema": SNR_REPORT_SCHEMA,
        "basic_db": _db_out(r.basic_db),
        "perceptual_db": _db_out(r.perceptual_db),
        "temporal_coherence_db": _db_out(r.temporal_coherence_db),
        "motion_contrast_db": _db_out(r.motion_contrast_db),
        "combined_db": _db_out(r.combined_db),
        "contentless": r.contentless,
        "provenance": r.provenance,
    }
    if video_id is not None:
        d["video_id"] = video_id
    return d


def report_from_dict(d: dict, path: str = "<report>") -> SnrReport:
    if d.get("schema") != SNR_REPORT_SCHEMA:
        raise SchemaViolation(f"{path}.schema", f"expected {SNR_REPORT_SCHEMA}")

    def req(key):
        if key not in d:
            raise SchemaViolation(f"{path}.{key}", "missing required field")
        return _db_in(d[key], f"{path}.{key}")

    basic = req("basic_db")
    perceptual = req("perceptual_db")
    contrast = req("motion_contrast_db")
    if basic is None or perceptual is None or contrast is None:
        raise SchemaViolation(path, "basic/perceptual/contrast may be -inf but not n/a")
    return SnrReport(
        basic_db=basic,
        perceptual_db=perceptual,
        temporal_coherence_db=req("temporal_coherence_db"),
        motion_contrast_db=contrast,
        combined_db=req("combined_db"),
        contentless=bool(d.get("contentless", False)),
        provenance=d.get("provenance", {}),
    )


def save_report(r: SnrReport, path: Union[str, os.PathLike], video_id: Optional[str] = None) -> None:
    Path(path).write_text(canonical_dumps(report_to_dict(r, video_id)) + "\n", encoding="utf-8")


def load_report(path: Union[str, os.PathLike]) -> tuple[Optional[str], SnrReport]:
    d = canonical_loads(Path(path).read_text(encoding="utf-8"))
    return d.get("video_id"), report_from_dict(d, str(path))


# ---------------------------------------------------------------------------
# regeneration
# ---------------------------------------------------------------------------

def build_mask_from_source(source: dict, params: EncodingParams, base_dir: Union[str, os.PathLike] = "."):
    """Rebuild the encoder input named by a manifest source reference."""
    kind = source.get("type")
    canvas = (params.width, params.height)
    if kind == "text":
        return render_text_mask(TextSpec(text=source["text"], scale=int(source["scale"]), canvas=canvas))
    if kind == "shape":
        geo = {k: v for k, v in source.items() if k not in ("type", "kind")}
        for key in ("corner", "size", "center"):
            if key in geo:
                geo[key] = tuple(geo[key])
        if "vertices" in geo:
            geo["vertices"] = tuple(tuple(v) for v in geo["vertices"])
        return render_shape_mask(ShapeSpec(kind=source["kind"], canvas=canvas, **geo))
    if kind == "mask_file":
        path = Path(base_dir) / source["path"]
        target = tuple(source["resize"]) if source.get("resize") else None
        return load_mask_image(path, target_size=target)
    if kind == "depth_dir":
        return load_depth_sequence(Path(base_dir) / source["path"])
    raise SchemaViolation("source.type", f"unknown source type {kind!r}")


def regenerate_entry(entry: ManifestEntry, base_dir: Union[str, os.PathLike] = ".") -> FrameSequence:
    """Re-encode a manifest entry from its fields alone."""
    vp = validate_params(entry.params)
    content = build_mask_from_source(entry.source, entry.params, base_dir)
    if entry.source["type"] == "depth_dir":
        th = DepthThresholds(int(entry.source["t_l"]), int(entry.source["t_u"]))
        return encode_depth_animation(content, th, vp)
    return encode_mask_animation(content, vp)


def verify_entry(entry: ManifestEntry, base_dir: Union[str, os.PathLike] = ".") -> bool:
    """True iff the stored container is reproduced byte-for-byte (Y4M) or
    pixel-exactly (PNG sequences) from the manifest fields."""
    seq = regenerate_entry(entry, base_dir)
    container = Path(base_dir) / entry.container
    if container.suffix == ".y4m":
        buf = io.BytesIO()
        write_y4m(seq, buf)
        return buf.getvalue() == container.read_bytes()
    stored = read_png_sequence(container)
    if len(stored.frames) != len(seq.frames) or stored.fps != seq.fps:
        return False
    return all(a == b for a, b in zip(stored.frames, seq.frames))

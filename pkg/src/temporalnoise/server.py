"""HTTP backend for the human study UI.

Serves session descriptors, per-frame PNGs and video metadata, and accepts
response submissions appended to a newline-delimited log. Ground-truth labels
never appear in any payload: the wire schema simply has no label field, and a
test inspects every endpoint for leakage. Submissions are idempotent on
(session_id, video_id), so a double-click or client retry cannot duplicate a
record.
"""

from __future__ import annotations

import io
import json
import re
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional, Union

from PIL import Image

from .encode import FrameSequence
from .store import (Manifest, SchemaViolation, append_response, canonical_dumps,
                    canonical_loads, read_png_sequence, read_responses,
                    read_y4m_file, response_from_dict)

SESSIONS_SCHEMA = "sessions/1"

DEFAULT_PROMPTS = {
    "text": "A word or phrase is hidden in this video's motion. Type exactly the text you can read.",
    "shapes": "A geometric shape is hidden in this video's motion. Name the shape you see.",
    "object_images": "An object is hidden in this video's motion. Name the object you see.",
    "dynamic_scenes": "Something is moving in this video. Describe what you see in a few words.",
}


@dataclass(frozen=True)
class SessionSpec:
    session_id: str
    responder_id: str
    video_ids: tuple[str, ...]
    fps_shown: Optional[int] = None
    shuffle_seed: Optional[int] = None
    replay_allowed: bool = True


def _shuffle(ids: list[str], seed: int) -> list[str]:
    # Fisher-Yates driven by the noise module's documented stream, so a
    # recorded seed reproduces the order on any platform.
    from .noise import stream_output
    out = list(ids)
    for i in range(len(out) - 1, 0, -1):
        j = stream_output(seed, len(out) - 1 - i) % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def load_sessions(path: Union[str, Path], manifest: Manifest) -> dict[str, SessionSpec]:
    data = canonical_loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict) or data.get("schema") != SESSIONS_SCHEMA:
        raise SchemaViolation("schema", f"expected {SESSIONS_SCHEMA}")
    sessions = {}
    for i, s in enumerate(data.get("sessions", [])):
        path_prefix = f"sessions[{i}]"
        for key in ("session_id", "responder_id"):
            if key not in s:
                raise SchemaViolation(f"{path_prefix}.{key}", "missing required field")
        ids = s.get("video_ids", "all")
        if ids == "all":
            ids = [e.video_id for e in manifest.entries]
        else:
            for vid in ids:
                manifest.get(vid)
        seed = s.get("shuffle_seed")
        if seed is not None:
            ids = _shuffle(list(ids), int(seed))
        spec = SessionSpec(
            session_id=str(s["session_id"]),
            responder_id=str(s["responder_id"]),
            video_ids=tuple(ids),
            fps_shown=s.get("fps_shown"),
            shuffle_seed=seed,
            replay_allowed=bool(s.get("replay_allowed", True)),
        )
        if spec.session_id in sessions:
            raise SchemaViolation(f"{path_prefix}.session_id", "duplicate session id")
        sessions[spec.session_id] = spec
    return sessions


class StudyServer:
    """Shared state behind the request handler; safe for the threading server."""

    def __init__(self, manifest: Manifest, sessions: dict[str, SessionSpec],
                 log_path: Union[str, Path], base_dir: Union[str, Path] = ".",
                 ui_root: Optional[Union[str, Path]] = None):
        self.manifest = manifest
        self.sessions = sessions
        self.log_path = Path(log_path)
        self.base_dir = Path(base_dir)
        self.ui_root = Path(ui_root) if ui_root else None
        self._lock = threading.Lock()
        self._videos: dict[str, FrameSequence] = {}
        self._submitted: set[tuple[str, str]] = set()
        if self.log_path.exists():
            for r in read_responses(self.log_path):
                if r.session_id:
                    self._submitted.add((r.session_id, r.video_id))

    def video(self, video_id: str) -> FrameSequence:
        with self._lock:
            if video_id not in self._videos:
                entry = self.manifest.get(video_id)
                container = self.base_dir / entry.container
                if container.suffix == ".y4m":
                    self._videos[video_id] = read_y4m_file(container)
                else:
                    self._videos[video_id] = read_png_sequence(container)
            return self._videos[video_id]

    def session_descriptor(self, session_id: str) -> dict:
        spec = self.sessions[session_id]
        videos = []
        for vid in spec.video_ids:
            entry = self.manifest.get(vid)
            seq_fps = entry.params.fps
            prompt = None
            if entry.prompts:
                prompt = entry.prompts.get("direct")
            videos.append({
                "video_id": vid,
                "category": entry.category,
                "width": entry.params.width,
                "height": entry.params.height,
                "native_fps": seq_fps,
                "fps_shown": spec.fps_shown or seq_fps,
                "frame_count": int(round(entry.params.fps * entry.params.duration_s)),
                "prompt": prompt or DEFAULT_PROMPTS[entry.category],
            })
        with self._lock:
            completed = sorted(v for (s, v) in self._submitted if s == session_id)
        return {
            "schema": "session/1",
            "session_id": session_id,
            "responder_id": spec.responder_id,
            "replay_allowed": spec.replay_allowed,
            "videos": videos,
            "completed": completed,
            "complete": len(completed) >= len(spec.video_ids),
        }

    def submit(self, payload: dict) -> dict:
        record = response_from_dict(payload, "<submission>")
        if record.session_id is None:
            raise SchemaViolation("<submission>.session_id", "missing required field")
        if record.session_id not in self.sessions:
            raise SchemaViolation("<submission>.session_id", "unknown session")
        spec = self.sessions[record.session_id]
        if record.video_id not in spec.video_ids:
            raise SchemaViolation("<submission>.video_id", "video not in this session")
        if not record.response_text.strip():
            raise SchemaViolation("<submission>.response_text", "identification must be non-empty")
        if record.perceptibility is None:
            raise SchemaViolation("<submission>.perceptibility", "rating is required")
        key = (record.session_id, record.video_id)
        with self._lock:
            if key in self._submitted:
                return {"status": "duplicate", "video_id": record.video_id}
            append_response(self.log_path, record)
            self._submitted.add(key)
        return {"status": "ok", "video_id": record.video_id}


class _Handler(BaseHTTPRequestHandler):
    server_version = "temporalnoise-study/1"
    study: StudyServer  # injected by make_server

    def log_message(self, fmt, *args):
        pass

    def _send(self, code: int, body: bytes, content_type: str):
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, code: int, obj: dict):
        self._send(code, (canonical_dumps(obj) + "\n").encode("utf-8"), "application/json")

    def do_GET(self):
        try:
            m = re.fullmatch(r"/session/([^/]+)", self.path)
            if m:
                sid = m.group(1)
                if sid not in self.study.sessions:
                    return self._send_json(404, {"error": "unknown session"})
                return self._send_json(200, self.study.session_descriptor(sid))

            m = re.fullmatch(r"/video/([^/]+)/meta", self.path)
            if m:
                seq = self.study.video(m.group(1))
                return self._send_json(200, {
                    "schema": "video_meta/1",
                    "video_id": m.group(1),
                    "frame_count": len(seq.frames),
                    "fps": seq.fps,
                    "width": seq.width,
                    "height": seq.height,
                })

            m = re.fullmatch(r"/video/([^/]+)/frame/(\d+)", self.path)
            if m:
                seq = self.study.video(m.group(1))
                n = int(m.group(2))
                if n >= len(seq.frames):
                    return self._send_json(404, {"error": "frame out of range"})
                buf = io.BytesIO()
                Image.fromarray(seq.frames[n].pixels, mode="L").save(buf, format="PNG")
                return self._send(200, buf.getvalue(), "image/png")

            if self.study.ui_root is not None:
                return self._serve_static()
            return self._send_json(404, {"error": "not found"})
        except KeyError:
            return self._send_json(404, {"error": "unknown video"})
        except Exception as e:  # pragma: no cover - defensive
            return self._send_json(500, {"error": str(e)})

    def _serve_static(self):
        rel = self.path.split("?", 1)[0].lstrip("/") or "index.html"
        target = (self.study.ui_root / rel).resolve()
        if not target.is_relative_to(self.study.ui_root.resolve()) or not target.is_file():
            return self._send_json(404, {"error": "not found"})
        types = {".html": "text/html", ".js": "text/javascript", ".css": "text/css",
                 ".png": "image/png", ".map": "application/json"}
        ctype = types.get(target.suffix, "application/octet-stream")
        return self._send(200, target.read_bytes(), ctype)

    def do_POST(self):
        if self.path != "/responses":
            return self._send_json(404, {"error": "not found"})
        try:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length)
            payload = json.loads(raw.decode("utf-8"))
            if "timestamp" not in payload:
                payload["timestamp"] = int(time.time())
            result = self.study.submit(payload)
            return self._send_json(200, result)
        except SchemaViolation as e:
            return self._send_json(400, {"error": str(e), "field": e.field_path})
        except (json.JSONDecodeError, UnicodeDecodeError):
            return self._send_json(400, {"error": "body is not valid JSON"})


def make_server(study: StudyServer, host: str = "127.0.0.1", port: int = 8008) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"study": study})
    return ThreadingHTTPServer((host, port), handler)

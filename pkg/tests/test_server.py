"""Study-server tests: wire anonymity, idempotent submission, frame serving."""

import io
import json
import threading
import urllib.error
import urllib.request

import numpy as np
import pytest
from PIL import Image

from temporalnoise import store
from temporalnoise.cli import main
from temporalnoise.server import StudyServer, load_sessions, make_server
from temporalnoise.store import read_responses

LABEL_WORDS = ["gold", "rain", "circle"]


@pytest.fixture()
def study(tmp_path):
    spec = {
        "schema": "genspec/1",
        "defaults": {"width": 64, "height": 64, "fps": 10, "duration_s": 0.4, "block_size": 1},
        "entries": [
            {"category": "text", "labels": ["gold"],
             "source": {"type": "text", "text": "GOLD", "scale": 1}, "params": {"seed": 1}},
            {"category": "text", "labels": ["rain"],
             "source": {"type": "text", "text": "RAIN", "scale": 1}, "params": {"seed": 2}},
            {"category": "shapes", "labels": ["circle"],
             "source": {"type": "shape", "kind": "circle", "center": [32, 32], "radius": 12},
             "params": {"seed": 3}},
        ],
    }
    sp = tmp_path / "spec.json"
    sp.write_text(store.canonical_dumps(spec))
    assert main(["gen", "batch", str(sp), "--out", str(tmp_path / "d")]) == 0
    manifest = store.load_manifest(tmp_path / "d" / "manifest.json")

    sessions_file = tmp_path / "sessions.json"
    sessions_file.write_text(store.canonical_dumps({
        "schema": "sessions/1",
        "sessions": [{"session_id": "s1", "responder_id": "alice",
                      "video_ids": "all", "shuffle_seed": 42, "fps_shown": 10}],
    }))
    log = tmp_path / "responses.ndjson"
    sessions = load_sessions(sessions_file, manifest)
    server = StudyServer(manifest, sessions, log, base_dir=tmp_path / "d")
    httpd = make_server(server, port=0)
    port = httpd.server_address[1]
    t = threading.Thread(target=httpd.serve_forever, daemon=True)
    t.start()
    yield {"port": port, "log": log, "manifest": manifest}
    httpd.shutdown()


def _get(port, path):
    try:
        with urllib.request.urlopen(f"http://127.0.0.1:{port}{path}") as r:
            return r.status, r.read()
    except urllib.error.HTTPError as e:
        return e.code, e.read()


def _post(port, path, payload):
    req = urllib.request.Request(
        f"http://127.0.0.1:{port}{path}",
        data=json.dumps(payload).encode(),
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    try:
        with urllib.request.urlopen(req) as r:
            return r.status, json.loads(r.read())
    except urllib.error.HTTPError as e:
        return e.code, json.loads(e.read())


def test_session_descriptor_is_label_free(study):
    status, body = _get(study["port"], "/session/s1")
    assert status == 200
    desc = json.loads(body)
    assert len(desc["videos"]) == 3
    assert desc["completed"] == []
    text = body.decode().lower()
    for word in LABEL_WORDS:
        assert word not in text
    for v in desc["videos"]:
        assert "label" not in {k.lower() for k in v}
        assert v["fps_shown"] == 10
        assert v["prompt"]


def test_meta_and_frames_label_free_and_correct(study):
    port = study["port"]
    _, body = _get(port, "/session/s1")
    desc = json.loads(body)
    vid = desc["videos"][0]["video_id"]
    status, meta_body = _get(port, f"/video/{vid}/meta")
    assert status == 200
    meta = json.loads(meta_body)
    assert (meta["width"], meta["height"], meta["fps"]) == (64, 64, 10)
    for word in LABEL_WORDS:
        assert word not in meta_body.decode().lower()

    status, png = _get(port, f"/video/{vid}/frame/0")
    assert status == 200
    img = np.asarray(Image.open(io.BytesIO(png)).convert("L"))
    entry = study["manifest"].get(vid)
    seq = store.read_y4m_file((study["log"].parent / "d" / entry.container))
    assert np.array_equal(img, seq.frames[0].pixels)

    status, _ = _get(port, f"/video/{vid}/frame/9999")
    assert status == 404


def test_unknown_session_404(study):
    status, _ = _get(study["port"], "/session/nope")
    assert status == 404


def test_submit_appends_one_line(study):
    port = study["port"]
    _, body = _get(port, "/session/s1")
    vid = json.loads(body)["videos"][0]["video_id"]
    status, out = _post(port, "/responses", {
        "schema": "response/1", "session_id": "s1", "video_id": vid,
        "responder_id": "alice", "response_text": "gold", "perceptibility": 4,
        "fps_shown": 10, "timestamp": 1,
    })
    assert status == 200 and out["status"] == "ok"
    records = read_responses(study["log"])
    assert len(records) == 1
    assert records[0].video_id == vid


def test_submit_idempotent(study):
    port = study["port"]
    _, body = _get(port, "/session/s1")
    vid = json.loads(body)["videos"][1]["video_id"]
    payload = {"schema": "response/1", "session_id": "s1", "video_id": vid,
               "responder_id": "alice", "response_text": "rain",
               "perceptibility": 5, "timestamp": 2}
    s1, o1 = _post(port, "/responses", payload)
    s2, o2 = _post(port, "/responses", payload)
    assert (s1, o1["status"]) == (200, "ok")
    assert (s2, o2["status"]) == (200, "duplicate")
    assert len(read_responses(study["log"])) == 1


def test_submit_invalid_rating_rejected_log_untouched(study):
    port = study["port"]
    _, body = _get(port, "/session/s1")
    vid = json.loads(body)["videos"][0]["video_id"]
    status, out = _post(port, "/responses", {
        "schema": "response/1", "session_id": "s1", "video_id": vid,
        "responder_id": "alice", "response_text": "gold", "perceptibility": 6,
        "timestamp": 3,
    })
    assert status == 400
    assert "perceptibility" in out["field"]
    assert not study["log"].exists() or len(read_responses(study["log"])) == 0


def test_submit_empty_identification_rejected(study):
    port = study["port"]
    _, body = _get(port, "/session/s1")
    vid = json.loads(body)["videos"][0]["video_id"]
    status, out = _post(port, "/responses", {
        "schema": "response/1", "session_id": "s1", "video_id": vid,
        "responder_id": "alice", "response_text": "   ", "perceptibility": 3,
        "timestamp": 4,
    })
    assert status == 400
    assert "response_text" in out["field"]


def test_session_completeness(study):
    port = study["port"]
    _, body = _get(port, "/session/s1")
    desc = json.loads(body)
    for i, v in enumerate(desc["videos"]):
        _post(port, "/responses", {
            "schema": "response/1", "session_id": "s1", "video_id": v["video_id"],
            "responder_id": "alice", "response_text": "x", "perceptibility": 3,
            "timestamp": 10 + i,
        })
    _, body = _get(port, "/session/s1")
    desc = json.loads(body)
    assert desc["complete"] is True
    assert sorted(desc["completed"]) == sorted(v["video_id"] for v in desc["videos"])


def test_shuffle_is_seeded_and_stable(study, tmp_path):
    port = study["port"]
    _, b1 = _get(port, "/session/s1")
    _, b2 = _get(port, "/session/s1")
    order1 = [v["video_id"] for v in json.loads(b1)["videos"]]
    order2 = [v["video_id"] for v in json.loads(b2)["videos"]]
    assert order1 == order2

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from temporalnoise import store
from temporalnoise.cli import main
from temporalnoise.encode import FrameSequence
from temporalnoise.noise import generate_noise
from temporalnoise.types import FrameBuffer

SMALL = ["--size", "96x96", "--fps", "10", "--duration", "0.8", "--block", "1"]


def test_gen_text_writes_video_and_manifest(tmp_path):
    rc = main(["gen", "text", "GOLD", "--scale", "2", "--seed", "7",
               "--out", str(tmp_path)] + SMALL)
    assert rc == 0
    m = store.load_manifest(tmp_path / "manifest.json")
    assert len(m) == 1
    e = m.entries[0]
    assert e.labels == ("gold",)
    assert e.category == "text"
    assert (tmp_path / e.container).exists()
    seq = store.read_y4m_file(tmp_path / e.container)
    assert len(seq.frames) == 8
    # the id must not echo the answer
    assert "gold" not in e.video_id.lower()


def test_gen_degenerate_shape_exit_2(tmp_path):
    rc = main(["gen", "shape", "circle", "--center", "48,48", "--radius", "0",
               "--out", str(tmp_path)] + SMALL)
    assert rc == 2


def test_gen_reproducible_bytes(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for out in (a, b):
        rc = main(["gen", "text", "HI", "--scale", "4", "--seed", "3",
                   "--out", str(out)] + SMALL)
        assert rc == 0
    fa = next(a.glob("*.y4m"))
    fb = next(b.glob("*.y4m"))
    assert fa.read_bytes() == fb.read_bytes()


def _batch_spec(tmp_path, n_text=10, n_shape=5):
    entries = []
    for i in range(n_text):
        entries.append({
            "category": "text", "labels": [f"w{i}"],
            "source": {"type": "text", "text": f"W{i}", "scale": 3},
            "params": {"seed": 100 + i},
        })
    for i in range(n_shape):
        entries.append({
            "category": "shapes", "labels": ["circle"],
            "source": {"type": "shape", "kind": "circle", "center": [48, 48], "radius": 20 + i},
            "params": {"seed": 200 + i},
        })
    spec = {
        "schema": "genspec/1",
        "defaults": {"width": 96, "height": 96, "fps": 10, "duration_s": 0.5, "block_size": 1},
        "entries": entries,
    }
    p = tmp_path / "spec.json"
    p.write_text(store.canonical_dumps(spec))
    return p


def test_gen_batch_manifest_unique_ids(tmp_path):
    spec = _batch_spec(tmp_path)
    rc = main(["gen", "batch", str(spec), "--out", str(tmp_path / "data")])
    assert rc == 0
    m = store.load_manifest(tmp_path / "data" / "manifest.json")
    assert len(m) == 15
    assert len({e.video_id for e in m.entries}) == 15
    cats = [e.category for e in m.entries]
    assert cats.count("text") == 10 and cats.count("shapes") == 5


def _gen_text_video(tmp_path, word="HI", seed=5):
    rc = main(["gen", "text", word, "--scale", "4", "--seed", str(seed),
               "--out", str(tmp_path)] + SMALL)
    assert rc == 0
    m = store.load_manifest(tmp_path / "manifest.json")
    return tmp_path / m.entries[0].container


def test_analyze_single_video_finite(tmp_path, capsys):
    video = _gen_text_video(tmp_path)
    rc = main(["analyze", str(video), "--mask-source", "estimated"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "basic_db=" in out and "n/a" not in out.split("verdict")[0]
    report_path = Path(str(video.with_suffix("")) + ".snr.json")
    vid, rep = store.load_report(report_path)
    import math
    assert math.isfinite(rep.basic_db)


def test_analyze_static_video_contentless(tmp_path, capsys):
    pat = generate_noise(96, 96, 1, 0.5, 3).pixels
    seq = FrameSequence(frames=tuple(FrameBuffer(pixels=pat) for _ in range(4)), fps=10)
    store.write_y4m_file(seq, tmp_path / "static.y4m")
    rc = main(["analyze", str(tmp_path / "static.y4m"), "--mask-source", "estimated"])
    assert rc == 0
    assert "contentless" in capsys.readouterr().out


def test_analyze_manifest_aggregate_table(tmp_path, capsys):
    spec = _batch_spec(tmp_path, n_text=2, n_shape=2)
    assert main(["gen", "batch", str(spec), "--out", str(tmp_path / "d")]) == 0
    rc = main(["analyze", "--manifest", str(tmp_path / "d" / "manifest.json")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "Category" in out and "Basic SNR" in out
    assert "text" in out and "shapes" in out
    reports = list((tmp_path / "d" / "reports").glob("*.json"))
    assert len(reports) == 4


def test_decode_circle_iou(tmp_path, capsys):
    rc = main(["gen", "shape", "circle", "--center", "96,96", "--radius", "40",
               "--size", "192x192", "--fps", "10", "--duration", "1.6",
               "--block", "1", "--seed", "4", "--out", str(tmp_path)])
    assert rc == 0
    m = store.load_manifest(tmp_path / "manifest.json")
    video = tmp_path / m.entries[0].container
    gt = tmp_path / "gt.png"
    from temporalnoise.masks import render_shape_mask, ShapeSpec
    mask = render_shape_mask(ShapeSpec(kind="circle", canvas=(192, 192), center=(96, 96), radius=40))
    store.save_mask_png(mask.bits, gt)
    rc = main(["decode", str(video), "--gt-mask", str(gt), "--out", str(tmp_path / "dec")])
    assert rc == 0
    out = capsys.readouterr().out
    iou = float([l for l in out.splitlines() if l.startswith("IoU")][0].split()[1])
    assert iou >= 0.8
    for name in ("boundary.png", "coherence.png", "estimated_mask.png",
                 "overlay_mask.png", "overlay_boundary.png", "decode.json"):
        assert (tmp_path / "dec" / name).exists()


def test_decode_static_contentless(tmp_path, capsys):
    pat = generate_noise(96, 96, 1, 0.5, 3).pixels
    seq = FrameSequence(frames=tuple(FrameBuffer(pixels=pat) for _ in range(4)), fps=10)
    store.write_y4m_file(seq, tmp_path / "static.y4m")
    rc = main(["decode", str(tmp_path / "static.y4m"), "--out", str(tmp_path / "dec")])
    assert rc == 0
    assert "contentless" in capsys.readouterr().out


def test_decode_missing_file_exit_3(tmp_path):
    rc = main(["decode", str(tmp_path / "nope.y4m")])
    assert rc == 3


def _manifest_and_log(tmp_path):
    spec = {
        "schema": "genspec/1",
        "defaults": {"width": 96, "height": 96, "fps": 10, "duration_s": 0.5, "block_size": 1},
        "entries": [
            {"category": "text", "labels": ["gold"], "video_id": "t1",
             "source": {"type": "text", "text": "GOLD", "scale": 2}, "params": {"seed": 1}},
            {"category": "text", "labels": ["rain"], "video_id": "t2",
             "source": {"type": "text", "text": "RAIN", "scale": 2}, "params": {"seed": 2}},
            {"category": "text", "labels": ["mind"], "video_id": "t3",
             "source": {"type": "text", "text": "MIND", "scale": 2}, "params": {"seed": 3}},
            {"category": "shapes", "labels": ["circle"], "video_id": "s1",
             "source": {"type": "shape", "kind": "circle", "center": [48, 48], "radius": 20},
             "params": {"seed": 4}},
            {"category": "shapes", "labels": ["triangle"], "video_id": "s2",
             "source": {"type": "shape", "kind": "polygon",
                        "vertices": [[20, 20], [76, 20], [48, 70]]},
             "params": {"seed": 5}},
        ],
    }
    sp = tmp_path / "spec.json"
    sp.write_text(store.canonical_dumps(spec))
    assert main(["gen", "batch", str(sp), "--out", str(tmp_path / "d")]) == 0
    manifest = tmp_path / "d" / "manifest.json"

    from temporalnoise.evaluate import ResponseRecord
    log = tmp_path / "responses.ndjson"
    answers = [("t1", "GOLD"), ("t2", "rain "), ("t3", "wave"),
               ("s1", "the circle"), ("s2", "square")]
    for vid, text in answers:
        store.append_response(log, ResponseRecord(vid, "r1", text, perceptibility=4))
    return manifest, log


def test_evaluate_hand_counts(tmp_path, capsys):
    manifest, log = _manifest_and_log(tmp_path)
    rc = main(["evaluate", "--manifest", str(manifest), "--responses", str(log)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "overall: 3/5 = 0.6000" in out
    assert "text: 2/3" in out
    assert "shapes: 1/2" in out


def test_evaluate_threshold_analysis(tmp_path, capsys):
    manifest, log = _manifest_and_log(tmp_path)
    m = store.load_manifest(manifest)
    # synthetic per-video reports: t1/t2 above 2.5 dB, the rest below
    reports = tmp_path / "reports"
    reports.mkdir()
    from temporalnoise.metrics import SnrReport
    snrs = {"t1": 3.1, "t2": 3.4, "t3": 0.5, "s1": 3.8, "s2": 1.2}
    for vid, snr in snrs.items():
        rep = SnrReport(basic_db=snr, perceptual_db=snr, temporal_coherence_db=None,
                        motion_contrast_db=snr, combined_db=snr, contentless=False)
        store.save_report(rep, reports / f"{vid}.json", vid)
    rc = main(["evaluate", "--manifest", str(manifest), "--responses", str(log),
               "--threshold-analysis", "--snr-from", str(reports), "--bin-width", "1.0"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "step at" in out
    assert "binary threshold: yes" in out


def test_evaluate_per_fps_table(tmp_path, capsys):
    manifest, log = _manifest_and_log(tmp_path)
    from temporalnoise.evaluate import ResponseRecord
    log2 = tmp_path / "fps.ndjson"
    for fps in (1, 10, 30):
        store.append_response(log2, ResponseRecord("t1", "r1", "gold" if fps >= 10 else "x",
                                                   fps_shown=fps))
        store.append_response(log2, ResponseRecord("s1", "r1", "circle" if fps >= 10 else "x",
                                                   fps_shown=fps))
    rc = main(["evaluate", "--manifest", str(manifest), "--responses", str(log2), "--per-fps"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "30 FPS" in out and "Average" in out


def test_evaluate_schema_violation_exit_2(tmp_path):
    manifest, _log = _manifest_and_log(tmp_path)
    bad = tmp_path / "bad.ndjson"
    bad.write_text('{"schema":"response/1","video_id":"t1"}\n')
    rc = main(["evaluate", "--manifest", str(manifest), "--responses", str(bad)])
    assert rc == 2


def test_console_entry_smoke(tmp_path):
    r = subprocess.run([sys.executable, "-m", "temporalnoise.cli", "gen", "text", "OK",
                        "--scale", "2", "--seed", "1", "--out", str(tmp_path),
                        "--size", "64x64", "--fps", "10", "--duration", "0.4",
                        "--block", "1"],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "manifest.json").exists()


def test_regenerability_of_generated_batch(tmp_path):
    spec = _batch_spec(tmp_path, n_text=2, n_shape=1)
    assert main(["gen", "batch", str(spec), "--out", str(tmp_path / "d")]) == 0
    m = store.load_manifest(tmp_path / "d" / "manifest.json")
    for e in m.entries:
        assert store.verify_entry(e, tmp_path / "d")

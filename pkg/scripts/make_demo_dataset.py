#!/usr/bin/env python3
"""Build a small demo dataset covering all four content categories, plus a
session file, so the study server can be started right away:

    python3 scripts/make_demo_dataset.py --out demo
    temporalnoise serve --manifest demo/manifest.json \
        --sessions demo/sessions.json --log demo/responses.ndjson --port 8008
"""

import argparse
import sys
from pathlib import Path

import numpy as np
from PIL import Image

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from temporalnoise import store  # noqa: E402
from temporalnoise.cli import main as cli_main  # noqa: E402


def write_depth_clip(directory: Path, frames: int = 8, side: int = 256) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    ys, xs = np.mgrid[0:side, 0:side]
    for t in range(frames):
        d = np.zeros((side, side), np.uint8)
        cx = 60 + 18 * t
        d[(xs - cx) ** 2 + (ys - side // 2) ** 2 <= 48 ** 2] = 200
        Image.fromarray(d, mode="L").save(directory / f"{t:04d}.png")


def write_blob_mask(path: Path, side: int = 256) -> None:
    ys, xs = np.mgrid[0:side, 0:side]
    bits = (xs - 128) ** 2 + (ys - 120) ** 2 <= 60 ** 2
    bits |= (np.abs(ys - 170) <= 9) & (xs > 70) & (xs < 190)
    Image.fromarray(np.where(bits, 255, 0).astype(np.uint8), mode="L").save(path)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="demo")
    ap.add_argument("--size", default="256x256", help="keep it small for quick serving")
    ap.add_argument("--fps", type=int, default=20)
    ap.add_argument("--duration", type=float, default=2.0)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_depth_clip(out / "depth_clip")
    write_blob_mask(out / "blob.png")

    w, h = (int(v) for v in args.size.split("x"))
    spec = {
        "schema": "genspec/1",
        "defaults": {"width": w, "height": h, "fps": args.fps,
                     "duration_s": args.duration, "block_size": 2},
        "entries": [
            {"category": "text", "labels": ["gold"],
             "source": {"type": "text", "text": "GOLD", "scale": 4}, "params": {"seed": 11}},
            {"category": "text", "labels": ["rain"],
             "source": {"type": "text", "text": "RAIN", "scale": 4}, "params": {"seed": 12}},
            {"category": "shapes", "labels": ["circle"],
             "source": {"type": "shape", "kind": "circle",
                        "center": [w // 2, h // 2], "radius": h // 4},
             "params": {"seed": 13}},
            {"category": "shapes", "labels": ["triangle"],
             "source": {"type": "shape", "kind": "polygon",
                        "vertices": [[w // 2, 40], [w - 50, h - 50], [50, h - 50]]},
             "params": {"seed": 14}},
            {"category": "object_images", "labels": ["blob", "shape"],
             "source": {"type": "mask_file", "path": "blob.png", "resize": [w, h]},
             "params": {"seed": 15}},
            {"category": "dynamic_scenes", "labels": ["moving circle", "circle", "ball"],
             "source": {"type": "depth_dir", "path": "depth_clip", "t_l": 128, "t_u": 255},
             "params": {"seed": 16}},
        ],
    }
    spec_path = out / "genspec.json"
    spec_path.write_text(store.canonical_dumps(spec) + "\n", encoding="utf-8")
    rc = cli_main(["gen", "batch", str(spec_path), "--out", str(out)])
    if rc != 0:
        return rc

    (out / "sessions.json").write_text(store.canonical_dumps({
        "schema": "sessions/1",
        "sessions": [
            {"session_id": "demo", "responder_id": "guest", "video_ids": "all",
             "shuffle_seed": 1, "replay_allowed": True},
        ],
    }) + "\n", encoding="utf-8")
    print(f"demo dataset in {out}/ ({len(spec['entries'])} videos)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

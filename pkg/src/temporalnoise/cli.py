"""Command-line entry point: gen / analyze / decode / evaluate / serve.

Exit codes: 0 success, 2 validation or schema problems (message names the
offending field), 3 I/O problems. Every generation command is reproducible:
the same flags and seed produce identical bytes. The default output directory
can be overridden with the TEMPORALNOISE_OUT environment variable.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import decode as decode_mod
from . import store
from .encode import DepthThresholds, encode_depth_animation, encode_mask_animation
from .evaluate import (labels_from_entries, format_annotator_table, format_fps_table,
                       format_threshold_report, normalize_response, perceptibility_summary,
                       score, snr_threshold_analysis, NoRatings)
from .flow import FlowOptions, flow_sequence
from .masks import ShapeSpec, TextSpec, load_mask_image, render_shape_mask, render_text_mask
from .metrics import (MetricConfig, analyze_video, format_category_table,
                      summarize_by_category, MASK_ESTIMATED, MASK_GROUND_TRUTH)
from .server import StudyServer, load_sessions, make_server, DEFAULT_PROMPTS
from .types import EncodingParams, InvalidParams, validate_params

EXIT_VALIDATION = 2
EXIT_IO = 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _default_out() -> str:
    return os.environ.get("TEMPORALNOISE_OUT", ".")


def _pair(text: str, what: str, cast=float):
    parts = text.split(",")
    if len(parts) != 2:
        raise CliError(f"{what}: expected two comma-separated values, got {text!r}", EXIT_VALIDATION)
    return cast(parts[0]), cast(parts[1])


def _size(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise CliError(f"--size: expected WxH, got {text!r}", EXIT_VALIDATION)
    return int(parts[0]), int(parts[1])


def _add_param_flags(p: argparse.ArgumentParser):
    p.add_argument("--size", default="960x540", help="canvas WxH (default 960x540)")
    p.add_argument("--fps", type=int, default=30)
    p.add_argument("--duration", type=float, default=4.0, help="seconds")
    p.add_argument("--velocity", default="0,3", help="vx,vy pixels/frame")
    p.add_argument("--block", type=int, default=2, help="speckle block size (1-3)")
    p.add_argument("--density", type=float, default=0.5, help="white-block probability")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory (default $TEMPORALNOISE_OUT or .)")
    p.add_argument("--format", choices=("y4m", "png"), default="y4m")


def _params_from_args(args) -> EncodingParams:
    w, h = _size(args.size)
    vx, vy = _pair(args.velocity, "--velocity")
    return EncodingParams(width=w, height=h, fps=args.fps, duration_s=args.duration,
                          velocity=(vx, vy), block_size=args.block,
                          density=args.density, seed=args.seed)


def _opaque_id(category: str, source: dict, params: EncodingParams) -> str:
    """Deterministic id that never echoes the content (ids travel to study
    participants, so a readable slug would leak the answer)."""
    from .noise import mix64
    text = store.canonical_dumps({"source": source, "params": store.params_to_dict(params)})
    h = 0
    for b in text.encode("utf-8"):
        h = mix64(h ^ b)
    return f"{category}_{h & 0xFFFFFFFFFF:010x}"


def _gen_one(out_dir: Path, fmt: str, category: str, labels: list[str],
             source: dict, params: EncodingParams, video_id: str | None = None,
             prompts: dict | None = None) -> store.ManifestEntry:
    vp = validate_params(params)
    content = store.build_mask_from_source(source, params, out_dir)
    if source["type"] == "depth_dir":
        th = DepthThresholds(int(source["t_l"]), int(source["t_u"]))
        seq = encode_depth_animation(content, th, vp)
    else:
        seq = encode_mask_animation(content, vp)

    if video_id is None:
        video_id = _opaque_id(category, source, params)
    container = f"{video_id}.y4m" if fmt == "y4m" else video_id
    if fmt == "y4m":
        store.write_y4m_file(seq, out_dir / container)
    else:
        store.write_png_sequence(seq, out_dir / container)
    return store.ManifestEntry(
        video_id=video_id, category=category, labels=tuple(labels),
        params=params, source=source, container=container,
        prompts=prompts or {"direct": DEFAULT_PROMPTS[category]},
    )


def _merge_manifest(out_dir: Path, new_entries: list[store.ManifestEntry]):
    path = out_dir / "manifest.json"
    entries = []
    if path.exists():
        entries = list(store.load_manifest(path).entries)
    entries.extend(new_entries)
    store.save_manifest(store.Manifest(entries=tuple(entries)), path)


def _cmd_gen(args) -> int:
    out_dir = Path(args.out or _default_out())
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.kind == "batch":
        return _cmd_gen_batch(args, out_dir)

    params = _params_from_args(args)
    if args.kind == "text":
        source = {"type": "text", "text": args.text, "scale": args.scale}
        category = "text"
        labels = args.labels or [normalize_response(args.text)]
    elif args.kind == "shape":
        source = {"type": "shape", "kind": args.shape}
        if args.shape == "rectangle":
            if not (args.corner and args.rect_size):
                raise CliError("rectangle needs --corner and --rect-size", EXIT_VALIDATION)
            source["corner"] = list(_pair(args.corner, "--corner", int))
            source["size"] = list(_pair(args.rect_size, "--rect-size", int))
        elif args.shape == "circle":
            if not (args.center and args.radius is not None):
                raise CliError("circle needs --center and --radius", EXIT_VALIDATION)
            source["center"] = list(_pair(args.center, "--center", int))
            source["radius"] = args.radius
        else:
            if not args.vertices:
                raise CliError("polygon needs --vertices", EXIT_VALIDATION)
            source["vertices"] = [list(_pair(v, "--vertices", int)) for v in args.vertices.split()]
        category = "shapes"
        labels = args.labels or [args.shape]
    elif args.kind == "mask":
        source = {"type": "mask_file", "path": args.file}
        w, h = _size(args.size)
        source["resize"] = [w, h]
        category = "object_images"
        if not args.labels:
            raise CliError("gen mask requires --labels", EXIT_VALIDATION)
        labels = args.labels
    else:  # depth
        t_l, t_u = _pair(args.thresholds, "--thresholds", int)
        source = {"type": "depth_dir", "path": args.dir, "t_l": t_l, "t_u": t_u}
        category = "dynamic_scenes"
        if not args.labels:
            raise CliError("gen depth requires --labels", EXIT_VALIDATION)
        labels = args.labels

    entry = _gen_one(out_dir, args.format, category, labels, source, params)
    _merge_manifest(out_dir, [entry])
    print(f"wrote {entry.container} ({entry.video_id})")
    return 0


def _cmd_gen_batch(args, out_dir: Path) -> int:
    spec = store.canonical_loads(Path(args.spec).read_text(encoding="utf-8"))
    if spec.get("schema") != "genspec/1":
        raise CliError("spec.schema: expected genspec/1", EXIT_VALIDATION)
    defaults = spec.get("defaults", {})
    jobs = []
    for i, e in enumerate(spec.get("entries", [])):
        merged = dict(defaults)
        merged.update(e.get("params", {}))
        base = store.params_to_dict(EncodingParams())
        base.update(merged)
        params = store.params_from_dict(base, f"entries[{i}].params")
        source = e.get("source")
        if not source:
            raise CliError(f"entries[{i}].source: missing", EXIT_VALIDATION)
        category = e.get("category")
        labels = e.get("labels")
        if not category or not labels:
            raise CliError(f"entries[{i}]: category and labels are required", EXIT_VALIDATION)
        jobs.append((category, labels, source, params, e.get("video_id"), e.get("prompts")))

    entries = []
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_gen_one, out_dir, args.format, *job) for job in jobs]
            entries = [f.result() for f in futures]
    else:
        entries = [_gen_one(out_dir, args.format, *job) for job in jobs]
    _merge_manifest(out_dir, entries)
    print(f"wrote {len(entries)} videos to {out_dir}")
    return 0


def _read_video(path: Path):
    if path.suffix == ".y4m":
        return store.read_y4m_file(path)
    if path.is_dir():
        return store.read_png_sequence(path)
    raise CliError(f"{path}: not a .y4m file or PNG sequence directory", EXIT_IO)


def _gt_mask_for_entry(entry: store.ManifestEntry, base_dir: Path):
    """Ground-truth mask for metrics: the encoder input; for depth videos, the
    threshold band of the temporally-middle depth map."""
    content = store.build_mask_from_source(entry.source, entry.params, base_dir)
    if entry.source["type"] != "depth_dir":
        return content
    from .encode import resample_depth_indices
    vp = validate_params(entry.params)
    idx = resample_depth_indices(len(content), vp.frame_count)[vp.frame_count // 2]
    d = content.frames[idx]
    band = (d >= int(entry.source["t_l"])) & (d <= int(entry.source["t_u"]))
    from .types import ContentMask
    return ContentMask(bits=band)


def _analyze_entry(manifest_dir: str, entry_dict: dict, cfg_kw: dict, flow_kw: dict,
                   out_dir: str | None):
    """Worker for parallel analysis; takes plain dicts so it pickles cleanly."""
    base = Path(manifest_dir)
    entry = store._entry_from_dict(entry_dict, entry_dict.get("video_id", "<entry>"))
    seq = _read_video(base / entry.container)
    cfg = MetricConfig(**cfg_kw)
    mask = None
    if cfg.mask_source == MASK_GROUND_TRUTH:
        mask = _gt_mask_for_entry(entry, base)
    report = analyze_video(seq, mask=mask, cfg=cfg, flow_opts=FlowOptions(**flow_kw))
    if out_dir:
        store.save_report(report, Path(out_dir) / f"{entry.video_id}.json", entry.video_id)
    return entry.video_id, entry.category, report


def _cmd_analyze(args) -> int:
    cfg_kw = dict(tau=args.tau, mask_source=MASK_GROUND_TRUTH if args.mask_source == "gt"
                  else MASK_ESTIMATED)
    flow_kw = dict(levels=args.flow_levels)

    if args.manifest:
        manifest = store.load_manifest(args.manifest)
        base = Path(args.manifest).parent
        out_dir = args.out or str(base / "reports")
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        work = [(str(base), e.to_dict(), cfg_kw, flow_kw, out_dir) for e in manifest.entries]
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                rows = list(pool.map(_analyze_entry_star, work))
        else:
            rows = [_analyze_entry(*w) for w in work]
        summary = summarize_by_category([(cat, rep) for _vid, cat, rep in rows])
        print(format_category_table(summary))
        return 0

    seq = _read_video(Path(args.video))
    mask = None
    cfg = MetricConfig(**cfg_kw)
    if args.gt_mask:
        mask = load_mask_image(args.gt_mask)
    elif cfg.mask_source == MASK_GROUND_TRUTH:
        cfg = MetricConfig(**{**cfg_kw, "mask_source": MASK_ESTIMATED})
    report = analyze_video(seq, mask=mask, cfg=cfg, flow_opts=FlowOptions(**flow_kw))
    out = args.out or (str(Path(args.video).with_suffix("")) + ".snr.json")
    store.save_report(report, out, Path(args.video).stem)

    def fmt(v):
        if v is None:
            return "n/a"
        return f"{v:.2f}" if math.isfinite(v) else str(v)

    print(f"basic_db={fmt(report.basic_db)} perceptual_db={fmt(report.perceptual_db)} "
          f"temporal_coherence_db={fmt(report.temporal_coherence_db)} "
          f"motion_contrast_db={fmt(report.motion_contrast_db)} "
          f"combined_db={fmt(report.combined_db)}")
    if report.contentless:
        print("verdict: contentless")
    return 0


def _analyze_entry_star(w):
    return _analyze_entry(*w)


def _cmd_decode(args) -> int:
    seq = _read_video(Path(args.video))
    out_dir = Path(args.out or _default_out())
    out_dir.mkdir(parents=True, exist_ok=True)

    flows = flow_sequence(seq, FlowOptions(levels=args.flow_levels))
    boundary = decode_mod.motion_boundary_map(flows)
    coherence = decode_mod.coherence_decode_map(flows, MetricConfig(tau=args.tau))
    direction = decode_mod.motion_direction_map(flows)

    def map_png(m, path):
        # max-normalized visualization; never feeds the metrics
        from PIL import Image
        peak = m.values.max()
        scaled = (m.values / peak * 255 if peak > 0 else m.values).astype(np.uint8)
        Image.fromarray(scaled, mode="L").save(path)

    map_png(boundary, out_dir / "boundary.png")
    map_png(coherence, out_dir / "coherence.png")

    meta = {
        "schema": "decode/1",
        "percentile": args.percentile,
        "closing_iterations": 2,
        "min_component_frac": 0.25,
        "direction_fill": True,
        "direction_tolerance": 1.0,
        "max_trim": 12,
        "border": FlowOptions(levels=args.flow_levels).border_exclude,
        "tau": args.tau,
    }
    try:
        est = decode_mod.estimate_mask(boundary, coherence, direction,
                                       percentile=args.percentile)
    except decode_mod.NoRegionFound:
        meta["verdict"] = "contentless"
        (out_dir / "decode.json").write_text(store.canonical_dumps(meta) + "\n", encoding="utf-8")
        print("contentless")
        return 0

    store.save_mask_png(est.bits, out_dir / "estimated_mask.png")
    mask_overlay = decode_mod.render_overlay(seq.frames[0], est,
                                             decode_mod.OverlayStyle(color=(255, 0, 0), opacity=0.5))
    store.save_overlay_png(mask_overlay, out_dir / "overlay_mask.png")
    boundary_overlay = decode_mod.render_overlay(seq.frames[0], boundary,
                                                 decode_mod.OverlayStyle(color=(0, 160, 160), opacity=0.8))
    store.save_overlay_png(boundary_overlay, out_dir / "overlay_boundary.png")

    meta["verdict"] = "content"
    if args.gt_mask:
        gt = load_mask_image(args.gt_mask)
        iou = decode_mod.mask_iou(est, gt)
        meta["iou"] = iou
        print(f"IoU {iou:.4f}")
    (out_dir / "decode.json").write_text(store.canonical_dumps(meta) + "\n", encoding="utf-8")
    print(f"wrote decode outputs to {out_dir}")
    return 0


def _cmd_evaluate(args) -> int:
    manifest = store.load_manifest(args.manifest)
    labels = labels_from_entries(manifest.entries)
    responses = store.read_responses(args.responses)
    roster = None
    if args.roster:
        roster = store.canonical_loads(Path(args.roster).read_text(encoding="utf-8"))
        if not isinstance(roster, list):
            raise CliError("--roster: expected a JSON list of video ids", EXIT_VALIDATION)

    report = score(responses, labels, roster=roster)
    print(f"overall: {report.overall.correct}/{report.overall.count} "
          f"= {report.overall.accuracy:.4f}  (mode: {report.mode})")
    for cat, cell in sorted(report.per_category.items()):
        print(f"  {cat}: {cell.correct}/{cell.count} = {cell.accuracy:.4f}")
    print()
    print(format_annotator_table(report))
    try:
        summary = perceptibility_summary(responses, labels)
        print("\nperceptibility (mean +- stdev, n):")
        for cat, (mean, sd, n) in summary.items():
            print(f"  {cat}: {mean:.2f} +- {sd:.2f} (n={n})")
    except NoRatings:
        pass

    if args.per_fps:
        print()
        print(format_fps_table(report))

    if args.threshold_analysis:
        if not args.snr_from:
            raise CliError("--threshold-analysis requires --snr-from", EXIT_VALIDATION)
        snr_by_video = {}
        snr_dir = Path(args.snr_from)
        files = sorted(snr_dir.glob("*.json")) if snr_dir.is_dir() else [snr_dir]
        for f in files:
            vid, rep = store.load_report(f)
            if vid is None:
                continue
            value = getattr(rep, f"{args.snr_metric}_db")
            if value is not None and math.isfinite(value):
                snr_by_video[vid] = value
        by_id = {l.video_id: l for l in labels}
        scored = []
        for r in responses:
            if r.video_id in snr_by_video:
                scored.append((r.video_id, snr_by_video[r.video_id],
                               by_id[r.video_id].accepts(r.response_text)))
        rep = snr_threshold_analysis(scored, bin_width=args.bin_width)
        print()
        print(format_threshold_report(rep))
    return 0


def _cmd_serve(args) -> int:
    manifest = store.load_manifest(args.manifest)
    base_dir = Path(args.manifest).parent
    sessions = load_sessions(args.sessions, manifest)
    study = StudyServer(manifest, sessions, args.log, base_dir=base_dir,
                        ui_root=args.root)
    try:
        httpd = make_server(study, host=args.host, port=args.port)
    except OSError as e:
        raise CliError(f"cannot bind port {args.port}: {e}", EXIT_IO) from e
    bound = httpd.server_address[1]
    print(f"study server on http://{args.host}:{bound} "
          f"({len(sessions)} sessions, {len(manifest)} videos)", flush=True)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="temporalnoise",
                                 description="temporal-noise video toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate encoded videos")
    gsub = gen.add_subparsers(dest="kind", required=True)

    g_text = gsub.add_parser("text", help="encode a word or phrase")
    g_text.add_argument("text")
    g_text.add_argument("--scale", type=int, default=8, help="pixels per glyph cell unit")
    g_text.add_argument("--labels", nargs="+", default=None)
    _add_param_flags(g_text)

    g_shape = gsub.add_parser("shape", help="encode a geometric shape")
    g_shape.add_argument("shape", choices=("rectangle", "circle", "polygon"))
    g_shape.add_argument("--corner", default=None, help="x,y (rectangle)")
    g_shape.add_argument("--rect-size", default=None, help="w,h (rectangle)")
    g_shape.add_argument("--center", default=None, help="x,y (circle)")
    g_shape.add_argument("--radius", type=int, default=None)
    g_shape.add_argument("--vertices", default=None, help='"x,y x,y x,y" (polygon)')
    g_shape.add_argument("--labels", nargs="+", default=None)
    _add_param_flags(g_shape)

    g_mask = gsub.add_parser("mask", help="encode an external mask image")
    g_mask.add_argument("file")
    g_mask.add_argument("--labels", nargs="+", default=None)
    _add_param_flags(g_mask)

    g_depth = gsub.add_parser("depth", help="encode a depth-map directory")
    g_depth.add_argument("dir")
    g_depth.add_argument("--thresholds", default="128,255", help="t_l,t_u")
    g_depth.add_argument("--labels", nargs="+", default=None)
    _add_param_flags(g_depth)

    g_batch = gsub.add_parser("batch", help="generate from a spec file")
    g_batch.add_argument("spec")
    g_batch.add_argument("--jobs", type=int, default=1)
    g_batch.add_argument("--out", default=None)
    g_batch.add_argument("--format", choices=("y4m", "png"), default="y4m")

    an = sub.add_parser("analyze", help="compute SNR metrics")
    an.add_argument("video", nargs="?", default=None)
    an.add_argument("--manifest", default=None)
    an.add_argument("--mask-source", choices=("gt", "estimated"), default="gt")
    an.add_argument("--gt-mask", default=None, help="mask PNG for a single video")
    an.add_argument("--tau", type=float, default=0.5)
    an.add_argument("--flow-levels", type=int, default=3)
    an.add_argument("--jobs", type=int, default=1)
    an.add_argument("--out", default=None)

    de = sub.add_parser("decode", help="recover the hidden content mask")
    de.add_argument("video")
    de.add_argument("--gt-mask", default=None)
    de.add_argument("--percentile", type=float, default=90.0)
    de.add_argument("--tau", type=float, default=0.5)
    de.add_argument("--flow-levels", type=int, default=3)
    de.add_argument("--out", default=None)

    ev = sub.add_parser("evaluate", help="score identification responses")
    ev.add_argument("--manifest", required=True)
    ev.add_argument("--responses", required=True)
    ev.add_argument("--roster", default=None)
    ev.add_argument("--per-fps", action="store_true")
    ev.add_argument("--threshold-analysis", action="store_true")
    ev.add_argument("--snr-from", default=None)
    ev.add_argument("--snr-metric", choices=("basic", "perceptual", "temporal_coherence",
                                             "motion_contrast", "combined"), default="basic")
    ev.add_argument("--bin-width", type=float, default=0.5)

    sv = sub.add_parser("serve", help="run the study server")
    sv.add_argument("--manifest", required=True)
    sv.add_argument("--sessions", required=True)
    sv.add_argument("--log", required=True)
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8008)
    sv.add_argument("--root", default=None, help="static UI directory")

    return ap


_COMMANDS = {
    "gen": _cmd_gen,
    "analyze": _cmd_analyze,
    "decode": _cmd_decode,
    "evaluate": _cmd_evaluate,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "analyze" and not (args.video or args.manifest):
        print("analyze: a video path or --manifest is required", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return _COMMANDS[args.command](args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (InvalidParams, store.SchemaViolation, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

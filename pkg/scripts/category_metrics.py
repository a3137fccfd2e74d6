#!/usr/bin/env python3
"""Reproduce the category-level SNR profile table on freshly generated videos.

Generates n videos per category (same fixture families as the acceptance
suite), runs the four flow SNR metrics against ground-truth masks, and prints
the aggregate mean +- stdev table. Full-size runs are slow; the default is a
reduced batch that finishes in a few minutes on two cores:

    python3 scripts/category_metrics.py --per-category 3
"""

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from temporalnoise.metrics import SnrReport, format_category_table, summarize_by_category  # noqa: E402
import accept_fixtures as fx  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--per-category", type=int, default=3, help="videos per category (max 10)")
    ap.add_argument("--jobs", type=int, default=min(2, os.cpu_count() or 1))
    args = ap.parse_args()

    n = min(args.per_category, 10)
    jobs = [(cat, i) for cat in ("text", "shapes", "object_images", "dynamic_scenes")
            for i in range(n)]
    t0 = time.time()
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        rows = list(pool.map(fx.analyze_slot, jobs, chunksize=1))

    summaries = []
    for cat, basic, perc, coh, con in rows:
        summaries.append((cat, SnrReport(basic_db=basic, perceptual_db=perc,
                                         temporal_coherence_db=coh, motion_contrast_db=con,
                                         combined_db=None, contentless=False)))
    print(format_category_table(summarize_by_category(summaries)))
    print(f"\n{len(jobs)} videos in {time.time() - t0:.0f}s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

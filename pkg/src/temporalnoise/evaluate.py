"""Identification scoring, perceptibility summaries, and SNR threshold analysis.

Scoring is exact match over normalized strings: a response is correct iff its
normalized form is a member of the video's acceptable label set. All counts
are kept as exact integer pairs; fractions are derived, never accumulated.
"""

from __future__ import annotations

import math
import string
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

CATEGORIES = ("text", "shapes", "object_images", "dynamic_scenes")
_ARTICLES = ("a", "an", "the")
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


class UnknownVideoId(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class NoRatings(ValueError):
    pass


class InsufficientBins(ValueError):
    pass


def normalize_response(raw: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace, drop leading articles.

    Leading articles are stripped repeatedly so the function is idempotent.
    """
    s = raw.lower().translate(_PUNCT_TABLE)
    tokens = s.split()
    while tokens and tokens[0] in _ARTICLES:
        tokens = tokens[1:]
    return " ".join(tokens)


@dataclass(frozen=True)
class LabelSet:
    """Acceptable answers for one video; text/shapes carry exactly one label."""

    video_id: str
    category: str
    labels: frozenset[str]

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")
        normalized = frozenset(normalize_response(l) for l in self.labels)
        if not normalized or normalized == {""}:
            raise ValueError(f"{self.video_id}: label set is empty")
        if self.category in ("text", "shapes") and len(normalized) != 1:
            raise ValueError(f"{self.video_id}: {self.category} must have exactly one label")
        object.__setattr__(self, "labels", normalized)

    def accepts(self, response_text: str) -> bool:
        return normalize_response(response_text) in self.labels


@dataclass(frozen=True)
class ResponseRecord:
    video_id: str
    responder_id: str
    response_text: str
    perceptibility: Optional[int] = None
    fps_shown: Optional[float] = None
    prompt_id: Optional[str] = None
    session_id: Optional[str] = None
    timestamp: int = 0

    def __post_init__(self):
        if self.perceptibility is not None and not (1 <= self.perceptibility <= 5):
            raise ValueError(f"perceptibility {self.perceptibility} outside [1,5]")


@dataclass(frozen=True)
class Cell:
    """Exact integer tally; accuracy is always correct/count."""

    correct: int
    count: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.count

    def __add__(self, other: "Cell") -> "Cell":
        return Cell(self.correct + other.correct, self.count + other.count)


@dataclass(frozen=True)
class AccuracyReport:
    overall: Cell
    per_category: dict[str, Cell]
    per_responder: dict[str, Cell]
    per_fps: Optional[dict[float, Cell]]
    per_responder_category: dict[tuple[str, str], Cell]
    per_fps_category: dict[tuple[float, str], Cell]
    mean_perceptibility: dict[str, float]
    mode: str  # "answered_only" or "roster"


def score(responses: Sequence[ResponseRecord], labels: Sequence[LabelSet],
          roster: Optional[Iterable[str]] = None) -> AccuracyReport:
    """Exact-match accuracy with exact per-cell counts.

    Without a roster, cells cover answered videos only. With a roster (an
    iterable of assigned video ids), every responder seen in the responses is
    charged one incorrect trial per unanswered roster video. A trial is keyed
    by (responder, video, fps condition): the same video shown at two frame
    rates is two trials, but re-answering the same condition keeps only the
    last response.
    """
    if not responses:
        raise EmptyInput("no responses to score")
    by_id = {l.video_id: l for l in labels}
    for r in responses:
        if r.video_id not in by_id:
            raise UnknownVideoId(f"response references unknown video {r.video_id!r}")

    last: dict[tuple[str, str, Optional[float]], ResponseRecord] = {}
    for r in responses:
        last[(r.responder_id, r.video_id, r.fps_shown)] = r

    trials: list[tuple[str, str, bool, Optional[float], Optional[int]]] = []
    for (responder, video_id, fps_shown), r in sorted(
            last.items(), key=lambda kv: (kv[0][0], kv[0][1], -1.0 if kv[0][2] is None else kv[0][2])):
        ls = by_id[video_id]
        trials.append((responder, video_id, ls.accepts(r.response_text), fps_shown, r.perceptibility))

    mode = "answered_only"
    if roster is not None:
        mode = "roster"
        roster_ids = list(roster)
        for vid in roster_ids:
            if vid not in by_id:
                raise UnknownVideoId(f"roster references unknown video {vid!r}")
        answered = {(resp, vid) for (resp, vid, _f) in last}
        responders = sorted({r.responder_id for r in responses})
        for responder in responders:
            for vid in roster_ids:
                if (responder, vid) not in answered:
                    trials.append((responder, vid, False, None, None))

    def tally(keyed: dict, key, ok: bool):
        c = keyed.get(key, Cell(0, 0))
        keyed[key] = Cell(c.correct + int(ok), c.count + 1)

    per_category: dict[str, Cell] = {}
    per_responder: dict[str, Cell] = {}
    per_fps: dict[float, Cell] = {}
    per_responder_category: dict[tuple[str, str], Cell] = {}
    per_fps_category: dict[tuple[float, str], Cell] = {}
    overall = Cell(0, 0)
    ratings: dict[str, list[int]] = defaultdict(list)

    for responder, video_id, ok, fps_shown, rating in trials:
        cat = by_id[video_id].category
        overall = overall + Cell(int(ok), 1)
        tally(per_category, cat, ok)
        tally(per_responder, responder, ok)
        tally(per_responder_category, (responder, cat), ok)
        if fps_shown is not None:
            tally(per_fps, float(fps_shown), ok)
            tally(per_fps_category, (float(fps_shown), cat), ok)
        if rating is not None:
            ratings[cat].append(rating)

    return AccuracyReport(
        overall=overall,
        per_category=per_category,
        per_responder=per_responder,
        per_fps=per_fps or None,
        per_responder_category=per_responder_category,
        per_fps_category=per_fps_category,
        mean_perceptibility={c: sum(v) / len(v) for c, v in ratings.items()},
        mode=mode,
    )


def perceptibility_summary(responses: Sequence[ResponseRecord],
                           labels: Sequence[LabelSet]) -> dict[str, tuple[float, float, int]]:
    """Per-category (mean, population stdev, n) of the 1-5 ratings."""
    by_id = {l.video_id: l for l in labels}
    buckets: dict[str, list[int]] = defaultdict(list)
    for r in responses:
        if r.perceptibility is None:
            continue
        if r.video_id not in by_id:
            raise UnknownVideoId(f"response references unknown video {r.video_id!r}")
        buckets[by_id[r.video_id].category].append(r.perceptibility)
    if not buckets:
        raise NoRatings("no perceptibility ratings present")
    out = {}
    for cat, vals in sorted(buckets.items()):
        n = len(vals)
        mean = sum(vals) / n
        var = sum((v - mean) ** 2 for v in vals) / n
        out[cat] = (mean, math.sqrt(var), n)
    return out


@dataclass(frozen=True)
class ThresholdReport:
    """Binned detection accuracy over SNR, plus the largest-jump step location."""

    bin_width: float
    bins: tuple[tuple[float, float, int], ...]  # (bin center dB, accuracy, count)
    step_db: Optional[float]
    max_jump: float
    binary_threshold: bool


def snr_threshold_analysis(scored: Sequence[tuple[str, float, bool]],
                           bin_width: float = 0.5) -> ThresholdReport:
    """Bin (video, snr_db, correct) triples by SNR and find the accuracy step.

    The step location is the midpoint between the centers of the consecutive
    populated bin pair with the largest absolute accuracy jump; the "binary
    threshold" flag is set when that jump exceeds 0.5.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    cells: dict[int, Cell] = {}
    for _vid, snr, ok in scored:
        k = math.floor(snr / bin_width)
        c = cells.get(k, Cell(0, 0))
        cells[k] = Cell(c.correct + int(ok), c.count + 1)
    if len(cells) < 2:
        raise InsufficientBins("need at least 2 populated SNR bins")

    keys = sorted(cells)
    centers = {k: (k + 0.5) * bin_width for k in keys}
    step = None
    max_jump = 0.0
    for k1, k2 in zip(keys, keys[1:]):
        jump = abs(cells[k2].accuracy - cells[k1].accuracy)
        if jump > max_jump:
            max_jump = jump
            step = (centers[k1] + centers[k2]) / 2
    bins = tuple((centers[k], cells[k].accuracy, cells[k].count) for k in keys)
    return ThresholdReport(
        bin_width=bin_width,
        bins=bins,
        step_db=step if max_jump > 0 else None,
        max_jump=max_jump,
        binary_threshold=max_jump > 0.5,
    )


def labels_from_entries(entries) -> list[LabelSet]:
    """LabelSets from manifest entries (anything with video_id/category/labels)."""
    return [LabelSet(video_id=e.video_id, category=e.category, labels=frozenset(e.labels))
            for e in entries]


def format_annotator_table(report: AccuracyReport) -> str:
    """Rows per responder, accuracy and mean rating per category, plus a mean row."""
    cats = [c for c in CATEGORIES if c in report.per_category]
    responders = sorted(report.per_responder)
    header = f"{'Annotator':<14}" + "".join(f"{c + ' Acc(%)':>22}{'Perc(1-5)':>11}" for c in cats)
    lines = [header, "-" * len(header)]
    acc_cols: dict[str, list[float]] = defaultdict(list)
    for responder in responders:
        cells = []
        for c in cats:
            cell = report.per_responder_category.get((responder, c))
            if cell:
                acc_cols[c].append(100 * cell.accuracy)
                cells.append(f"{100 * cell.accuracy:>22.1f}{'':>11}")
            else:
                cells.append(f"{'n/a':>22}{'':>11}")
        lines.append(f"{responder:<14}" + "".join(cells))
    mean_cells = []
    for c in cats:
        accs = acc_cols[c]
        if accs:
            m = sum(accs) / len(accs)
            sd = math.sqrt(sum((a - m) ** 2 for a in accs) / len(accs))
            perc = report.mean_perceptibility.get(c)
            ptxt = f"{perc:.1f}" if perc is not None else "n/a"
            mean_cells.append(f"{f'{m:.1f}+-{sd:.1f}':>22}{ptxt:>11}")
        else:
            mean_cells.append(f"{'n/a':>22}{'n/a':>11}")
    lines.append(f"{'Mean':<14}" + "".join(mean_cells))
    return "\n".join(lines)


def format_fps_table(report: AccuracyReport) -> str:
    """Rows per category, one column per frame-rate condition, plus an average row."""
    if not report.per_fps:
        return "no per-fps data"
    fps_values = sorted(report.per_fps)
    cats = [c for c in CATEGORIES if c in report.per_category]
    header = f"{'Category':<16}" + "".join(f"{f'{int(f) if f == int(f) else f} FPS':>12}" for f in fps_values)
    lines = [header, "-" * len(header)]
    for c in cats:
        cells = []
        for f in fps_values:
            cell = report.per_fps_category.get((f, c))
            cells.append(f"{100 * cell.accuracy:>12.2f}" if cell else f"{'n/a':>12}")
        lines.append(f"{c:<16}" + "".join(cells))
    avg = []
    for f in fps_values:
        cell = report.per_fps.get(f)
        avg.append(f"{100 * cell.accuracy:>12.2f}" if cell else f"{'n/a':>12}")
    lines.append(f"{'Average':<16}" + "".join(avg))
    return "\n".join(lines)


def format_threshold_report(t: ThresholdReport) -> str:
    lines = [f"{'SNR bin (dB)':>14}{'accuracy':>10}{'n':>6}"]
    for center, acc, n in t.bins:
        lines.append(f"{center:>14.2f}{acc:>10.3f}{n:>6}")
    if t.step_db is not None:
        lines.append(f"step at {t.step_db:.2f} dB (max jump {t.max_jump:.3f})")
        lines.append("binary threshold: " + ("yes" if t.binary_threshold else "no"))
    else:
        lines.append("no accuracy step (uniform bins)")
    return "\n".join(lines)

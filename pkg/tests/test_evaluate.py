import random

import pytest
from hypothesis import given, settings, strategies as st

from temporalnoise.evaluate import (EmptyInput, InsufficientBins, LabelSet, NoRatings,
                                    ResponseRecord, UnknownVideoId, format_annotator_table,
                                    format_fps_table, normalize_response,
                                    perceptibility_summary, score, snr_threshold_analysis)


def test_normalize_examples():
    assert normalize_response("  Playing   Basketball! ") == "playing basketball"
    assert normalize_response("The circle") == "circle"
    assert normalize_response("GOLD") == "gold"


def test_normalize_repeated_articles():
    assert normalize_response("the the circle") == "circle"
    assert normalize_response("a an apple") == "apple"


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=40))
def test_normalize_idempotent(s):
    once = normalize_response(s)
    assert normalize_response(once) == once


def test_label_set_accepts_paper_example():
    ls = LabelSet(video_id="v1", category="dynamic_scenes",
                  labels=frozenset({"playing basketball", "man", "human",
                                    "woman playing basketball"}))
    assert ls.accepts("man")
    assert ls.accepts("  The Man ")
    assert not ls.accepts("dog")


def test_label_set_text_single_label():
    with pytest.raises(ValueError):
        LabelSet(video_id="t", category="text", labels=frozenset({"gold", "golden"}))


def _fixture():
    labels = [
        LabelSet("t1", "text", frozenset({"gold"})),
        LabelSet("t2", "text", frozenset({"rain"})),
        LabelSet("t3", "text", frozenset({"mind"})),
        LabelSet("s1", "shapes", frozenset({"circle"})),
        LabelSet("s2", "shapes", frozenset({"triangle"})),
    ]
    responses = [
        ResponseRecord("t1", "r1", "GOLD"),       # correct
        ResponseRecord("t2", "r1", "rain "),      # correct
        ResponseRecord("t3", "r1", "wave"),       # wrong
        ResponseRecord("s1", "r1", "the circle"), # correct
        ResponseRecord("s2", "r1", "square"),     # wrong
    ]
    return responses, labels


def test_hand_scored_fixture_exact():
    responses, labels = _fixture()
    rep = score(responses, labels)
    assert (rep.overall.correct, rep.overall.count) == (3, 5)
    assert (rep.per_category["text"].correct, rep.per_category["text"].count) == (2, 3)
    assert (rep.per_category["shapes"].correct, rep.per_category["shapes"].count) == (1, 2)
    assert rep.mode == "answered_only"


def test_overall_is_count_weighted_category_sum():
    responses, labels = _fixture()
    rep = score(responses, labels)
    assert rep.overall.correct == sum(c.correct for c in rep.per_category.values())
    assert rep.overall.count == sum(c.count for c in rep.per_category.values())


def test_score_order_independent():
    responses, labels = _fixture()
    shuffled = responses[:]
    random.Random(7).shuffle(shuffled)
    assert score(shuffled, labels) == score(responses, labels)


def test_empty_input():
    _, labels = _fixture()
    with pytest.raises(EmptyInput):
        score([], labels)


def test_unknown_video_id():
    _, labels = _fixture()
    with pytest.raises(UnknownVideoId):
        score([ResponseRecord("nope", "r1", "gold")], labels)


def test_roster_counts_unanswered_as_incorrect():
    responses, labels = _fixture()
    rep = score(responses[:3], labels, roster=[l.video_id for l in labels])
    assert rep.mode == "roster"
    assert rep.overall.count == 5
    assert rep.overall.correct == 2  # t1, t2 correct; t3 wrong; s1, s2 unanswered


def test_last_response_wins_on_duplicates():
    _, labels = _fixture()
    responses = [
        ResponseRecord("t1", "r1", "wrong", timestamp=1),
        ResponseRecord("t1", "r1", "gold", timestamp=2),
    ]
    rep = score(responses, labels)
    assert (rep.overall.correct, rep.overall.count) == (1, 1)


def test_perceptibility_summary_values():
    _, labels = _fixture()
    responses = [
        ResponseRecord("t1", "r1", "gold", perceptibility=5),
        ResponseRecord("s1", "r1", "circle", perceptibility=4),
        ResponseRecord("s1", "r2", "circle", perceptibility=4),
        ResponseRecord("s2", "r1", "triangle", perceptibility=5),
        ResponseRecord("s2", "r2", "triangle", perceptibility=5),
    ]
    summary = perceptibility_summary(responses, labels)
    assert summary["text"] == (5.0, 0.0, 1)
    mean, sd, n = summary["shapes"]
    assert (mean, sd, n) == (4.5, 0.5, 4)


def test_perceptibility_no_ratings():
    responses, labels = _fixture()
    with pytest.raises(NoRatings):
        perceptibility_summary(responses, labels)


def test_rating_out_of_range_rejected():
    with pytest.raises(ValueError):
        ResponseRecord("t1", "r1", "gold", perceptibility=6)


def test_annotator_table_has_row_per_responder_plus_mean():
    _, labels = _fixture()
    responses = []
    for r in ("a1", "a2", "a3", "a4", "a5", "a6"):
        responses.append(ResponseRecord("t1", r, "gold", perceptibility=5))
        responses.append(ResponseRecord("s1", r, "circle", perceptibility=5))
    rep = score(responses, labels)
    table = format_annotator_table(rep)
    lines = table.splitlines()
    assert len([l for l in lines if l.startswith("a")]) == 6
    assert lines[-1].startswith("Mean")


def test_threshold_step_recovered():
    # near-zero detection below 2.5 dB; 6/7 correct (~0.857) above it
    scored = []
    for i, snr in enumerate([0.3, 0.8, 1.2, 1.7, 2.2]):
        scored.append((f"lo{i}", snr, False))
    for i, (snr, ok) in enumerate([(2.6, True), (2.9, True), (3.2, True), (3.7, True),
                                   (4.1, True), (4.4, False), (4.7, True)]):
        scored.append((f"hi{i}", snr, ok))
    rep = snr_threshold_analysis(scored, bin_width=0.5)
    assert rep.binary_threshold
    assert abs(rep.step_db - 2.5) <= 0.25  # within bin_width/2
    correct_high = sum(ok for _v, s, ok in scored if s > 2.5)
    assert correct_high / 7 == pytest.approx(0.857, abs=0.001)


def test_threshold_uniform_no_step():
    scored = [(f"v{i}", float(i), True) for i in range(6)]
    rep = snr_threshold_analysis(scored, bin_width=1.0)
    assert rep.step_db is None
    assert not rep.binary_threshold


def test_threshold_ramp_not_flagged():
    scored = []
    k = 0
    for b in range(10):
        acc = b / 9
        for j in range(9):
            scored.append((f"v{k}", b + 0.5, j < round(acc * 9)))
            k += 1
    rep = snr_threshold_analysis(scored, bin_width=1.0)
    assert rep.max_jump <= 0.2
    assert not rep.binary_threshold


def test_threshold_insufficient_bins():
    with pytest.raises(InsufficientBins):
        snr_threshold_analysis([("v", 1.0, True), ("w", 1.2, False)], bin_width=5.0)


def test_fps_table_shape():
    _, labels = _fixture()
    responses = []
    for fps in (1, 5, 10, 20, 30):
        responses.append(ResponseRecord("t1", "r1", "gold" if fps >= 20 else "x", fps_shown=fps))
        responses.append(ResponseRecord("s1", "r1", "circle" if fps >= 10 else "x", fps_shown=fps))
    rep = score(responses, labels)
    table = format_fps_table(rep)
    lines = table.splitlines()
    assert "1 FPS" in lines[0] and "30 FPS" in lines[0]
    assert any(l.startswith("text") for l in lines)
    assert any(l.startswith("shapes") for l in lines)
    assert lines[-1].startswith("Average")

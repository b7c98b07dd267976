import pytest
from hypothesis import given
from hypothesis import strategies as st

from lagwatch.segmentation import EmptyScores, extract_static_runs
from lagwatch.similarity import PairScore

from oracles import brute_force_runs


def pairs(values):
    return [PairScore(i, i + 1, v) for i, v in enumerate(values)]


def test_frozen_pattern_run_includes_first_unchanged_frame():
    # Frames 0..8; content stops changing after frame 2 and resumes at 7.
    scores = pairs([0.7, 0.6, 0.99, 0.995, 1.0, 0.99, 0.5, 0.6])
    runs = extract_static_runs(scores, 0.98)
    assert [(r.f_start, r.f_end) for r in runs] == [(2, 6)]
    assert runs[0].duration_ms == 4


def test_durations_follow_pts():
    pts = [0, 16.7, 33.4, 250.0, 400.0]
    runs = extract_static_runs(pairs([0.1, 0.99, 0.99, 0.1]), 0.98, pts)
    assert runs[0].duration_ms == pytest.approx(250.0 - 16.7)


def test_threshold_is_inclusive():
    runs = extract_static_runs(pairs([0.5, 0.98, 0.5]), 0.98)
    assert [(r.f_start, r.f_end) for r in runs] == [(1, 2)]


def test_run_touching_both_ends():
    runs = extract_static_runs(pairs([1.0, 1.0, 1.0]), 0.98)
    assert [(r.f_start, r.f_end) for r in runs] == [(0, 3)]


def test_no_runs():
    assert extract_static_runs(pairs([0.1, 0.2]), 0.98) == []


def test_empty_scores():
    with pytest.raises(EmptyScores):
        extract_static_runs([], 0.98)


def test_non_consecutive_scores():
    with pytest.raises(ValueError):
        extract_static_runs([PairScore(0, 1, 1.0), PairScore(2, 3, 1.0)], 0.98)


@given(st.lists(st.booleans(), min_size=1, max_size=60))
def test_matches_brute_force(flags):
    scores = pairs([0.999 if f else 0.5 for f in flags])
    runs = extract_static_runs(scores, 0.98)
    assert [(r.f_start, r.f_end) for r in runs] == brute_force_runs(flags)


@given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=60), st.floats(0.5, 0.999))
def test_run_invariants(values, threshold):
    runs = extract_static_runs(pairs(values), threshold)
    n_frames = len(values) + 1
    for r in runs:
        assert 0 <= r.f_start < r.f_end < n_frames
        assert all(values[i] >= threshold for i in range(r.f_start, r.f_end))
        # maximal on both sides
        assert r.f_start == 0 or values[r.f_start - 1] < threshold
        assert r.f_end == n_frames - 1 or values[r.f_end] < threshold
    # ordered and never adjacent: a moving pair always separates two runs
    for a, b in zip(runs, runs[1:]):
        assert a.f_end < b.f_start

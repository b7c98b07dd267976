import json

import numpy as np
import pytest

from lagwatch.evaluation import (
    Annotation,
    GroundTruth,
    SpecError,
    SyntheticSpec,
    generate_synthetic,
    match_lags,
    metrics,
    tabulate,
)
from lagwatch.evaluation.harness import CorpusError, evaluate, load_corpus, synthetic_items, write_corpus
from lagwatch.evaluation.synthetic import corpus_spec, write_synthetic
from lagwatch.ingest import load_manifest
from lagwatch.model import LagInterval, LagType


def det(kind, a, b):
    return LagInterval(LagType(kind), a, b, 0.0, 1.0)


def truth(*rows):
    return GroundTruth(tuple(Annotation(k, a, b) for k, a, b in rows))


def counts(result):
    return len(result.tp), len(result.fp), len(result.fn)


def test_exact_match():
    assert counts(match_lags([det("frozen", 2, 4)], truth(("frozen", 2, 4)))) == (1, 0, 0)


def test_off_by_one_end():
    assert counts(match_lags([det("frozen", 2, 5)], truth(("frozen", 2, 4)))) == (0, 1, 1)


def test_off_by_one_start():
    assert counts(match_lags([det("frozen", 1, 4)], truth(("frozen", 2, 4)))) == (0, 1, 1)


def test_type_mismatch():
    res = match_lags([det("loading", 2, 4)], truth(("frozen", 2, 4)))
    assert res.fp == [("loading", 2, 4)] and res.fn == [("frozen", 2, 4)]


def test_one_to_one():
    res = match_lags([det("janky", 2, 3), det("janky", 2, 3)], truth(("janky", 2, 3)))
    assert counts(res) == (1, 1, 0)


def test_per_type_counts():
    res = match_lags(
        [det("loading", 2, 4), det("janky", 7, 8)],
        truth(("frozen", 2, 4), ("janky", 7, 8)),
    )
    table = tabulate([res])
    assert (table.rows["janky"].tp, table.rows["loading"].fp, table.rows["frozen"].fn) == (1, 1, 1)
    assert (table.overall.tp, table.overall.fp, table.overall.fn) == (1, 1, 1)


def test_metrics_examples():
    row = metrics(9, 1, 0)
    assert (row.precision, row.recall) == (0.9, 1.0)
    assert row.f1 == pytest.approx(0.947, abs=1e-3)
    row = metrics(91, 9, 4)
    assert row.precision == pytest.approx(0.91)
    assert row.recall == pytest.approx(0.958, abs=1e-3)
    assert row.f1 == pytest.approx(0.933, abs=1e-3)


def test_metrics_undefined():
    row = metrics(0, 0, 0)
    assert (row.precision, row.recall, row.f1) == (None, None, None)
    assert metrics(0, 3, 0).recall is None and metrics(0, 3, 0).precision == 0.0
    assert metrics(0, 2, 2).f1 == 0.0


def test_average_row_is_macro_mean():
    res = match_lags(
        [det("janky", 1, 2), det("janky", 5, 6), det("frozen", 9, 20)],
        truth(("janky", 1, 2), ("frozen", 9, 20), ("frozen", 30, 40)),
    )
    table = tabulate([res])
    assert table.rows["loading"].precision is None
    assert table.average["precision"] == pytest.approx((0.5 + 1.0) / 2)
    assert table.average["recall"] == pytest.approx((1.0 + 0.5) / 2)
    assert "n/a" in table.render()


def test_truth_json_round_trip():
    t = truth(("janky", 3, 4), ("loading", 10, 80))
    assert GroundTruth.from_json(t.to_json()) == t
    assert json.loads(t.to_json())[0] == {"type": "janky", "f_start": 3, "f_end": 4}


def test_freeze_truth():
    syn = generate_synthetic(SyntheticSpec(events=({"kind": "freeze", "start_ms": 1000, "duration_ms": 300},)))
    (ann,) = syn.truth.annotations
    assert ann.lag_type is LagType.FROZEN
    frames = syn.cast.frames
    assert frames[ann.f_end].pts_ms - frames[ann.f_start].pts_ms == pytest.approx(300, abs=1e-6)
    for i in range(ann.f_start, ann.f_end):
        assert np.array_equal(frames[i].image_ref, frames[i + 1].image_ref)
    assert not np.array_equal(frames[ann.f_start - 1].image_ref, frames[ann.f_start].image_ref)


def test_jank_gap_truth():
    syn = generate_synthetic(SyntheticSpec(events=({"kind": "jank_gap", "start_ms": 500, "duration_ms": 150},)))
    (ann,) = syn.truth.annotations
    assert (ann.lag_type, ann.f_end - ann.f_start) == (LagType.JANKY, 1)
    assert np.diff(syn.cast.pts).max() == pytest.approx(150, abs=1e-6)


def test_short_events_produce_no_truth():
    spec = SyntheticSpec(
        events=(
            {"kind": "jank_gap", "start_ms": 200, "duration_ms": 50},
            {"kind": "freeze", "start_ms": 600, "duration_ms": 66.7},
            {"kind": "loading_stall", "start_ms": 900, "duration_ms": 800},
        ),
        duration_ms=2000,
    )
    assert generate_synthetic(spec).truth.annotations == ()


def test_scroll_emits_trace_event():
    syn = generate_synthetic(SyntheticSpec(events=({"kind": "scroll_motion", "start_ms": 400, "duration_ms": 200},)))
    assert [e.kind.value for e in syn.trace.events] == ["scroll"]
    assert syn.trace.events[0].pts_ms == pytest.approx(400, abs=20)


def test_generator_determinism():
    spec = corpus_spec(4, noise=3, pts_jitter_ms=1)
    a, b = generate_synthetic(spec), generate_synthetic(spec)
    assert a.truth == b.truth and np.array_equal(a.cast.pts, b.cast.pts)
    assert all(np.array_equal(x.image_ref, y.image_ref) for x, y in zip(a.cast.frames, b.cast.frames))


def test_generator_files_identical(tmp_path):
    spec = SyntheticSpec(duration_ms=300, seed=3, events=({"kind": "freeze", "start_ms": 50, "duration_ms": 150},))
    for d in ("a", "b"):
        write_synthetic(generate_synthetic(spec), tmp_path / d)
    for f in (tmp_path / "a").rglob("*"):
        if f.is_file():
            assert f.read_bytes() == (tmp_path / "b" / f.relative_to(tmp_path / "a")).read_bytes()


@pytest.mark.parametrize(
    "events",
    [
        ({"kind": "freeze", "start_ms": 100, "duration_ms": 300}, {"kind": "jank_gap", "start_ms": 200, "duration_ms": 150}),
        ({"kind": "freeze", "start_ms": 1900, "duration_ms": 300},),
        ({"kind": "freeze", "start_ms": 100, "duration_ms": 0},),
        ({"kind": "teleport", "start_ms": 100, "duration_ms": 10},),
    ],
)
def test_spec_errors(events):
    with pytest.raises((SpecError, ValueError)):
        generate_synthetic(SyntheticSpec(events=events))


def test_spec_dict_round_trip():
    spec = corpus_spec(12)
    assert SyntheticSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec


def test_corpus_spec_targets():
    kinds = {corpus_spec(s).events[0].kind.value for s in range(20, 30)} | {
        e.kind.value for s in range(20, 30) for e in corpus_spec(s).events
    }
    assert kinds == {"freeze", "scroll_motion"}
    assert corpus_spec(3).source_id == "corpus-03-janky"


def test_evaluate_in_memory_small_corpus():
    items = synthetic_items([corpus_spec(s) for s in (0, 10, 20)])
    report = evaluate(items)
    for row in report.table.rows.values():
        assert (row.precision, row.recall, row.f1) == (1.0, 1.0, 1.0)


def test_single_cast_corpus_matches_cast(tmp_path):
    write_corpus([corpus_spec(21)], tmp_path)
    items = load_corpus(tmp_path)
    assert len(items) == 1
    report = evaluate(items)
    cast_match = report.casts[0].match
    assert report.table.overall.tp == len(cast_match.tp)
    assert report.table.overall.fp == len(cast_match.fp)
    assert report.table.overall.fn == len(cast_match.fn)
    assert load_manifest(tmp_path / "corpus-21-frozen" / "manifest.txt").source_id == "corpus-21-frozen"


def test_empty_corpus(tmp_path):
    with pytest.raises(CorpusError):
        load_corpus(tmp_path)
    with pytest.raises(CorpusError):
        evaluate([])

import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from lagwatch.placeholder import (
    DetectorKind,
    DetectorSpec,
    DetectorTimeout,
    DetectorUnavailable,
    ExternalDetector,
    PlaceholderDetector,
    PlaceholderRegion,
    ProtocolError,
    detect_external,
    detect_heuristic,
    has_placeholder,
    union_area,
)

from conftest import FIXTURES
from oracles import raster_union_area

MOCK = FIXTURES / "mock_detector.py"


def mock_spec(mode, **kw):
    return DetectorSpec(kind="external", external_cmd=f"{sys.executable} {MOCK} {mode}", **kw)


@pytest.fixture
def frame_png(tmp_path):
    path = tmp_path / "frame.png"
    Image.fromarray(np.full((240, 200, 3), 30, np.uint8)).save(path)
    return path


def skeleton_frame(noise=0, seed=0):
    """Dark screen with a flat light-gray block of 100x60 at (20, 40)."""
    frame = np.full((240, 200), 30.0)
    frame[40:100, 20:120] = 224
    if noise:
        frame += np.random.default_rng(seed).uniform(-noise, noise, frame.shape)
    return np.clip(np.round(frame), 0, 255).astype(np.uint8)


def test_heuristic_finds_skeleton_block():
    regions = detect_heuristic(skeleton_frame())
    assert len(regions) == 1
    r = regions[0]
    assert (r.x, r.y, r.w, r.h) == (20, 40, 100, 60)
    assert r.confidence == pytest.approx(1.0)
    assert r.source is DetectorKind.HEURISTIC


def test_heuristic_tolerates_mild_noise():
    regions = detect_heuristic(skeleton_frame(noise=3))
    assert len(regions) == 1 and regions[0].area == 6000


def test_heuristic_rejects_textured_gray():
    frame = skeleton_frame()
    rng = np.random.default_rng(1)
    frame[40:100, 20:120] = rng.integers(185, 245, (60, 100))
    assert detect_heuristic(frame) == []


def test_heuristic_ignores_small_and_out_of_band():
    frame = np.full((240, 200), 30, np.uint8)
    frame[0:10, 0:10] = 224  # 100 px < 0.5% of 48000
    frame[100:200, 50:150] = 120  # flat but darker than the band
    assert detect_heuristic(frame) == []


def test_blank_frame_has_no_placeholder():
    assert detect_heuristic(np.zeros((50, 50, 3), np.uint8)) == []


def test_one_percent_box_meets_threshold():
    box = PlaceholderRegion(0, 0, 108, 240, 0.9)
    present, fraction = has_placeholder([box], 1080 * 2400, 0.01)
    assert fraction == pytest.approx(0.01, abs=1e-12)
    assert present


def test_below_threshold_not_present():
    box = PlaceholderRegion(0, 0, 107, 240, 0.9)
    assert not has_placeholder([box], 1080 * 2400, 0.01)[0]
    assert has_placeholder([], 100, 0.0) == (False, 0.0)


def test_overlap_counted_once():
    a = PlaceholderRegion(0, 0, 10, 10, 1)
    b = PlaceholderRegion(5, 5, 10, 10, 1)
    assert union_area([a, b]) == 175
    assert union_area([a, a]) == 100


boxes = st.lists(
    st.tuples(st.integers(0, 39), st.integers(0, 29), st.integers(1, 20), st.integers(1, 20)),
    max_size=12,
)


def clipped(bs):
    return [(x, y, min(w, 40 - x), min(h, 30 - y)) for x, y, w, h in bs]


@settings(max_examples=200)
@given(boxes)
def test_union_area_matches_raster(bs):
    bs = clipped(bs)
    regions = [PlaceholderRegion(x, y, w, h, 1.0) for x, y, w, h in bs]
    assert union_area(regions) == raster_union_area(bs, 40, 30)


@given(boxes, st.tuples(st.integers(0, 39), st.integers(0, 29), st.integers(1, 20), st.integers(1, 20)))
def test_union_area_monotone(bs, extra):
    regions = [PlaceholderRegion(*b, 1.0) for b in clipped(bs)]
    more = regions + [PlaceholderRegion(*clipped([extra])[0], 1.0)]
    assert union_area(more) >= union_area(regions)
    frac_a = has_placeholder(regions, 1200, 0.01)[1]
    frac_b = has_placeholder(more, 1200, 0.01)[1]
    assert 0.0 <= frac_a <= frac_b <= 1.0


def test_external_box(frame_png):
    regions = detect_external(frame_png, mock_spec("box"))
    assert len(regions) == 1
    r = regions[0]
    assert (r.x, r.y, r.w, r.h, r.confidence) == (10, 10, 100, 100, 0.9)
    assert r.source is DetectorKind.EXTERNAL


def test_external_confidence_floor(frame_png):
    assert detect_external(frame_png, mock_spec("low")) == []
    assert len(detect_external(frame_png, mock_spec("low", confidence_floor=0.2))) == 1


def test_external_garbage_is_protocol_error(frame_png):
    with pytest.raises(ProtocolError):
        detect_external(frame_png, mock_spec("garbage"))


def test_external_wrong_id_is_protocol_error(frame_png):
    with pytest.raises(ProtocolError):
        detect_external(frame_png, mock_spec("wrongid"))


def test_external_timeout(frame_png):
    with pytest.raises(DetectorTimeout):
        detect_external(frame_png, mock_spec("silent", timeout_s=0.5))


def test_external_missing_binary(frame_png):
    spec = DetectorSpec(kind="external", external_cmd="/nonexistent/detector")
    with pytest.raises(DetectorUnavailable):
        detect_external(frame_png, spec)


def test_external_box_clipped_to_frame(tmp_path):
    path = tmp_path / "small.png"
    Image.fromarray(np.zeros((50, 60), np.uint8)).save(path)
    (r,) = detect_external(path, mock_spec("box"))
    assert (r.x, r.y, r.w, r.h) == (10, 10, 50, 40)


def test_long_lived_process_serves_many_requests(frame_png):
    with ExternalDetector(mock_spec("box")) as det:
        for _ in range(5):
            assert len(det.detect(frame_png)) == 1


def test_front_end_writes_arrays_for_external_detector():
    with PlaceholderDetector(mock_spec("gray")) as det:
        regions = det.detect(None, skeleton_frame())
    assert len(regions) == 1 and regions[0].area == 6000


def test_spec_validation():
    with pytest.raises(ValueError):
        DetectorSpec(kind="external")
    with pytest.raises(ValueError):
        DetectorSpec(confidence_floor=1.5)

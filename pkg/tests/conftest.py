from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from lagwatch.model import make_screencast

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def solid(value, width=64, height=48):
    """Uniform RGB frame."""
    return np.full((height, width, 3), value, dtype=np.uint8)


def striped(offset, width=64, height=48, period=6):
    """Horizontal stripes shifted down by ``offset`` pixels (a scrolled list)."""
    rows = (np.arange(height) + offset) % period < period // 2
    frame = np.where(rows[:, None, None], 40, 250).astype(np.uint8)
    return np.broadcast_to(frame, (height, width, 3)).copy()


def cast_from(frames, pts, source="test"):
    h, w = frames[0].shape[:2]
    return make_screencast(list(zip(pts, frames)), w, h, source)


@pytest.fixture
def make_cast():
    return cast_from


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, text = RESULTS[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {text}")

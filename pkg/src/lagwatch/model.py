"""Shared domain types and timeline arithmetic."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence, Union

import numpy as np

# Absolute tolerance for millisecond comparisons.
PTS_TOL_MS = 1e-6

ImageRef = Union[str, Path, np.ndarray]


class LagwatchError(Exception):
    """Base class for all errors raised by lagwatch."""


class ScreencastError(LagwatchError):
    pass


class NonMonotonicPts(ScreencastError):
    pass


class TooFewFrames(ScreencastError):
    pass


class DimensionMismatch(ScreencastError):
    pass


class IndexOutOfRange(ScreencastError):
    pass


class InvalidInterval(ScreencastError):
    pass


class ConfigError(LagwatchError):
    pass


class LagType(str, enum.Enum):
    JANKY = "janky"
    LOADING = "loading"
    FROZEN = "frozen"

    @property
    def order(self) -> int:
        return _TYPE_ORDER[self]


_TYPE_ORDER = {LagType.JANKY: 0, LagType.LOADING: 1, LagType.FROZEN: 2}


@dataclass(frozen=True)
class Frame:
    index: int
    pts_ms: float
    # Arrays do not support ==, so identity is (index, pts) only.
    image_ref: Any = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Screencast:
    frames: tuple[Frame, ...]
    width_px: int
    height_px: int
    source_id: str = ""
    root: Path | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def pts(self) -> np.ndarray:
        return np.array([f.pts_ms for f in self.frames], dtype=np.float64)

    @property
    def frame_area(self) -> int:
        return self.width_px * self.height_px

    def frame_label(self, index: int) -> str:
        """Stable textual reference to a frame, relative to ``root`` when possible."""
        ref = self.frames[index].image_ref
        if isinstance(ref, (str, Path)):
            path = Path(ref)
            if self.root is not None:
                try:
                    return path.relative_to(self.root).as_posix()
                except ValueError:
                    pass
            return path.as_posix()
        return f"memory:{index}"


@dataclass(frozen=True)
class StaticRun:
    f_start: int
    f_end: int
    duration_ms: float


@dataclass(frozen=True)
class LagInterval:
    lag_type: LagType
    f_start: int
    f_end: int
    start_pts_ms: float
    duration_ms: float
    severe: bool = False
    evidence: str = ""
    area_fraction: float = 0.0

    @property
    def end_pts_ms(self) -> float:
        return self.start_pts_ms + self.duration_ms

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.lag_type.value, self.f_start, self.f_end)

    def sort_key(self) -> tuple[int, int, int]:
        return (self.f_start, self.lag_type.order, self.f_end)


@dataclass(frozen=True)
class DetectionConfig:
    frame_budget_ms: float = 16.7
    jank_lag_ms: float = 100.0
    frozen_lag_ms: float = 100.0
    load_lag_ms: float = 1000.0
    ssim_threshold: float = 0.98
    min_placeholder_area_fraction: float = 0.01

    def __post_init__(self) -> None:
        for name in ("frame_budget_ms", "jank_lag_ms", "frozen_lag_ms", "load_lag_ms"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be a positive number, got {value!r}")
        if not self.frame_budget_ms < self.jank_lag_ms:
            raise ConfigError("frame_budget_ms must be below jank_lag_ms")
        if not 0.0 < self.ssim_threshold < 1.0:
            raise ConfigError("ssim_threshold must lie in (0, 1)")
        if not 0.0 <= self.min_placeholder_area_fraction <= 1.0:
            raise ConfigError("min_placeholder_area_fraction must lie in [0, 1]")

    def lag_threshold(self, lag_type: LagType) -> float:
        return {
            LagType.JANKY: self.jank_lag_ms,
            LagType.LOADING: self.load_lag_ms,
            LagType.FROZEN: self.frozen_lag_ms,
        }[lag_type]


@dataclass(frozen=True)
class SeverityConfig:
    t_janky_ms: float = 200.0
    t_load_ms: float = 1500.0
    t_frozen_ms: float = 300.0

    def validate_against(self, cfg: DetectionConfig) -> None:
        if self.t_janky_ms < cfg.jank_lag_ms:
            raise ConfigError("t_janky_ms must be >= jank_lag_ms")
        if self.t_load_ms < cfg.load_lag_ms:
            raise ConfigError("t_load_ms must be >= load_lag_ms")
        if self.t_frozen_ms < cfg.frozen_lag_ms:
            raise ConfigError("t_frozen_ms must be >= frozen_lag_ms")

    def threshold(self, lag_type: LagType) -> float:
        return {
            LagType.JANKY: self.t_janky_ms,
            LagType.LOADING: self.t_load_ms,
            LagType.FROZEN: self.t_frozen_ms,
        }[lag_type]


def exceeds(value_ms: float, threshold_ms: float) -> bool:
    """Strict ``value > threshold`` with the shared millisecond tolerance."""
    return value_ms - threshold_ms > PTS_TOL_MS


def _shape_of(ref: Any) -> tuple[int, int] | None:
    if isinstance(ref, np.ndarray):
        return ref.shape[1], ref.shape[0]
    return None


def make_screencast(
    frames: Sequence[tuple[float, ImageRef]],
    width: int,
    height: int,
    source_id: str = "",
    root: Path | None = None,
) -> Screencast:
    """Validate ``(pts_ms, image_ref)`` pairs and build a Screencast.

    In-memory images are checked against ``width`` x ``height``; file
    references are checked by the loader that decodes them.
    """
    if len(frames) < 2:
        raise TooFewFrames(f"a screencast needs at least 2 frames, got {len(frames)}")
    out = []
    prev = -math.inf
    for i, (pts, ref) in enumerate(frames):
        pts = float(pts)
        if not math.isfinite(pts) or pts < 0:
            raise NonMonotonicPts(f"frame {i}: pts {pts!r} is not a finite non-negative value")
        if pts <= prev:
            raise NonMonotonicPts(f"frame {i}: pts {pts} <= previous pts {prev}")
        shape = _shape_of(ref)
        if shape is not None and shape != (width, height):
            raise DimensionMismatch(
                f"frame {i}: image is {shape[0]}x{shape[1]}, expected {width}x{height}"
            )
        out.append(Frame(i, pts, ref))
        prev = pts
    return Screencast(tuple(out), int(width), int(height), source_id, root)


def interval_duration(cast: Screencast, f_start: int, f_end: int) -> float:
    n = len(cast.frames)
    for idx in (f_start, f_end):
        if not 0 <= idx < n:
            raise IndexOutOfRange(f"frame index {idx} outside [0, {n})")
    if f_start >= f_end:
        raise InvalidInterval(f"f_start {f_start} must precede f_end {f_end}")
    return cast.frames[f_end].pts_ms - cast.frames[f_start].pts_ms

"""Rule-based classification of janky, long-loading and frozen lags."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .ingest import TimelineMode, normalize_timeline, read_image
from .model import (
    DetectionConfig,
    LagInterval,
    LagType,
    Screencast,
    SeverityConfig,
    StaticRun,
    exceeds,
)
from .placeholder import DetectorSpec, PlaceholderDetector, has_placeholder
from .segmentation import extract_static_runs
from .similarity import PairScore, SsimParams, pairwise_scores


@dataclass(frozen=True)
class Jank:
    """A rendered-frame gap above the frame budget (not necessarily a lag)."""

    f_start: int
    f_end: int
    gap_ms: float


def detect_janky(cast: Screencast, cfg: DetectionConfig = DetectionConfig()) -> tuple[list[Jank], list[LagInterval]]:
    pts = cast.pts
    gaps = np.diff(pts)
    janks, lags = [], []
    for i, gap in enumerate(gaps):
        gap = float(gap)
        if not exceeds(gap, cfg.frame_budget_ms):
            continue
        janks.append(Jank(i, i + 1, gap))
        if exceeds(gap, cfg.jank_lag_ms):
            lags.append(
                LagInterval(
                    LagType.JANKY,
                    i,
                    i + 1,
                    float(pts[i]),
                    gap,
                    evidence=f"no new frame for {gap:.1f} ms (budget {cfg.frame_budget_ms} ms)",
                )
            )
    return janks, lags


def classify_static_run(
    cast: Screencast,
    run: StaticRun,
    first_frame_placeholder: tuple[bool, float],
    cfg: DetectionConfig = DetectionConfig(),
) -> LagInterval | None:
    present, fraction = first_frame_placeholder
    duration = cast.frames[run.f_end].pts_ms - cast.frames[run.f_start].pts_ms
    start_pts = cast.frames[run.f_start].pts_ms
    frames = run.f_end - run.f_start + 1
    if present:
        if exceeds(duration, cfg.load_lag_ms):
            return LagInterval(
                LagType.LOADING,
                run.f_start,
                run.f_end,
                start_pts,
                duration,
                evidence=(
                    f"placeholder covers {fraction:.1%} of the screen; "
                    f"unchanged for {frames} frames ({duration:.1f} ms)"
                ),
                area_fraction=fraction,
            )
        return None
    if exceeds(duration, cfg.frozen_lag_ms):
        return LagInterval(
            LagType.FROZEN,
            run.f_start,
            run.f_end,
            start_pts,
            duration,
            evidence=f"no placeholder; unchanged for {frames} frames ({duration:.1f} ms)",
        )
    return None


@dataclass
class DetectionResult:
    """Everything the pipeline computed, for reporting and diagnostics."""

    cast: Screencast
    scores: list[PairScore]
    runs: list[StaticRun]
    janks: list[Jank]
    lags: list[LagInterval]
    placeholders: dict[int, tuple[bool, float]] = field(default_factory=dict)


def sort_lags(lags: Sequence[LagInterval]) -> list[LagInterval]:
    return sorted(lags, key=LagInterval.sort_key)


def run_pipeline(
    cast: Screencast,
    cfg: DetectionConfig = DetectionConfig(),
    detector: DetectorSpec | PlaceholderDetector | None = None,
    ssim_params: SsimParams = SsimParams(),
    timeline: TimelineMode = TimelineMode.VARIABLE,
    loader: Callable[[object], np.ndarray] | None = None,
    workers: int = 1,
) -> DetectionResult:
    """normalize -> score pairs -> static runs -> placeholder check -> rules."""
    cast = normalize_timeline(cast, timeline)
    scores = pairwise_scores(cast, ssim_params, loader=loader, workers=workers)
    runs = extract_static_runs(scores, cfg.ssim_threshold, cast.pts)

    owned = not isinstance(detector, PlaceholderDetector)
    det = PlaceholderDetector(detector or DetectorSpec()) if owned else detector
    lags: list[LagInterval] = []
    placeholders = {}
    try:
        for run in runs:
            # Neither rule can fire at or below both duration thresholds.
            if not (exceeds(run.duration_ms, cfg.frozen_lag_ms) or exceeds(run.duration_ms, cfg.load_lag_ms)):
                continue
            ref = cast.frames[run.f_start].image_ref
            regions = det.detect(ref, (loader or read_image)(ref))
            verdict = has_placeholder(regions, cast.frame_area, cfg.min_placeholder_area_fraction)
            placeholders[run.f_start] = verdict
            lag = classify_static_run(cast, run, verdict, cfg)
            if lag is not None:
                lags.append(lag)
    finally:
        if owned:
            det.close()

    janks, janky_lags = detect_janky(cast, cfg)
    return DetectionResult(cast, scores, runs, janks, sort_lags(janky_lags + lags), placeholders)


def detect_all(
    cast: Screencast,
    cfg: DetectionConfig = DetectionConfig(),
    detector: DetectorSpec | PlaceholderDetector | None = None,
    **kwargs,
) -> list[LagInterval]:
    return run_pipeline(cast, cfg, detector, **kwargs).lags


def mark_severity(lags: Sequence[LagInterval], sev: SeverityConfig = SeverityConfig()) -> list[LagInterval]:
    return [replace(lag, severe=exceeds(lag.duration_ms, sev.threshold(lag.lag_type))) for lag in lags]

"""Deterministic synthetic screencasts with known lag ground truth.

A generated cast shows a feed that scrolls continuously. Injected events
interrupt it:

* ``jank_gap``: frames are dropped, leaving a hole in the PTS timeline.
* ``freeze``: the feed stops and identical frames keep arriving.
* ``loading_stall``: the feed stops with gray skeleton boxes on screen.
* ``scroll_motion``: a user scroll (faster motion plus a trace event).

Events are snapped to the nominal frame grid. Ground truth is derived by
applying the detection thresholds to the final timeline, so an event too
short to count as a lag produces no annotation.
"""

from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
from PIL import Image

from ..ingest import FrameManifest, write_manifest
from ..model import DetectionConfig, LagType, LagwatchError, Screencast, exceeds, make_screencast
from ..prioritize import EventKind, InteractionEvent, InteractionTrace, write_trace
from .metrics import Annotation, GroundTruth, write_truth

PLACEHOLDER_LUMA = 224
DEFAULT_PLACEHOLDER_BOXES = ((0.06, 0.22, 0.88, 0.30), (0.06, 0.58, 0.60, 0.05), (0.06, 0.66, 0.80, 0.05))
STATUS_BAR_PX = 20


class SpecError(LagwatchError):
    pass


class EventType(str, enum.Enum):
    JANK_GAP = "jank_gap"
    LOADING_STALL = "loading_stall"
    FREEZE = "freeze"
    SCROLL_MOTION = "scroll_motion"


@dataclass(frozen=True)
class SyntheticEvent:
    kind: EventType
    start_ms: float
    duration_ms: float
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", EventType(self.kind))
        object.__setattr__(self, "params", dict(self.params))


@dataclass(frozen=True)
class SyntheticSpec:
    width: int = 270
    height: int = 600
    fps: float = 60.0
    duration_ms: float = 2000.0
    events: tuple[SyntheticEvent, ...] = ()
    noise: float = 0.0
    pts_jitter_ms: float = 0.0
    scroll_px_per_s: float = 900.0
    seed: int = 0
    source_id: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "events",
            tuple(e if isinstance(e, SyntheticEvent) else SyntheticEvent(**e) for e in self.events),
        )

    @property
    def period_ms(self) -> float:
        return 1000.0 / self.fps

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["events"] = [
            {"kind": e.kind.value, "start_ms": e.start_ms, "duration_ms": e.duration_ms, "params": dict(e.params)}
            for e in self.events
        ]
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SyntheticSpec:
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise SpecError(f"invalid synthetic spec: {exc}") from exc


@dataclass
class SyntheticCast:
    cast: Screencast
    truth: GroundTruth
    trace: InteractionTrace
    spec: SyntheticSpec


@dataclass(frozen=True)
class _Span:
    event: SyntheticEvent
    first: int  # nominal frame index
    count: int  # frames held (freeze / stall) or dropped (jank)


def _validate(spec: SyntheticSpec) -> tuple[int, list[_Span]]:
    if spec.width < 32 or spec.height < 64:
        raise SpecError("frame size must be at least 32x64")
    if spec.fps <= 0 or spec.duration_ms <= 0:
        raise SpecError("fps and duration_ms must be positive")
    period = spec.period_ms
    if not 0 <= spec.pts_jitter_ms < period / 4:
        raise SpecError("pts_jitter_ms must lie in [0, period/4)")
    if not 0 <= spec.noise <= 64:
        raise SpecError("noise must lie in [0, 64]")
    n_nominal = int(np.floor(spec.duration_ms / period + 1e-9)) + 1

    spans = []
    for event in spec.events:
        if event.duration_ms <= 0:
            raise SpecError(f"{event.kind.value} at {event.start_ms} ms has non-positive duration")
        first = int(round(event.start_ms / period))
        count = max(1, int(round(event.duration_ms / period)))
        if first < 1 or first + count + 1 >= n_nominal:
            raise SpecError(f"{event.kind.value} at {event.start_ms} ms does not fit inside the cast")
        if event.kind is EventType.LOADING_STALL:
            for box in event.params.get("boxes", DEFAULT_PLACEHOLDER_BOXES):
                x, y, w, h = box
                if w <= 0 or h <= 0 or x < 0 or y < 0 or x + w > 1 or y + h > 1:
                    raise SpecError(f"placeholder box {box} must lie inside the unit frame")
        spans.append(_Span(event, first, count))

    blocking = sorted((s for s in spans if s.event.kind is not EventType.SCROLL_MOTION), key=lambda s: s.first)
    for a, b in zip(blocking, blocking[1:]):
        # Two frames of motion between events keep their static runs apart.
        if b.first < a.first + a.count + 2:
            raise SpecError(
                f"{a.event.kind.value} at {a.event.start_ms} ms overlaps "
                f"{b.event.kind.value} at {b.event.start_ms} ms"
            )
    return n_nominal, spans


def _feed_texture(width: int, length: int, rng: np.random.Generator) -> np.ndarray:
    """A tall strip of cards: colored headers, textured images, text lines."""
    tex = np.full((length, width, 3), 255, dtype=np.uint8)
    y = 0
    margin = max(4, width // 30)
    while y < length:
        card_h = int(rng.integers(150, 260))
        top = y + 4
        # Header band with avatar and title line.
        hue = rng.integers(30, 160, size=3)
        tex[top:top + 28, margin:width - margin] = hue
        tex[top + 6:top + 22, margin + 6:margin + 22] = 255 - hue
        tex[top + 10:top + 16, margin + 30:margin + 30 + int(rng.integers(width // 4, width // 2))] = 20
        # Image: smooth gradient plus blotches, luma kept below the gray band.
        img_top, img_h = top + 34, int(card_h * 0.45)
        img_w = width - 2 * margin
        yy, xx = np.mgrid[0:img_h, 0:img_w]
        base = rng.uniform(20, 140, size=3)
        slope = rng.uniform(-0.4, 0.4, size=(2, 3))
        img = base + yy[..., None] * slope[0] + xx[..., None] * slope[1]
        for _ in range(6):
            cy, cx = rng.integers(0, img_h), rng.integers(0, img_w)
            r = int(rng.integers(6, 30))
            mask = (yy - cy) ** 2 + (xx - cx) ** 2 < r * r
            img[mask] = rng.uniform(0, 160, size=3)
        img += rng.normal(0, 5, size=img.shape)
        tex[img_top:img_top + img_h, margin:margin + img_w] = np.clip(img, 0, 170)[: max(0, min(img_h, length - img_top))]
        # Text lines.
        ty = img_top + img_h + 8
        while ty + 6 < top + card_h - 6 and ty + 6 < length:
            line_w = int(rng.integers(width // 3, width - 2 * margin))
            tex[ty:ty + 4, margin:margin + line_w] = int(rng.integers(30, 90))
            ty += 9
        y = top + card_h
    return tex


def _status_bar(width: int) -> np.ndarray:
    bar = np.full((STATUS_BAR_PX, width, 3), 30, dtype=np.uint8)
    bar[6:14, 8:40] = 255
    bar[6:14, width - 40:width - 8] = 255
    return bar


def generate_synthetic(spec: SyntheticSpec, cfg: DetectionConfig = DetectionConfig()) -> SyntheticCast:
    """Render frames in memory and derive ground truth under ``cfg``."""
    n_nominal, spans = _validate(spec)
    period = spec.period_ms
    rng = np.random.default_rng(spec.seed)

    held = np.zeros(n_nominal, dtype=bool)  # content does not advance into this frame
    dropped = np.zeros(n_nominal, dtype=bool)
    speed = np.full(n_nominal, spec.scroll_px_per_s)
    boxes_at: dict[int, Sequence[Sequence[float]]] = {}
    for span in spans:
        frames = slice(span.first, span.first + span.count + 1)
        kind = span.event.kind
        if kind is EventType.JANK_GAP:
            dropped[span.first + 1:span.first + span.count] = True
        elif kind in (EventType.FREEZE, EventType.LOADING_STALL):
            held[span.first + 1:span.first + span.count + 1] = True
            if kind is EventType.LOADING_STALL:
                boxes = span.event.params.get("boxes", DEFAULT_PLACEHOLDER_BOXES)
                for k in range(span.first, span.first + span.count + 1):
                    boxes_at[k] = boxes
        else:
            speed[frames] *= float(span.event.params.get("speed_factor", 2.0))

    step = np.where(held, 0.0, speed * period / 1000.0)
    step[0] = 0.0
    offsets = np.round(np.cumsum(step)).astype(int)
    view_h = spec.height - STATUS_BAR_PX
    texture = _feed_texture(spec.width, int(offsets[-1]) + view_h + 1, rng)
    bar = _status_bar(spec.width)

    nominal_pts = np.arange(n_nominal) * period
    jitter = rng.uniform(-spec.pts_jitter_ms, spec.pts_jitter_ms, n_nominal) if spec.pts_jitter_ms else np.zeros(n_nominal)
    jitter[0] = 0.0
    pts = nominal_pts + jitter

    noise_rng = np.random.default_rng([spec.seed, 1])
    kept = np.flatnonzero(~dropped)
    frames = []
    for k in kept:
        frame = np.empty((spec.height, spec.width, 3), dtype=np.uint8)
        frame[:STATUS_BAR_PX] = bar
        frame[STATUS_BAR_PX:] = texture[offsets[k]:offsets[k] + view_h]
        for bx, by, bw, bh in boxes_at.get(k, ()):
            x0, y0 = int(bx * spec.width), int(by * spec.height)
            frame[y0:y0 + int(bh * spec.height), x0:x0 + int(bw * spec.width)] = PLACEHOLDER_LUMA
        if spec.noise > 0:
            jit = noise_rng.uniform(-spec.noise, spec.noise, frame.shape)
            frame = np.clip(np.round(frame + jit), 0, 255).astype(np.uint8)
        frames.append((float(pts[k]), frame))
    cast = make_screencast(frames, spec.width, spec.height, spec.source_id or f"synthetic-{spec.seed}")

    index_of = {int(k): i for i, k in enumerate(kept)}
    annotations = []
    events = []
    for span in spans:
        kind = span.event.kind
        if kind is EventType.SCROLL_MOTION:
            events.append(InteractionEvent(float(nominal_pts[span.first]), EventKind.SCROLL))
            continue
        if kind is EventType.JANK_GAP:
            a, b = index_of[span.first], index_of[span.first + span.count]
            if exceeds(cast.frames[b].pts_ms - cast.frames[a].pts_ms, cfg.jank_lag_ms):
                annotations.append(Annotation(LagType.JANKY, a, b))
            continue
        a, b = index_of[span.first], index_of[span.first + span.count]
        duration = cast.frames[b].pts_ms - cast.frames[a].pts_ms
        if kind is EventType.LOADING_STALL and exceeds(duration, cfg.load_lag_ms):
            annotations.append(Annotation(LagType.LOADING, a, b))
        elif kind is EventType.FREEZE and exceeds(duration, cfg.frozen_lag_ms):
            annotations.append(Annotation(LagType.FROZEN, a, b))
    annotations.sort(key=lambda a: (a.f_start, a.lag_type.order))
    events.sort(key=lambda e: e.pts_ms)
    return SyntheticCast(cast, GroundTruth(tuple(annotations)), InteractionTrace(tuple(events)), spec)


def write_synthetic(result: SyntheticCast, out_dir: str | Path) -> Path:
    """Write frames, ``manifest.txt``, ``truth.json``, ``trace.txt`` and ``spec.json``."""
    out_dir = Path(out_dir).resolve()
    frames_dir = out_dir / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for frame in result.cast.frames:
        path = frames_dir / f"frame_{frame.index:06d}.png"
        Image.fromarray(frame.image_ref).save(path, compress_level=1)
        entries.append((path, frame.pts_ms))
    cast = result.cast
    manifest = write_manifest(
        FrameManifest(entries, cast.width_px, cast.height_px, cast.source_id, out_dir),
        out_dir / "manifest.txt",
    )
    write_truth(result.truth, out_dir / "truth.json")
    write_trace(result.trace, out_dir / "trace.txt")
    (out_dir / "spec.json").write_text(json.dumps(result.spec.to_dict(), indent=2) + "\n", encoding="utf-8")
    return manifest


_TARGETS = {
    LagType.JANKY: (EventType.JANK_GAP, (110.0, 400.0), (30.0, 80.0)),
    LagType.LOADING: (EventType.LOADING_STALL, (1050.0, 1600.0), (400.0, 800.0)),
    LagType.FROZEN: (EventType.FREEZE, (150.0, 700.0), (35.0, 80.0)),
}


def corpus_spec(seed: int, noise: float = 0.0, pts_jitter_ms: float = 0.0, **overrides: Any) -> SyntheticSpec:
    """One member of the standard corpus: seed // 10 picks the featured lag type.

    Seeds 0-9 feature janky lags, 10-19 loading, 20-29 frozen (wrapping for
    larger seeds). Each cast carries 1-3 real lags (1-2 for loading) of that type, one decoy
    event that stays under its threshold, and one user scroll.
    """
    lag_type = list(LagType)[(seed // 10) % 3]
    kind, (lo, hi), (dlo, dhi) = _TARGETS[lag_type]
    rng = np.random.default_rng(10_000 + seed)
    n_real = int(rng.integers(1, 3 if lag_type is LagType.LOADING else 4))
    durations = [(kind, float(rng.uniform(lo, hi))) for _ in range(n_real)]
    durations.insert(int(rng.integers(0, len(durations) + 1)), (kind, float(rng.uniform(dlo, dhi))))
    t = float(rng.uniform(250, 400))
    events = []
    scroll_at = int(rng.integers(0, len(durations)))
    for i, (k, d) in enumerate(durations):
        if i == scroll_at:
            events.append(SyntheticEvent(EventType.SCROLL_MOTION, max(t - 200.0, 50.0), 150.0, {"speed_factor": 1.5}))
        events.append(SyntheticEvent(k, t, d))
        t += d + float(rng.uniform(200, 350))
    params = dict(
        duration_ms=t + 100.0,
        events=tuple(events),
        noise=noise,
        pts_jitter_ms=pts_jitter_ms,
        seed=seed,
        source_id=f"corpus-{seed:02d}-{lag_type.value}",
    )
    params.update(overrides)
    return SyntheticSpec(**params)

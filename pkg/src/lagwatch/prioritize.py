"""Ranking severe lags by frequency, duration, interaction and visual context."""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .model import LagInterval, LagType, LagwatchError
from .ingest import ParseError


class BadWeights(LagwatchError):
    pass


class EventKind(str, enum.Enum):
    TAP = "tap"
    SCROLL = "scroll"
    SWIPE = "swipe"
    KEY = "key"
    OTHER = "other"


@dataclass(frozen=True)
class InteractionEvent:
    pts_ms: float
    kind: EventKind = EventKind.OTHER


@dataclass(frozen=True)
class InteractionTrace:
    events: tuple[InteractionEvent, ...] = ()
    window_ms: float = 500.0

    def __post_init__(self) -> None:
        pts = [e.pts_ms for e in self.events]
        if any(b < a for a, b in zip(pts, pts[1:])):
            raise ValueError("interaction events must be in non-decreasing pts order")

    def adjacent_event(self, pts_ms: float) -> InteractionEvent | None:
        """Latest event whose window covers ``pts_ms``."""
        hit = None
        for event in self.events:
            if event.pts_ms > pts_ms:
                break
            if pts_ms <= event.pts_ms + self.window_ms:
                hit = event
        return hit


def load_trace(path: str | Path, window_ms: float = 500.0) -> InteractionTrace:
    """Read ``<pts_ms>,<kind>`` lines."""
    events = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            pts, kind = line.split(",", 1)
            events.append(InteractionEvent(float(pts), EventKind(kind.strip())))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: bad trace line {line!r}") from exc
    return InteractionTrace(tuple(events), window_ms)


def write_trace(trace: InteractionTrace, path: str | Path) -> Path:
    path = Path(path)
    path.write_text("".join(f"{e.pts_ms!r},{e.kind.value}\n" for e in trace.events), encoding="utf-8")
    return path


def interaction_adjacent(lag: LagInterval, trace: InteractionTrace | None) -> bool:
    return trace is not None and trace.adjacent_event(lag.start_pts_ms) is not None


@dataclass(frozen=True)
class Factors:
    frequency: float
    duration: float
    interaction: float
    visual: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.frequency, self.duration, self.interaction, self.visual)


@dataclass(frozen=True)
class Weights:
    frequency: float = 0.25
    duration: float = 0.25
    interaction: float = 0.25
    visual: float = 0.25

    def __post_init__(self) -> None:
        values = self.as_tuple()
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise BadWeights(f"weights must be finite and non-negative: {values}")
        if abs(sum(values) - 1.0) > 1e-9:
            raise BadWeights(f"weights must sum to 1, got {sum(values)}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.frequency, self.duration, self.interaction, self.visual)


@dataclass(frozen=True)
class RankedLag:
    lag: LagInterval
    score: float
    factors: Factors
    rank: int
    interaction_kind: EventKind | None = field(default=None)


def score_of(factors: Factors, weights: Weights) -> float:
    return sum(f * w for f, w in zip(factors.as_tuple(), weights.as_tuple()))


def order_key(lag: LagInterval, score: float) -> tuple[float, int, int, int]:
    return (-score, lag.f_start, lag.lag_type.order, lag.f_end)


def compute_factors(
    lags: Sequence[LagInterval],
    trace: InteractionTrace | None = None,
    area_fractions: Mapping[LagInterval, float] | None = None,
) -> list[Factors]:
    if not lags:
        return []
    counts = Counter(lag.lag_type for lag in lags)
    longest = max(lag.duration_ms for lag in lags)
    out = []
    for lag in lags:
        if lag.lag_type is LagType.LOADING:
            visual = (area_fractions or {}).get(lag, lag.area_fraction)
        else:
            visual = 1.0
        out.append(
            Factors(
                frequency=counts[lag.lag_type] / len(lags),
                duration=lag.duration_ms / longest if longest > 0 else 1.0,
                interaction=1.0 if interaction_adjacent(lag, trace) else 0.0,
                visual=min(max(float(visual), 0.0), 1.0),
            )
        )
    return out


def rank(
    lags: Sequence[LagInterval],
    trace: InteractionTrace | None = None,
    area_fractions: Mapping[LagInterval, float] | None = None,
    weights: Weights | Sequence[float] = Weights(),
) -> list[RankedLag]:
    """Score and order severe lags, best first.

    Loading lags take their visual factor from ``area_fractions`` when given,
    otherwise from the lag's own ``area_fraction``. Ties go to the earlier
    start frame, then janky < loading < frozen.
    """
    if not isinstance(weights, Weights):
        try:
            weights = Weights(*weights)
        except TypeError as exc:
            raise BadWeights("expected four weights") from exc
    factors = compute_factors(lags, trace, area_fractions)
    scored = [(lag, f, score_of(f, weights)) for lag, f in zip(lags, factors)]
    scored.sort(key=lambda item: order_key(item[0], item[2]))
    ranked = []
    for position, (lag, f, score) in enumerate(scored, start=1):
        event = trace.adjacent_event(lag.start_pts_ms) if trace is not None else None
        ranked.append(RankedLag(lag, score, f, position, event.kind if event else None))
    return ranked

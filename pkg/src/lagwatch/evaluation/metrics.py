"""Exact-interval matching and precision / recall / F1."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from ..ingest import ParseError
from ..model import LagInterval, LagType

LagKey = tuple[str, int, int]


@dataclass(frozen=True)
class Annotation:
    lag_type: LagType
    f_start: int
    f_end: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "lag_type", LagType(self.lag_type))
        if self.f_start >= self.f_end:
            raise ValueError(f"annotation [{self.f_start}, {self.f_end}] is empty")

    @property
    def key(self) -> LagKey:
        return (self.lag_type.value, self.f_start, self.f_end)


@dataclass(frozen=True)
class GroundTruth:
    annotations: tuple[Annotation, ...] = ()

    def __post_init__(self) -> None:
        keys = [a.key for a in self.annotations]
        if len(set(keys)) != len(keys):
            raise ValueError("ground truth contains duplicate annotations")

    def to_json(self) -> str:
        rows = [{"type": a.lag_type.value, "f_start": a.f_start, "f_end": a.f_end} for a in self.annotations]
        return json.dumps(rows, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> GroundTruth:
        try:
            rows = json.loads(text)
            return cls(tuple(Annotation(r["type"], int(r["f_start"]), int(r["f_end"])) for r in rows))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad ground-truth document: {exc}") from exc


def load_truth(path: str | Path) -> GroundTruth:
    return GroundTruth.from_json(Path(path).read_text(encoding="utf-8"))


def write_truth(truth: GroundTruth, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(truth.to_json(), encoding="utf-8")
    return path


@dataclass(frozen=True)
class MatchResult:
    tp: list[LagKey]
    fp: list[LagKey]
    fn: list[LagKey]


def _key(item: LagInterval | Annotation | LagKey) -> LagKey:
    if isinstance(item, tuple):
        return item
    return item.key


def match_lags(
    detected: Iterable[LagInterval | LagKey], truth: GroundTruth | Iterable[Annotation]
) -> MatchResult:
    """Type-aware, exact-index, one-to-one matching."""
    annotations = truth.annotations if isinstance(truth, GroundTruth) else tuple(truth)
    available = Counter(a.key for a in annotations)
    tp, fp = [], []
    for item in detected:
        key = _key(item)
        if available[key] > 0:
            available[key] -= 1
            tp.append(key)
        else:
            fp.append(key)
    fn = [key for key, count in sorted(available.items()) for _ in range(count)]
    return MatchResult(tp, fp, fn)


@dataclass(frozen=True)
class MetricsRow:
    """Counts and scores; ``None`` marks an undefined ratio (zero denominator)."""

    tp: int
    fp: int
    fn: int
    precision: float | None
    recall: float | None
    f1: float | None

    def as_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "fn": self.fn,
            "precision": self.precision, "recall": self.recall, "f1": self.f1,
        }


def metrics(tp: int, fp: int, fn: int) -> MetricsRow:
    if min(tp, fp, fn) < 0:
        raise ValueError("counts must be non-negative")
    precision = tp / (tp + fp) if tp + fp else None
    recall = tp / (tp + fn) if tp + fn else None
    if precision is None or recall is None:
        f1 = None
    elif precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return MetricsRow(tp, fp, fn, precision, recall, f1)


def _mean_defined(values: Sequence[float | None]) -> float | None:
    defined = [v for v in values if v is not None]
    return sum(defined) / len(defined) if defined else None


@dataclass(frozen=True)
class EvalTable:
    """Per-type rows, their macro average, and pooled (micro) counts."""

    rows: dict[str, MetricsRow]
    overall: MetricsRow

    @property
    def average(self) -> dict[str, float | None]:
        rows = list(self.rows.values())
        return {
            "precision": _mean_defined([r.precision for r in rows]),
            "recall": _mean_defined([r.recall for r in rows]),
            "f1": _mean_defined([r.f1 for r in rows]),
        }

    def as_dict(self) -> dict:
        return {
            "per_type": {name: row.as_dict() for name, row in self.rows.items()},
            "average": self.average,
            "overall": self.overall.as_dict(),
        }

    def render(self) -> str:
        def fmt(v: float | None) -> str:
            return "   n/a" if v is None else f"{v:6.2f}"

        lines = [f"{'type':<10}{'P':>7}{'R':>7}{'F1':>7}{'TP':>6}{'FP':>6}{'FN':>6}"]
        for name, row in self.rows.items():
            lines.append(
                f"{name:<10} {fmt(row.precision)} {fmt(row.recall)} {fmt(row.f1)}"
                f"{row.tp:>6}{row.fp:>6}{row.fn:>6}"
            )
        avg = self.average
        lines.append(f"{'average':<10} {fmt(avg['precision'])} {fmt(avg['recall'])} {fmt(avg['f1'])}")
        return "\n".join(lines)


def tabulate(results: Sequence[MatchResult]) -> EvalTable:
    counts = {t.value: Counter() for t in LagType}
    for res in results:
        for bucket, keys in (("tp", res.tp), ("fp", res.fp), ("fn", res.fn)):
            for key in keys:
                counts[key[0]][bucket] += 1
    rows = {name: metrics(c["tp"], c["fp"], c["fn"]) for name, c in counts.items()}
    overall = metrics(*(sum(getattr(r, b) for r in rows.values()) for b in ("tp", "fp", "fn")))
    return EvalTable(rows, overall)

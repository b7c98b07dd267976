"""Bug-report artifacts: JSON results, a self-contained HTML page, CI exit codes."""

from __future__ import annotations

import base64
import enum
import html
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
from PIL import Image

from . import __version__
from .ingest import MissingImage, read_image
from .model import LagInterval, LagType, LagwatchError, Screencast
from .prioritize import InteractionTrace, RankedLag, Weights, rank

THUMB_MAX_DIM = 270
STRIP_MAX_FRAMES = 8

EXIT_OK = 0
EXIT_TOOL_ERROR = 1
EXIT_GATE_FAILED = 2


class ReportError(LagwatchError):
    pass


class MissingFrameImage(ReportError):
    pass


class Policy(str, enum.Enum):
    NEVER_FAIL = "never-fail"
    FAIL_ON_SEVERE = "fail-on-severe"
    FAIL_ON_ANY = "fail-on-any"

    @classmethod
    def parse(cls, value: str | Policy) -> Policy:
        if isinstance(value, Policy):
            return value
        return cls(value.replace("_", "-"))


@dataclass
class LagEntry:
    type: str
    rank: int
    severe: bool
    f_start: int
    f_end: int
    start_pts_ms: float
    end_pts_ms: float
    duration_ms: float
    score: float
    factors: dict[str, float]
    frequency: int
    interaction: str | None
    area_fraction: float
    evidence: str
    frames: list[str]
    snippet: dict[str, float]


@dataclass
class AnalysisReport:
    source: str
    tool_version: str
    config: dict[str, Any]
    lags: list[LagEntry] = field(default_factory=list)
    frame_count: int = 0
    metrics: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        if out["metrics"] is None:
            del out["metrics"]
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> AnalysisReport:
        try:
            return cls(
                source=data["source"],
                tool_version=data["tool_version"],
                config=data["config"],
                lags=[LagEntry(**entry) for entry in data["lags"]],
                frame_count=data.get("frame_count", 0),
                metrics=data.get("metrics"),
            )
        except (KeyError, TypeError) as exc:
            raise ReportError(f"not a lag report: {exc}") from exc

    @property
    def any_severe(self) -> bool:
        return any(entry.severe for entry in self.lags)


def strip_indices(f_start: int, f_end: int, max_frames: int = STRIP_MAX_FRAMES) -> list[int]:
    """Up to ``max_frames`` evenly spaced frame indices, endpoints included."""
    count = min(max_frames, f_end - f_start + 1)
    return sorted({int(round(v)) for v in np.linspace(f_start, f_end, count)})


def rank_lags(
    lags: Sequence[LagInterval],
    trace: InteractionTrace | None = None,
    weights: Weights = Weights(),
) -> list[RankedLag]:
    """Severe lags ranked first, then the remaining lags ranked among themselves."""
    severe = rank([lag for lag in lags if lag.severe], trace, weights=weights)
    minor = rank([lag for lag in lags if not lag.severe], trace, weights=weights)
    offset = len(severe)
    return severe + [
        RankedLag(r.lag, r.score, r.factors, r.rank + offset, r.interaction_kind) for r in minor
    ]


def build_report(
    cast: Screencast,
    ranked: Sequence[RankedLag],
    config: Mapping[str, Any],
    metrics: Mapping[str, Any] | None = None,
) -> AnalysisReport:
    n = len(cast.frames)
    type_counts = {t: sum(1 for r in ranked if r.lag.lag_type is t) for t in LagType}
    entries = []
    for r in sorted(ranked, key=lambda item: item.rank):
        lag = r.lag
        if not 0 <= lag.f_start < lag.f_end < n:
            raise ReportError(f"lag [{lag.f_start}, {lag.f_end}] outside a {n}-frame screencast")
        start_pts = cast.frames[lag.f_start].pts_ms
        end_pts = cast.frames[lag.f_end].pts_ms
        entries.append(
            LagEntry(
                type=lag.lag_type.value,
                rank=r.rank,
                severe=lag.severe,
                f_start=lag.f_start,
                f_end=lag.f_end,
                start_pts_ms=start_pts,
                end_pts_ms=end_pts,
                duration_ms=lag.duration_ms,
                score=r.score,
                factors=asdict(r.factors),
                frequency=type_counts[lag.lag_type],
                interaction=r.interaction_kind.value if r.interaction_kind else None,
                area_fraction=lag.area_fraction,
                evidence=lag.evidence,
                frames=[cast.frame_label(i) for i in strip_indices(lag.f_start, lag.f_end)],
                snippet={"start_pts_ms": start_pts, "end_pts_ms": end_pts},
            )
        )
    return AnalysisReport(
        source=cast.source_id,
        tool_version=__version__,
        config=json.loads(json.dumps(config, default=_jsonable)),
        lags=entries,
        frame_count=n,
        metrics=dict(metrics) if metrics is not None else None,
    )


def _jsonable(value: Any) -> Any:
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, Path):
        return value.as_posix()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(report: AnalysisReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def emit_json(report: AnalysisReport, path: str | Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(report), encoding="utf-8")
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc}") from exc
    return path


def load_json(path: str | Path) -> AnalysisReport:
    return AnalysisReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _thumbnail_uri(pixels: np.ndarray) -> str:
    img = Image.fromarray(np.asarray(pixels, dtype=np.uint8))
    img.thumbnail((THUMB_MAX_DIM, THUMB_MAX_DIM), Image.Resampling.BILINEAR)
    buf = io.BytesIO()
    img.save(buf, format="PNG", optimize=False)
    return "data:image/png;base64," + base64.b64encode(buf.getvalue()).decode("ascii")


_PAGE_CSS = """
body { font-family: sans-serif; margin: 2em; color: #222; }
section.lag { border: 1px solid #ccc; border-radius: 6px; padding: 1em; margin-bottom: 1.5em; }
.badge { padding: 0.1em 0.5em; border-radius: 4px; color: #fff; font-size: 0.85em; }
.badge.severe { background: #c0392b; }
.badge.minor { background: #7f8c8d; }
.strip img, .ends img { margin-right: 4px; border: 1px solid #ddd; }
table.meta td { padding: 0.1em 0.8em 0.1em 0; }
.banner { padding: 1em; background: #eafaf1; border: 1px solid #2ecc71; }
"""


def emit_html(report: AnalysisReport, cast: Screencast, out_dir: str | Path) -> Path:
    """Write ``report.html`` with inline thumbnails; no external references."""
    out_dir = Path(out_dir)
    cache: dict[int, str] = {}

    def thumb(index: int) -> str:
        if index not in cache:
            if not 0 <= index < len(cast.frames):
                raise MissingFrameImage(f"frame {index} not in screencast")
            try:
                cache[index] = _thumbnail_uri(read_image(cast.frames[index].image_ref))
            except MissingImage as exc:
                raise MissingFrameImage(str(exc)) from exc
        return cache[index]

    def img(index: int, label: str) -> str:
        return f'<img src="{thumb(index)}" alt="{html.escape(label)}" title="{html.escape(label)}">'

    esc = html.escape
    parts = [
        "<!DOCTYPE html>",
        '<html lang="en"><head><meta charset="utf-8">',
        f"<title>GUI lag report: {esc(report.source)}</title>",
        f"<style>{_PAGE_CSS}</style></head><body>",
        f"<h1>GUI lag report: {esc(report.source)}</h1>",
        f"<p>{len(report.lags)} lag(s), {sum(e.severe for e in report.lags)} severe; "
        f"{report.frame_count} frames analyzed; lagwatch {esc(report.tool_version)}</p>",
    ]
    if not report.lags:
        parts.append('<div class="banner">No lags detected.</div>')
    for entry in report.lags:
        badge = "severe" if entry.severe else "minor"
        strip = strip_indices(entry.f_start, entry.f_end)
        rows = [
            ("Frames", f"[{entry.f_start}, {entry.f_end}]"),
            ("Start / end", f"{entry.start_pts_ms:.1f} ms / {entry.end_pts_ms:.1f} ms"),
            ("Duration", f"{entry.duration_ms:.1f} ms"),
            ("Score", f"{entry.score:.3f}"),
            ("Occurrences of this type", str(entry.frequency)),
            ("Interaction", entry.interaction or "none"),
            ("Evidence", entry.evidence),
        ]
        parts.append(f'<section class="lag" id="lag-{entry.rank}">')
        parts.append(
            f"<h2>#{entry.rank} {esc(entry.type)} "
            f'<span class="badge {badge}">{badge}</span></h2>'
        )
        parts.append('<table class="meta">')
        parts.extend(f"<tr><td>{esc(k)}</td><td>{esc(v)}</td></tr>" for k, v in rows)
        parts.append("</table>")
        parts.append('<div class="ends">')
        parts.append(img(entry.f_start, f"start frame {entry.f_start}"))
        parts.append(img(entry.f_end, f"end frame {entry.f_end}"))
        parts.append("</div>")
        parts.append('<div class="strip">')
        parts.extend(img(i, f"frame {i}") for i in strip)
        parts.append("</div></section>")
    parts.append("</body></html>\n")

    path = out_dir / "report.html"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(parts), encoding="utf-8")
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc}") from exc
    return path


def exit_code(report: AnalysisReport, policy: Policy | str) -> int:
    policy = Policy.parse(policy)
    if policy is Policy.FAIL_ON_SEVERE:
        return EXIT_GATE_FAILED if report.any_severe else EXIT_OK
    if policy is Policy.FAIL_ON_ANY:
        return EXIT_GATE_FAILED if report.lags else EXIT_OK
    return EXIT_OK

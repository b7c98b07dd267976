"""Running detection over a labeled corpus and scoring it."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from ..classify import detect_all, mark_severity
from ..ingest import TimelineMode, load_manifest
from ..model import DetectionConfig, LagInterval, LagwatchError, Screencast, SeverityConfig
from ..placeholder import DetectorSpec, PlaceholderDetector
from ..similarity import SsimParams
from .metrics import EvalTable, GroundTruth, MatchResult, load_truth, match_lags, tabulate
from .synthetic import SyntheticSpec, generate_synthetic, write_synthetic


class CorpusError(LagwatchError):
    pass


@dataclass
class CorpusItem:
    name: str
    cast: Screencast
    truth: GroundTruth


@dataclass
class CastResult:
    name: str
    detected: list[LagInterval]
    match: MatchResult


@dataclass
class EvalReport:
    table: EvalTable
    casts: list[CastResult] = field(default_factory=list)

    def as_dict(self) -> dict:
        out = self.table.as_dict()
        out["casts"] = [
            {
                "name": c.name,
                "tp": [list(k) for k in c.match.tp],
                "fp": [list(k) for k in c.match.fp],
                "fn": [list(k) for k in c.match.fn],
            }
            for c in self.casts
        ]
        return out


def _cast_dirs(corpus_dir: Path) -> list[Path]:
    if (corpus_dir / "manifest.txt").is_file():
        return [corpus_dir]
    return sorted(p for p in corpus_dir.iterdir() if p.is_dir() and (p / "manifest.txt").is_file())


def load_corpus(corpus_dir: str | Path) -> list[CorpusItem]:
    """Load every ``<dir>/manifest.txt`` + ``<dir>/truth.json`` pair, sorted by name."""
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        raise CorpusError(f"corpus directory not found: {corpus_dir}")
    dirs = _cast_dirs(corpus_dir)
    if not dirs:
        raise CorpusError(f"no manifest.txt found under {corpus_dir}")
    items = []
    for d in dirs:
        truth_path = d / "truth.json"
        if not truth_path.is_file():
            raise CorpusError(f"{d} has a manifest but no truth.json")
        items.append(CorpusItem(d.name, load_manifest(d / "manifest.txt"), load_truth(truth_path)))
    return items


def evaluate(
    items: Sequence[CorpusItem],
    cfg: DetectionConfig = DetectionConfig(),
    detector: DetectorSpec = DetectorSpec(),
    sev: SeverityConfig = SeverityConfig(),
    ssim_params: SsimParams = SsimParams(),
    timeline: TimelineMode = TimelineMode.VARIABLE,
) -> EvalReport:
    if not items:
        raise CorpusError("cannot evaluate an empty corpus")
    results = []
    with PlaceholderDetector(detector) as det:
        for item in items:
            lags = mark_severity(
                detect_all(item.cast, cfg, det, ssim_params=ssim_params, timeline=timeline), sev
            )
            results.append(CastResult(item.name, lags, match_lags(lags, item.truth)))
    return EvalReport(tabulate([r.match for r in results]), results)


def synthetic_items(specs: Iterable[SyntheticSpec], cfg: DetectionConfig = DetectionConfig()) -> list[CorpusItem]:
    items = []
    for spec in specs:
        syn = generate_synthetic(spec, cfg)
        items.append(CorpusItem(syn.cast.source_id, syn.cast, syn.truth))
    return items


def write_corpus(specs: Iterable[SyntheticSpec], out_dir: str | Path) -> list[Path]:
    """Generate and write each spec into ``out_dir/<source_id>/``."""
    out_dir = Path(out_dir)
    written = []
    for spec in specs:
        syn = generate_synthetic(spec)
        written.append(write_synthetic(syn, out_dir / syn.cast.source_id))
    return written

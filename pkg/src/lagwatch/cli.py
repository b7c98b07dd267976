"""Command-line entry point: ``lagwatch analyze | eval | gen``.

Exit codes: 0 pass, 1 tool error, 2 CI gate failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .classify import mark_severity, run_pipeline
from .config import Settings, build_settings, load_document
from .evaluation.harness import evaluate, load_corpus, write_corpus
from .evaluation.synthetic import SpecError, SyntheticSpec, corpus_spec, generate_synthetic, write_synthetic
from .ingest import MANIFEST_NAME, extract_frames, load_manifest
from .model import LagwatchError, Screencast
from .prioritize import load_trace
from .report import (
    EXIT_TOOL_ERROR,
    build_report,
    emit_html,
    emit_json,
    exit_code,
    rank_lags,
)

log = logging.getLogger("lagwatch")


def summary_line(entry: Any) -> str:
    status = "severe" if entry.severe else "minor"
    return f"{entry.rank} {entry.type} {status} [{entry.f_start},{entry.f_end}] {entry.duration_ms:.1f}ms"


def _settings(args: argparse.Namespace) -> Settings:
    document = load_document(args.config) if args.config else {}
    overrides = {
        "out": args.out,
        "detector": args.detector,
        "detector_cmd": args.detector_cmd,
        "policy": args.policy,
        "ssim_threshold": args.ssim_threshold,
        "interaction_trace": args.interaction_trace,
        "timeline": args.timeline,
        "decoder_cmd": getattr(args, "decoder_cmd", None),
        "metrics_file": getattr(args, "metrics_file", None),
    }
    return build_settings(document, overrides)


def _load_input(path: Path, settings: Settings, out_dir: Path) -> Screencast:
    if path.is_dir():
        path = path / MANIFEST_NAME
    if path.suffix.lower() == ".txt":
        return load_manifest(path)
    if not path.exists():
        raise LagwatchError(f"input not found: {path}")
    if not settings.decoder_cmd:
        raise LagwatchError(f"{path} looks like a video; pass --decoder-cmd to extract frames")
    manifest = extract_frames(path, settings.decoder_cmd, out_dir / "frames")
    return manifest.to_screencast()


def cmd_analyze(args: argparse.Namespace) -> int:
    settings = _settings(args)
    out_dir = Path(settings.out or "lagwatch-out")
    cast = _load_input(Path(args.input), settings, out_dir)
    result = run_pipeline(
        cast,
        settings.detection,
        settings.detector,
        ssim_params=settings.ssim,
        timeline=settings.timeline,
        workers=args.workers,
    )
    lags = mark_severity(result.lags, settings.severity)
    trace = (
        load_trace(settings.interaction_trace, settings.interaction_window_ms)
        if settings.interaction_trace
        else None
    )
    metrics = None
    if settings.metrics_file:
        metrics = json.loads(Path(settings.metrics_file).read_text(encoding="utf-8"))
    report = build_report(result.cast, rank_lags(lags, trace, settings.weights), settings.echo(), metrics)
    emit_json(report, out_dir / "report.json")
    emit_html(report, result.cast, out_dir)
    for entry in report.lags:
        print(summary_line(entry))
    return exit_code(report, settings.policy)


def cmd_eval(args: argparse.Namespace) -> int:
    settings = _settings(args)
    items = load_corpus(args.corpus)
    started = time.perf_counter()
    result = evaluate(
        items,
        settings.detection,
        settings.detector,
        settings.severity,
        settings.ssim,
        settings.timeline,
    )
    elapsed = time.perf_counter() - started
    print(result.table.render())
    print(f"{len(items)} screencast(s) evaluated in {elapsed:.1f}s")
    out_dir = Path(settings.out or args.corpus)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "metrics.json").write_text(json.dumps(result.as_dict(), indent=2) + "\n", encoding="utf-8")
    return 0


def _specs_from_file(path: Path) -> list[SyntheticSpec]:
    document = load_document(path)
    raw = document.get("casts", [document])
    if not isinstance(raw, list) or not raw:
        raise SpecError(f"{path}: 'casts' must be a non-empty list")
    return [SyntheticSpec.from_dict(item) for item in raw]


def cmd_gen(args: argparse.Namespace) -> int:
    out_dir = Path(args.out or "lagwatch-gen")
    if args.preset == "corpus":
        specs = [
            corpus_spec(seed, noise=args.noise, pts_jitter_ms=args.pts_jitter)
            for seed in range(args.first_seed, args.first_seed + args.count)
        ]
        written = write_corpus(specs, out_dir)
    else:
        if not args.spec:
            raise LagwatchError("gen needs a spec file or --preset corpus")
        specs = _specs_from_file(Path(args.spec))
        if len(specs) == 1:
            written = [write_synthetic(generate_synthetic(specs[0]), out_dir)]
        else:
            written = write_corpus(specs, out_dir)
    for manifest in written:
        print(manifest)
    return 0


def _add_shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="settings document (YAML or JSON)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--detector", choices=["heuristic", "external"])
    p.add_argument("--detector-cmd", help="command line of an external placeholder detector")
    p.add_argument("--policy", choices=["never-fail", "fail-on-severe", "fail-on-any"])
    p.add_argument("--ssim-threshold", type=float)
    p.add_argument("--interaction-trace", help="file of '<pts_ms>,<kind>' lines")
    p.add_argument("--timeline", choices=["variable", "constant"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lagwatch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lagwatch {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="detect lags in one screencast")
    p.add_argument("input", help="manifest file, directory holding manifest.txt, or a video")
    _add_shared(p)
    p.add_argument("--decoder-cmd", help="decoder template with {input} and {outdir}")
    p.add_argument("--metrics-file", help="JSON of system metrics to attach to the report")
    p.add_argument("--workers", type=int, default=1, help="threads for frame scoring")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("eval", help="score detection against labeled screencasts")
    p.add_argument("corpus", help="directory of <cast>/manifest.txt + truth.json")
    _add_shared(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gen", help="write synthetic screencasts with ground truth")
    p.add_argument("spec", nargs="?", help="synthetic spec (YAML/JSON); a 'casts' list writes a corpus")
    p.add_argument("--out", help="output directory")
    p.add_argument("--preset", choices=["corpus"], help="the standard 30-cast corpus")
    p.add_argument("--count", type=int, default=30)
    p.add_argument("--first-seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0, help="per-pixel jitter amplitude (of 255)")
    p.add_argument("--pts-jitter", type=float, default=0.0, help="PTS jitter in ms")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (LagwatchError, OSError, ValueError) as exc:
        print(f"lagwatch: error: {exc}", file=sys.stderr)
        return EXIT_TOOL_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Settings document (YAML or JSON) merged with command-line overrides."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from .ingest import TimelineMode
from .model import ConfigError, DetectionConfig, SeverityConfig
from .placeholder import DetectorKind, DetectorSpec
from .prioritize import BadWeights, Weights
from .report import Policy
from .similarity import SsimParams

_SECTIONS = {
    "detection": DetectionConfig,
    "severity": SeverityConfig,
    "ssim": SsimParams,
    "detector": DetectorSpec,
    "weights": Weights,
}


@dataclass(frozen=True)
class Settings:
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    severity: SeverityConfig = field(default_factory=SeverityConfig)
    ssim: SsimParams = field(default_factory=SsimParams)
    detector: DetectorSpec = field(default_factory=DetectorSpec)
    weights: Weights = field(default_factory=Weights)
    policy: Policy = Policy.FAIL_ON_SEVERE
    timeline: TimelineMode = TimelineMode.VARIABLE
    interaction_trace: str | None = None
    interaction_window_ms: float = 500.0
    decoder_cmd: str | None = None
    metrics_file: str | None = None
    out: str | None = None

    def echo(self) -> dict[str, Any]:
        """The settings that shape detection results, for the report header."""
        return {
            "detection": asdict(self.detection),
            "severity": asdict(self.severity),
            "ssim": asdict(self.ssim),
            "detector": {
                "kind": self.detector.kind.value,
                "external_cmd": self.detector.external_cmd,
                "confidence_floor": self.detector.confidence_floor,
            },
            "weights": asdict(self.weights),
            "policy": self.policy.value,
            "timeline": self.timeline.value,
            "interaction_window_ms": self.interaction_window_ms,
        }


def _section(cls: type, values: Mapping[str, Any], name: str) -> Any:
    known = {f.name for f in fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
    try:
        return cls(**values)
    except (TypeError, ValueError, BadWeights) as exc:
        raise ConfigError(f"invalid [{name}] settings: {exc}") from exc


def load_document(path: str | Path) -> dict[str, Any]:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML/JSON: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping")
    return data


def build_settings(document: Mapping[str, Any] | None = None, overrides: Mapping[str, Any] | None = None) -> Settings:
    """Merge a settings document with flag overrides (flags win).

    Overrides use flat keys: ``ssim_threshold``, ``detector`` (kind),
    ``detector_cmd`` and any top-level Settings field.
    """
    doc = {k: (dict(v) if isinstance(v, Mapping) else v) for k, v in (document or {}).items()}
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "ssim_threshold":
            doc.setdefault("detection", {})["ssim_threshold"] = value
        elif key == "detector":
            doc.setdefault("detector", {})["kind"] = value
        elif key == "detector_cmd":
            doc.setdefault("detector", {})["external_cmd"] = value
        else:
            doc[key] = value

    top = {f.name for f in fields(Settings)}
    unknown = set(doc) - top
    if unknown:
        raise ConfigError(f"unknown setting(s): {', '.join(sorted(unknown))}")

    kwargs: dict[str, Any] = {}
    for name, cls in _SECTIONS.items():
        if name in doc:
            section = doc[name]
            if not isinstance(section, Mapping):
                raise ConfigError(f"[{name}] must be a mapping")
            if name == "detector" and "kind" in section:
                try:
                    section = {**section, "kind": DetectorKind(section["kind"])}
                except ValueError as exc:
                    raise ConfigError(f"invalid [detector] kind: {exc}") from exc
            kwargs[name] = _section(cls, section, name)
    try:
        if "policy" in doc:
            kwargs["policy"] = Policy.parse(doc["policy"])
        if "timeline" in doc:
            kwargs["timeline"] = TimelineMode(doc["timeline"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for name in ("interaction_trace", "decoder_cmd", "metrics_file", "out"):
        if name in doc:
            kwargs[name] = None if doc[name] is None else str(doc[name])
    if "interaction_window_ms" in doc:
        kwargs["interaction_window_ms"] = float(doc["interaction_window_ms"])

    settings = replace(Settings(), **kwargs)
    settings.severity.validate_against(settings.detection)
    return settings

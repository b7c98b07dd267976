"""Placeholder (unloaded content) detection.

Two strategies share one result type: a luminance-uniformity heuristic for
skeleton-screen blocks, and an external detector process spoken to over a
line-delimited JSON protocol::

    -> {"frame": "/abs/path.png", "id": 0}
    <- {"id": 0, "boxes": [{"x": 10, "y": 10, "w": 100, "h": 100, "conf": 0.9}]}
"""

from __future__ import annotations

import enum
import json
import queue
import shlex
import subprocess
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from PIL import Image
from scipy import ndimage

from .model import LagwatchError
from .similarity import to_grayscale


class DetectorError(LagwatchError):
    pass


class DetectorUnavailable(DetectorError):
    pass


class ProtocolError(DetectorError):
    pass


class DetectorTimeout(DetectorError):
    pass


class DetectorKind(str, enum.Enum):
    HEURISTIC = "heuristic"
    EXTERNAL = "external"


@dataclass(frozen=True)
class PlaceholderRegion:
    x: float
    y: float
    w: float
    h: float
    confidence: float
    source: DetectorKind = DetectorKind.HEURISTIC

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class DetectorSpec:
    kind: DetectorKind = DetectorKind.HEURISTIC
    external_cmd: str | None = None
    confidence_floor: float = 0.5
    max_gray_stddev: float = 6.0
    # None means 0.5% of the frame area.
    min_region_px: int | None = None
    gray_band: tuple[float, float] = (180.0, 245.0)
    timeout_s: float = 10.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DetectorKind(self.kind))
        object.__setattr__(self, "gray_band", tuple(float(v) for v in self.gray_band))
        if self.kind is DetectorKind.EXTERNAL and not self.external_cmd:
            raise ValueError("external detector requires external_cmd")
        if not 0.0 <= self.confidence_floor <= 1.0:
            raise ValueError("confidence_floor must lie in [0, 1]")
        if self.max_gray_stddev <= 0:
            raise ValueError("max_gray_stddev must be positive")
        lo, hi = self.gray_band
        if lo > hi:
            raise ValueError("gray_band must be (low, high)")


def detect_heuristic(frame: np.ndarray, spec: DetectorSpec = DetectorSpec()) -> list[PlaceholderRegion]:
    """Find flat light-gray blocks typical of skeleton screens.

    Pixels whose luma falls inside ``gray_band`` are grouped into
    4-connected components. A component qualifies when its area reaches
    the minimum and its luma stddev stays under ``max_gray_stddev``; its
    bounding box is reported.
    """
    gray = to_grayscale(frame)
    h, w = gray.shape
    min_px = spec.min_region_px if spec.min_region_px is not None else 0.005 * h * w
    lo, hi = spec.gray_band
    labels, count = ndimage.label((gray >= lo) & (gray <= hi))
    if count == 0:
        return []

    flat = labels.ravel()
    values = gray.ravel()
    sizes = np.bincount(flat, minlength=count + 1)
    sums = np.bincount(flat, weights=values, minlength=count + 1)
    sq_sums = np.bincount(flat, weights=values * values, minlength=count + 1)

    regions = []
    for label, box in enumerate(ndimage.find_objects(labels), start=1):
        n = sizes[label]
        if box is None or n < min_px:
            continue
        mean = sums[label] / n
        std = float(np.sqrt(max(sq_sums[label] / n - mean * mean, 0.0)))
        if std > spec.max_gray_stddev:
            continue
        ys, xs = box
        regions.append(
            PlaceholderRegion(
                x=xs.start,
                y=ys.start,
                w=xs.stop - xs.start,
                h=ys.stop - ys.start,
                confidence=1.0 - std / spec.max_gray_stddev,
                source=DetectorKind.HEURISTIC,
            )
        )
    return regions


def _clip_box(box: dict[str, Any], width: int, height: int) -> tuple[float, float, float, float] | None:
    x0 = min(max(float(box["x"]), 0.0), width)
    y0 = min(max(float(box["y"]), 0.0), height)
    x1 = min(max(float(box["x"]) + float(box["w"]), 0.0), width)
    y1 = min(max(float(box["y"]) + float(box["h"]), 0.0), height)
    if x1 <= x0 or y1 <= y0:
        return None
    return x0, y0, x1 - x0, y1 - y0


class ExternalDetector:
    """A long-lived detector child process; requests are serialized."""

    def __init__(self, spec: DetectorSpec) -> None:
        if not spec.external_cmd:
            raise DetectorUnavailable("no external detector command configured")
        self.spec = spec
        try:
            self._proc = subprocess.Popen(
                shlex.split(spec.external_cmd),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise DetectorUnavailable(f"cannot start detector: {exc}") from exc
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._lock = threading.Lock()
        self._next_id = 0
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _request(self, frame_path: Path) -> dict[str, Any]:
        req_id = self._next_id
        self._next_id += 1
        try:
            self._proc.stdin.write(json.dumps({"frame": str(frame_path), "id": req_id}) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError, ValueError) as exc:
            raise DetectorUnavailable(f"detector process is gone: {exc}") from exc
        try:
            line = self._lines.get(timeout=self.spec.timeout_s)
        except queue.Empty as exc:
            raise DetectorTimeout(f"no response within {self.spec.timeout_s}s for {frame_path}") from exc
        if line is None:
            raise ProtocolError("detector closed its output")
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"non-JSON response: {line.strip()[:200]!r}") from exc
        if not isinstance(payload, dict) or payload.get("id") != req_id:
            raise ProtocolError(f"response id mismatch (expected {req_id}): {line.strip()[:200]!r}")
        if not isinstance(payload.get("boxes"), list):
            raise ProtocolError("response lacks a 'boxes' array")
        return payload

    def detect(self, frame_path: str | Path) -> list[PlaceholderRegion]:
        frame_path = Path(frame_path).resolve()
        with Image.open(frame_path) as img:
            width, height = img.size
        with self._lock:
            payload = self._request(frame_path)
        regions = []
        for box in payload["boxes"]:
            try:
                conf = float(box["conf"])
                clipped = _clip_box(box, width, height)
            except (KeyError, TypeError, ValueError) as exc:
                raise ProtocolError(f"malformed box {box!r}") from exc
            if not 0.0 <= conf <= 1.0:
                raise ProtocolError(f"confidence {conf} outside [0, 1]")
            if clipped is None or conf < self.spec.confidence_floor:
                continue
            regions.append(PlaceholderRegion(*clipped, confidence=conf, source=DetectorKind.EXTERNAL))
        return regions

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
                self._proc.wait(timeout=2)
            except (OSError, subprocess.TimeoutExpired):
                self._proc.kill()
                self._proc.wait()

    def __enter__(self) -> ExternalDetector:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


def detect_external(
    frame_path: str | Path, spec: DetectorSpec, detector: ExternalDetector | None = None
) -> list[PlaceholderRegion]:
    """One detection over the wire protocol; spawns a one-off process if needed."""
    if detector is not None:
        return detector.detect(frame_path)
    with ExternalDetector(spec) as one_off:
        return one_off.detect(frame_path)


def union_area(regions: Sequence[PlaceholderRegion]) -> float:
    """Exact area of the union of axis-aligned boxes (coordinate compression)."""
    if not regions:
        return 0.0
    xs = sorted({r.x for r in regions} | {r.x + r.w for r in regions})
    ys = sorted({r.y for r in regions} | {r.y + r.h for r in regions})
    x_index = {v: i for i, v in enumerate(xs)}
    y_index = {v: i for i, v in enumerate(ys)}
    covered = np.zeros((len(ys) - 1, len(xs) - 1), dtype=bool)
    for r in regions:
        covered[y_index[r.y]:y_index[r.y + r.h], x_index[r.x]:x_index[r.x + r.w]] = True
    cell_w = np.diff(xs)
    cell_h = np.diff(ys)
    return float(cell_h @ covered @ cell_w)


def has_placeholder(
    regions: Sequence[PlaceholderRegion], frame_area: float, min_area_fraction: float
) -> tuple[bool, float]:
    fraction = union_area(regions) / frame_area if frame_area > 0 else 0.0
    return bool(regions) and fraction >= min_area_fraction - 1e-12, fraction


class PlaceholderDetector:
    """Frame-reference front end over either detection strategy."""

    def __init__(self, spec: DetectorSpec = DetectorSpec()) -> None:
        self.spec = spec
        self._external: ExternalDetector | None = None
        self._tmp: tempfile.TemporaryDirectory | None = None

    def detect(self, image_ref: Any, pixels: np.ndarray | None = None) -> list[PlaceholderRegion]:
        if self.spec.kind is DetectorKind.HEURISTIC:
            if pixels is None:
                from .ingest import read_image

                pixels = read_image(image_ref)
            return detect_heuristic(pixels, self.spec)

        if self._external is None:
            self._external = ExternalDetector(self.spec)
        if isinstance(image_ref, (str, Path)):
            path = Path(image_ref)
        else:
            if self._tmp is None:
                self._tmp = tempfile.TemporaryDirectory(prefix="lagwatch-")
            path = Path(self._tmp.name) / f"frame_{id(image_ref):x}.png"
            Image.fromarray(np.asarray(pixels if pixels is not None else image_ref)).save(path)
        return self._external.detect(path)

    def close(self) -> None:
        if self._external is not None:
            self._external.close()
            self._external = None
        if self._tmp is not None:
            self._tmp.cleanup()
            self._tmp = None

    def __enter__(self) -> PlaceholderDetector:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()

"""Loading screencasts from frame manifests or an external video decoder."""

from __future__ import annotations

import csv
import enum
import io
import shlex
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from PIL import Image

from .model import (
    DimensionMismatch,
    LagwatchError,
    Screencast,
    make_screencast,
)

MANIFEST_NAME = "manifest.txt"
IMAGE_SUFFIXES = (".png", ".bmp", ".tif", ".tiff", ".ppm", ".pgm")


class ParseError(LagwatchError):
    pass


class MissingImage(LagwatchError):
    pass


class DecoderFailed(LagwatchError):
    def __init__(self, message: str, stderr: str = "") -> None:
        super().__init__(message)
        self.stderr = stderr


class NoFramesEmitted(LagwatchError):
    pass


class TimelineMode(str, enum.Enum):
    VARIABLE = "variable"
    CONSTANT = "constant"


@dataclass
class FrameManifest:
    entries: list[tuple[Path, float]]
    width: int
    height: int
    source_id: str = ""
    root: Path = field(default_factory=Path.cwd)

    def to_screencast(self) -> Screencast:
        return make_screencast(
            [(pts, path) for path, pts in self.entries],
            self.width,
            self.height,
            self.source_id,
            root=self.root,
        )


def read_image(ref: Any) -> np.ndarray:
    """Pixels for a frame reference: file paths are decoded, arrays pass through."""
    if isinstance(ref, np.ndarray):
        return ref
    path = Path(ref)
    if not path.is_file():
        raise MissingImage(f"frame image not found: {path}")
    with Image.open(path) as img:
        if img.mode not in ("L", "RGB"):
            img = img.convert("RGB")
        return np.asarray(img)


def _image_size(path: Path) -> tuple[int, int]:
    with Image.open(path) as img:
        return img.size


def _parse_header(lines: list[str], path: Path) -> tuple[int, int, str]:
    values = {}
    for key, line in zip(("width", "height", "source"), lines):
        prefix = key + "="
        if not line.startswith(prefix):
            raise ParseError(f"{path}: expected '{prefix}...' header, got {line!r}")
        values[key] = line[len(prefix):]
    if len(values) != 3:
        raise ParseError(f"{path}: truncated header")
    try:
        width, height = int(values["width"]), int(values["height"])
    except ValueError as exc:
        raise ParseError(f"{path}: bad dimensions") from exc
    if width <= 0 or height <= 0:
        raise ParseError(f"{path}: dimensions must be positive")
    return width, height, values["source"]


def read_manifest(path: str | Path, check_images: bool = True) -> FrameManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ParseError(f"manifest not found: {path}") from exc
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read manifest {path}: {exc}") from exc
    lines = text.splitlines()
    width, height, source = _parse_header(lines[:3], path)
    root = path.parent.resolve()

    entries = []
    for lineno, row in enumerate(csv.reader(io.StringIO("\n".join(lines[3:]))), start=4):
        if not row:
            continue
        if len(row) != 2:
            raise ParseError(f"{path}:{lineno}: expected '\"<image>\",<pts_ms>'")
        try:
            pts = float(row[1])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: bad pts {row[1]!r}") from exc
        image = root / row[0]
        if check_images:
            if not image.is_file():
                raise MissingImage(f"{path}:{lineno}: missing image {image}")
            size = _image_size(image)
            if size != (width, height):
                raise DimensionMismatch(
                    f"{image}: {size[0]}x{size[1]}, manifest declares {width}x{height}"
                )
        entries.append((image, pts))
    return FrameManifest(entries, width, height, source, root)


def load_manifest(path: str | Path) -> Screencast:
    return read_manifest(path).to_screencast()


def write_manifest(manifest: FrameManifest, path: str | Path) -> Path:
    path = Path(path)
    buf = io.StringIO()
    buf.write(f"width={manifest.width}\nheight={manifest.height}\nsource={manifest.source_id}\n")
    base = path.parent.resolve()
    for image, pts in manifest.entries:
        image = Path(image)
        rel = image.resolve().relative_to(base) if image.is_absolute() else image
        quoted = rel.as_posix().replace('"', '""')
        buf.write(f'"{quoted}",{float(pts)!r}\n')
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def manifest_from_screencast(cast: Screencast) -> FrameManifest:
    entries = []
    for frame in cast.frames:
        if not isinstance(frame.image_ref, (str, Path)):
            raise ParseError("only file-backed screencasts can be written as manifests")
        entries.append((Path(frame.image_ref), frame.pts_ms))
    return FrameManifest(entries, cast.width_px, cast.height_px, cast.source_id,
                         cast.root or Path.cwd())


def extract_frames(
    video_path: str | Path,
    decoder_cmd: str,
    out_dir: str | Path,
    source_id: str | None = None,
    timeout_s: float | None = None,
) -> FrameManifest:
    """Run an external decoder and collect its frames into a manifest.

    ``decoder_cmd`` must contain ``{input}`` and ``{outdir}``. The decoder
    writes ``frame_%06d`` images and ``timestamps.txt`` (one pts_ms per line)
    into ``outdir``. The manifest is written to ``outdir/manifest.txt``.
    """
    if "{input}" not in decoder_cmd or "{outdir}" not in decoder_cmd:
        raise ValueError("decoder command must contain {input} and {outdir}")
    video_path = Path(video_path)
    out_dir = Path(out_dir).resolve()
    out_dir.mkdir(parents=True, exist_ok=True)
    cmd = decoder_cmd.format(input=shlex.quote(str(video_path)), outdir=shlex.quote(str(out_dir)))
    try:
        proc = subprocess.run(shlex.split(cmd), capture_output=True, text=True, timeout=timeout_s)
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise DecoderFailed(f"decoder could not run: {exc}") from exc
    if proc.returncode != 0:
        raise DecoderFailed(f"decoder exited with status {proc.returncode}", proc.stderr)

    images = sorted(
        p for p in out_dir.glob("frame_*") if p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not images:
        raise NoFramesEmitted(f"decoder produced no frames for {video_path}")
    ts_file = out_dir / "timestamps.txt"
    if not ts_file.is_file():
        raise DecoderFailed("decoder did not write timestamps.txt", proc.stderr)
    try:
        stamps = [float(x) for x in ts_file.read_text(encoding="utf-8").split()]
    except ValueError as exc:
        raise DecoderFailed(f"bad timestamps.txt: {exc}", proc.stderr) from exc
    if len(stamps) != len(images):
        raise DecoderFailed(
            f"decoder wrote {len(images)} frames but {len(stamps)} timestamps", proc.stderr
        )

    width, height = _image_size(images[0])
    manifest = FrameManifest(
        list(zip(images, stamps)),
        width,
        height,
        source_id if source_id is not None else video_path.stem,
        out_dir,
    )
    write_manifest(manifest, out_dir / MANIFEST_NAME)
    return manifest


def normalize_timeline(
    cast: Screencast, mode: TimelineMode = TimelineMode.VARIABLE
) -> Screencast:
    """Collapse runs of pixel-identical frames in constant-rate recordings.

    Each run keeps its first frame (and PTS), so repeated content shows up
    as a gap between presentation times. Variable-rate casts pass through.
    """
    if TimelineMode(mode) is TimelineMode.VARIABLE:
        return cast
    kept = [cast.frames[0]]
    prev = read_image(cast.frames[0].image_ref)
    for frame in cast.frames[1:]:
        cur = read_image(frame.image_ref)
        if not (cur.shape == prev.shape and np.array_equal(cur, prev)):
            kept.append(frame)
        prev = cur
    if len(kept) == len(cast.frames):
        return cast
    if len(kept) == 1:
        # Fully static recording: keep the last frame so the span stays measurable.
        kept.append(cast.frames[-1])
    return make_screencast(
        [(f.pts_ms, f.image_ref) for f in kept],
        cast.width_px,
        cast.height_px,
        cast.source_id,
        root=cast.root,
    )

"""Windowed SSIM between consecutive screencast frames.

Local statistics are Gaussian-weighted over a sliding window (stride 1,
valid region only) and the per-window index is averaged over the image.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import cv2
import numpy as np
from PIL import Image

from .model import DimensionMismatch, LagwatchError, Screencast

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


class EmptyImage(LagwatchError):
    pass


class ImageTooSmall(LagwatchError):
    pass


@dataclass(frozen=True)
class SsimParams:
    window_size: int = 11
    gaussian_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range_L: float = 255.0
    downscale_max_dim: int | None = 360

    def __post_init__(self) -> None:
        if self.window_size < 3 or self.window_size % 2 == 0:
            raise ValueError("window_size must be odd and >= 3")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("k1 and k2 must be positive")
        if self.gaussian_sigma <= 0:
            raise ValueError("gaussian_sigma must be positive")
        if self.downscale_max_dim is not None and self.downscale_max_dim < self.window_size:
            raise ValueError("downscale_max_dim must be >= window_size")

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range_L) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range_L) ** 2


@dataclass(frozen=True)
class PairScore:
    prev_index: int
    next_index: int
    score: float


def to_grayscale(image: np.ndarray) -> np.ndarray:
    """Return float64 luma (ITU-R BT.601 weights) for an RGB(A) or gray buffer."""
    arr = np.asarray(image)
    if arr.size == 0 or arr.ndim < 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptyImage("image has no pixels")
    if arr.ndim == 2:
        return arr.astype(np.float64)
    if arr.ndim == 3 and arr.shape[2] >= 3:
        return arr[..., :3].astype(np.float64) @ LUMA_WEIGHTS
    if arr.ndim == 3 and arr.shape[2] in (1, 2):
        return arr[..., 0].astype(np.float64)
    raise ValueError(f"unsupported image shape {arr.shape}")


def gaussian_window(size: int, sigma: float) -> np.ndarray:
    """1-D normalized Gaussian taps; the 2-D window is their outer product."""
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2
    g = np.exp(-(x**2) / (2 * sigma**2))
    return g / g.sum()


def _filter_valid(img: np.ndarray, taps: np.ndarray) -> np.ndarray:
    # Zero padding never reaches the cropped valid region.
    half = len(taps) // 2
    out = cv2.sepFilter2D(img, cv2.CV_64F, taps, taps, borderType=cv2.BORDER_CONSTANT)
    return out[half:-half, half:-half]


@dataclass(frozen=True)
class _Moments:
    """Per-image filtered statistics, reusable across neighbouring pairs."""

    gray: np.ndarray
    mu: np.ndarray
    mu_sq: np.ndarray
    var: np.ndarray


def _moments(gray: np.ndarray, taps: np.ndarray) -> _Moments:
    mu = _filter_valid(gray, taps)
    mu_sq = mu * mu
    return _Moments(gray, mu, mu_sq, _filter_valid(gray * gray, taps) - mu_sq)


def _check_pair(a: np.ndarray, b: np.ndarray, params: SsimParams) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.ndim != 2:
        raise ValueError("ssim expects 2-D grayscale buffers")
    if min(a.shape) < params.window_size:
        raise ImageTooSmall(f"image {a.shape} smaller than window {params.window_size}")


def _ssim_map_from(ma: _Moments, mb: _Moments, taps: np.ndarray, params: SsimParams) -> np.ndarray:
    mu_ab = ma.mu * mb.mu
    cov = _filter_valid(ma.gray * mb.gray, taps) - mu_ab
    c1, c2 = params.c1, params.c2
    num = (2 * mu_ab + c1) * (2 * cov + c2)
    den = (ma.mu_sq + mb.mu_sq + c1) * (ma.var + mb.var + c2)
    return num / den


def ssim_map(a: np.ndarray, b: np.ndarray, params: SsimParams = SsimParams()) -> np.ndarray:
    """Per-window SSIM values over the valid region."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_pair(a, b, params)
    taps = gaussian_window(params.window_size, params.gaussian_sigma)
    return _ssim_map_from(_moments(a, taps), _moments(b, taps), taps, params)


def ssim(a: np.ndarray, b: np.ndarray, params: SsimParams = SsimParams()) -> float:
    """Mean SSIM of two equally sized grayscale buffers."""
    return float(np.clip(ssim_map(a, b, params).mean(), -1.0, 1.0))


def downscale(gray: np.ndarray, max_dim: int | None) -> np.ndarray:
    """Bilinear resize so the longer side equals ``max_dim``; never upsamples."""
    if max_dim is None:
        return gray
    h, w = gray.shape
    longest = max(h, w)
    if longest <= max_dim:
        return gray
    scale = max_dim / longest
    size = (max(1, round(w * scale)), max(1, round(h * scale)))
    img = Image.fromarray(gray.astype(np.float32), mode="F")
    return np.asarray(img.resize(size, Image.Resampling.BILINEAR), dtype=np.float64)


def prepare(image: np.ndarray, params: SsimParams) -> np.ndarray:
    """Grayscale and downscale a frame for scoring."""
    arr = np.asarray(image)
    max_dim = params.downscale_max_dim
    if (
        max_dim is not None
        and arr.dtype == np.uint8
        and arr.ndim == 3
        and arr.shape[2] == 3
        and max(arr.shape[:2]) > max_dim
    ):
        # Same BT.601 weights as to_grayscale, computed by PIL in float mode.
        h, w = arr.shape[:2]
        scale = max_dim / max(h, w)
        size = (max(1, round(w * scale)), max(1, round(h * scale)))
        gray = Image.fromarray(arr).convert("F").resize(size, Image.Resampling.BILINEAR)
        return np.asarray(gray, dtype=np.float64)
    return downscale(to_grayscale(arr), max_dim)


def load_prepared(ref: object, params: SsimParams) -> np.ndarray:
    """Like ``prepare(read_image(ref))`` but decodes files straight to float luma."""
    if isinstance(ref, np.ndarray):
        return prepare(ref, params)
    from .ingest import MissingImage

    try:
        with Image.open(ref) as img:
            if img.mode not in ("L", "RGB"):
                img = img.convert("RGB")
            max_dim = params.downscale_max_dim
            w, h = img.size
            if max_dim is None or max(w, h) <= max_dim:
                return to_grayscale(np.asarray(img))
            scale = max_dim / max(w, h)
            size = (max(1, round(w * scale)), max(1, round(h * scale)))
            gray = img.convert("F").resize(size, Image.Resampling.BILINEAR)
            return np.asarray(gray, dtype=np.float64)
    except FileNotFoundError as exc:
        raise MissingImage(f"frame image not found: {ref}") from exc


def pairwise_scores(
    cast: Screencast,
    params: SsimParams = SsimParams(),
    loader: Callable[[object], np.ndarray] | None = None,
    workers: int = 1,
) -> list[PairScore]:
    """Score every frame against its predecessor, in frame order.

    ``loader`` turns a frame's ``image_ref`` into pixels; by default files
    are decoded directly to grayscale. With ``workers > 1``
    frames are decoded and scored on a thread pool; output order is fixed.
    """
    taps = gaussian_window(params.window_size, params.gaussian_sigma)

    def stats(i: int) -> _Moments:
        ref = cast.frames[i].image_ref
        if loader is None:
            gray = load_prepared(ref, params)
        else:
            gray = prepare(loader(ref), params)
        if min(gray.shape) < params.window_size:
            raise ImageTooSmall(f"frame {i} {gray.shape} smaller than window {params.window_size}")
        return _moments(gray, taps)

    def score(ma: _Moments, mb: _Moments) -> float:
        _check_pair(ma.gray, mb.gray, params)
        value = _ssim_map_from(ma, mb, taps, params).mean()
        return float(np.clip(value, -1.0, 1.0))

    n = len(cast.frames)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            moments = list(pool.map(stats, range(n)))
            values = list(pool.map(lambda i: score(moments[i], moments[i + 1]), range(n - 1)))
        return [PairScore(i, i + 1, v) for i, v in enumerate(values)]

    scores = []
    prev = stats(0)
    for i in range(1, n):
        cur = stats(i)
        scores.append(PairScore(i - 1, i, score(prev, cur)))
        prev = cur
    return scores

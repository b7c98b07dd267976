"""Independent reference implementations used to check the optimized code.

These deliberately share nothing with the package beyond plain numbers.
"""

from __future__ import annotations

import math

import numpy as np


def naive_ssim(a, b, window=11, sigma=1.5, k1=0.01, k2=0.03, L=255.0):
    """Per-window double loop over the valid region with a full 2-D kernel."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    half = (window - 1) / 2
    kernel = np.empty((window, window))
    for i in range(window):
        for j in range(window):
            kernel[i, j] = math.exp(-((i - half) ** 2 + (j - half) ** 2) / (2 * sigma * sigma))
    kernel /= kernel.sum()
    c1 = (k1 * L) ** 2
    c2 = (k2 * L) ** 2
    h, w = a.shape
    total = 0.0
    count = 0
    for y in range(h - window + 1):
        for x in range(w - window + 1):
            pa = a[y:y + window, x:x + window]
            pb = b[y:y + window, x:x + window]
            mu_a = float((kernel * pa).sum())
            mu_b = float((kernel * pb).sum())
            var_a = float((kernel * (pa - mu_a) ** 2).sum())
            var_b = float((kernel * (pb - mu_b) ** 2).sum())
            cov = float((kernel * (pa - mu_a) * (pb - mu_b)).sum())
            total += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / (
                (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
            )
            count += 1
    return total / count


def constant_pair_ssim(v1, v2, k1=0.01, k2=0.03, L=255.0):
    """Closed form for two constant images: variance terms vanish."""
    c1 = (k1 * L) ** 2
    c2 = (k2 * L) ** 2
    return ((2 * v1 * v2 + c1) * c2) / ((v1 * v1 + v2 * v2 + c1) * c2)


def brute_force_runs(static_flags):
    """Maximal runs of True pairs, as (first frame, last frame) tuples.

    Pair i joins frames i and i+1. Every candidate [s, e] is checked for
    being all-static and unextendable on both sides.
    """
    n = len(static_flags)
    runs = []
    for s in range(n):
        for e in range(s, n):
            if not all(static_flags[s:e + 1]):
                continue
            left_ok = s == 0 or not static_flags[s - 1]
            right_ok = e == n - 1 or not static_flags[e + 1]
            if left_ok and right_ok:
                runs.append((s, e + 1))
    return sorted(runs)


def raster_union_area(boxes, width, height):
    """Union area of integer boxes by painting a bitmap."""
    canvas = np.zeros((height, width), dtype=bool)
    for x, y, w, h in boxes:
        canvas[y:y + h, x:x + w] = True
    return int(canvas.sum())


def rule_oracle(gap_ms=None, duration_ms=None, placeholder=None):
    """Direct statement of the detection rules with the default thresholds."""
    out = set()
    if gap_ms is not None:
        if gap_ms > 16.7:
            out.add("jank")
        if gap_ms > 100.0:
            out.add("janky")
    if duration_ms is not None:
        if placeholder and duration_ms > 1000.0:
            out.add("loading")
        if not placeholder and duration_ms > 100.0:
            out.add("frozen")
    return out

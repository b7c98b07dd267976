"""Turning pairwise similarity scores into maximal static runs."""

from __future__ import annotations

from typing import Sequence

from .model import LagwatchError, StaticRun
from .similarity import PairScore


class EmptyScores(LagwatchError):
    pass


def extract_static_runs(
    scores: Sequence[PairScore],
    threshold: float,
    pts: Sequence[float] | None = None,
) -> list[StaticRun]:
    """Group consecutive above-threshold pairs into runs ``[f_start, f_end]``.

    A run of pairs (i, i+1) ... (j-1, j) with every score >= ``threshold``
    becomes ``StaticRun(i, j)``, so the first unchanged frame is included.
    Durations come from ``pts``; without it they are measured in frames.
    """
    if not scores:
        raise EmptyScores("no pair scores to segment")
    runs = []
    start = None
    prev_next = None
    for pair in scores:
        if prev_next is not None and pair.prev_index != prev_next:
            raise ValueError(f"scores are not consecutive at frame {pair.prev_index}")
        prev_next = pair.next_index
        if pair.score >= threshold:
            if start is None:
                start = pair.prev_index
        elif start is not None:
            runs.append((start, pair.prev_index))
            start = None
    if start is not None:
        runs.append((start, scores[-1].next_index))

    def duration(a: int, b: int) -> float:
        return float(pts[b] - pts[a]) if pts is not None else float(b - a)

    return [StaticRun(a, b, duration(a, b)) for a, b in runs]

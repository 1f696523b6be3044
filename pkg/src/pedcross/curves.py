"""Shape tests for demand curves (travel time or jam size against demand).

All functions take the curve as a sequence of values ordered by increasing
demand; the demand values themselves do not matter.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence


def interior_peaks(y: Sequence[float]) -> list[int]:
    """Interior indices that rise from the left and do not rise to the right."""
    return [j for j in range(1, len(y) - 1) if y[j] > y[j - 1] and y[j] >= y[j + 1]]


def descent_after(y: Sequence[float], j: int) -> float:
    """Relative drop from ``y[j]`` to the bottom of the descent that follows it.

    The descent ends at the first point that rises again.
    """
    low = y[j]
    for k in range(j + 1, len(y)):
        if y[k] > y[k - 1]:
            break
        low = y[k]
    return 1.0 - low / y[j]


def peak_then_drop(y: Sequence[float], drop: float = 0.05) -> int | None:
    """First interior local maximum followed by a relative decrease of at
    least ``drop`` before the curve rises again; None if there is none."""
    for j in interior_peaks(y):
        if descent_after(y, j) >= drop:
            return j
    return None


def has_peak(y: Sequence[float], noise: float = 0.02) -> bool:
    """True if some interior local maximum stands above noise on both sides:
    it exceeds an earlier value and a later value by more than ``noise``
    (relative)."""
    for j in range(1, len(y) - 1):
        if y[j] < y[j - 1] or y[j] < y[j + 1]:
            continue
        rises = min(y[:j]) * (1.0 + noise) < y[j]
        falls = min(y[j + 1:]) * (1.0 + noise) < y[j]
        if rises and falls:
            return True
    return False


def peak_threshold(curves: Mapping[float, Sequence[float]], noise: float = 0.02) -> float | None:
    """Smallest vehicle demand from which every curve at that demand and
    above has a peak; None if the highest demand has none."""
    threshold = None
    for veh in sorted(curves, reverse=True):
        if not has_peak(curves[veh], noise):
            break
        threshold = veh
    return threshold


def nearly_monotone(y: Sequence[float], slack: float) -> bool:
    """Non-decreasing up to ``slack``: no value falls more than ``slack``
    below its predecessor."""
    return all(b >= a - slack for a, b in zip(y, y[1:]))

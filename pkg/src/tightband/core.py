"""Closed intervals on the real line and an order-statistic multiset.

Everything downstream trades in closed intervals [lo, hi] plus rank
queries over the values observed so far. Containment is exact on both
endpoints; no epsilon is applied anywhere in this module, because the
counting arguments built on top are combinatorial and fuzzed containment
would corrupt mistake counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
from sortedcontainers import SortedList


class InfeasibleWindowError(ValueError):
    """A window of the requested size does not exist in the multiset."""


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]; may exceed [0,1] before clipping."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo <= self.hi:
            raise ValueError(f"interval endpoints out of order: [{self.lo}, {self.hi}]")

    @property
    def volume(self) -> float:
        return self.hi - self.lo

    def scale(self, s: float) -> "Interval":
        """Center-preserving dilation: {x : |x - center| <= s * halfwidth}."""
        if s < 0:
            raise ValueError(f"scale factor must be >= 0, got {s}")
        if s == 1.0:
            return self
        center = 0.5 * (self.lo + self.hi)
        half = 0.5 * s * (self.hi - self.lo)
        return Interval(center - half, center + half)

    def clip_unit(self) -> "Interval":
        """Intersect with [0, 1]; if disjoint, snap to the nearest endpoint."""
        if self.hi < 0.0:
            return Interval(0.0, 0.0)
        if self.lo > 1.0:
            return Interval(1.0, 1.0)
        return Interval(max(self.lo, 0.0), min(self.hi, 1.0))

    def contains(self, y: float) -> bool:
        return self.lo <= y <= self.hi


class RankedMultiset:
    """Multiset of reals with O(log n) insert and rank/select queries.

    Duplicates are kept with multiplicity. select(k) is the k-th smallest
    stored value, 0-indexed; count_in counts stored values inside a closed
    interval. Single-writer: one multiset belongs to one run.
    """

    __slots__ = ("_data",)

    def __init__(self, values: Iterable[float] = ()) -> None:
        self._data = SortedList(values)

    def insert(self, y: float) -> None:
        self._data.add(y)

    @property
    def size(self) -> int:
        return len(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __iter__(self) -> Iterator[float]:
        return iter(self._data)

    def select(self, k: int) -> float:
        """k-th smallest stored value (0-indexed, duplicates counted)."""
        if not 0 <= k < len(self._data):
            raise IndexError(f"select({k}) on multiset of size {len(self._data)}")
        return self._data[k]

    def count_in(self, interval: Interval) -> int:
        """Number of stored values y with interval.lo <= y <= interval.hi."""
        return self._data.bisect_right(interval.hi) - self._data.bisect_left(interval.lo)

    def to_array(self) -> np.ndarray:
        """Sorted copy of the contents as a float array."""
        return np.fromiter(self._data, dtype=float, count=len(self._data))


def min_window_sorted(values: np.ndarray, m: int) -> Interval:
    """Narrowest window over m consecutive entries of a sorted array.

    Shared primitive behind min_window_interval and the hindsight oracle.
    Ties break to the leftmost window; np.argmin's first-hit rule gives
    exactly that, since the array is sorted.
    """
    if m <= 0:
        return Interval(0.0, 0.0)
    n = len(values)
    if m > n:
        raise InfeasibleWindowError(f"window of {m} values requested, only {n} stored")
    widths = values[m - 1 :] - values[: n - m + 1]
    i = int(np.argmin(widths))
    return Interval(float(values[i]), float(values[i + m - 1]))


def min_window_interval(ms: RankedMultiset, m: int) -> Interval:
    """Minimum-volume closed interval containing at least m stored values.

    Any interval covering m points can be shrunk onto its extreme covered
    points, so the optimum is a window [select(i), select(i+m-1)] for some
    i. m <= 0 returns the degenerate [0, 0] placeholder (the predictor's
    initialization convention); m = 1 degenerates to the smallest value.
    """
    return min_window_sorted(ms.to_array(), m)

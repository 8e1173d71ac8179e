"""Storm-event detection in water-level series.

Local maxima are screened by prominence (how far a crest rises above the
higher of the minima separating it from taller neighbours) and by a minimum
spacing, then paired with the surrounding screened minima to delimit one
storm event per surviving crest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotEnoughData

#: Network-wide default prominence threshold (m) when a site has no override.
DEFAULT_PROMINENCE_M = 0.05
#: Default minimum spacing between selected extrema.
DEFAULT_DISTANCE_HOURS = 3.0


@dataclass(frozen=True)
class PeakParams:
    """Extremum-selection parameters.

    prominence: minimum rise (level units) for a crest to count as distinct.
    distance: minimum spacing between kept extrema, in samples.
    """

    prominence: float
    distance: int = 1

    def __post_init__(self):
        if not self.prominence > 0:
            raise ValueError(f"prominence must be > 0, got {self.prominence}")
        if self.distance < 1:
            raise ValueError(f"distance must be >= 1 sample, got {self.distance}")

    @classmethod
    def from_spacing(
        cls,
        prominence: float,
        distance_hours: float = DEFAULT_DISTANCE_HOURS,
        dt_hours: float = 1.0 / 6.0,
    ) -> "PeakParams":
        """Build params with the distance converted from hours to samples."""
        return cls(prominence, max(1, round(distance_hours / dt_hours)))


@dataclass(frozen=True)
class StormEvent:
    """One segmented storm: bounding minima, crest, and recession indices.

    The recession is the inclusive index range [peak_idx, end_idx]; the rising
    limb spans [start_idx, peak_idx].
    """

    site_id: str
    start_idx: int
    peak_idx: int
    end_idx: int
    peak_level: float
    prominence: float

    def recession_slice(self) -> slice:
        return slice(self.peak_idx, self.end_idx + 1)

    def recession(self, levels: np.ndarray) -> np.ndarray:
        return np.asarray(levels, dtype=float)[self.recession_slice()]


@dataclass
class RainAlignment:
    """Cross-check of detected storms against a rainfall record."""

    matched: list[tuple[int, int]]  # (storm position, rain position)
    unmatched_storms: list[int]
    unmatched_rain: list[int]


# ---------------------------------------------------------------------------
# Local maxima and prominence
# ---------------------------------------------------------------------------

def _local_maxima(x: np.ndarray) -> list[int]:
    """Strictly interior local maxima; a plateau crest is represented by its
    left-most sample."""
    n = x.size
    out: list[int] = []
    i = 1
    while i < n - 1:
        if x[i] > x[i - 1]:
            j = i
            while j < n - 1 and x[j + 1] == x[j]:
                j += 1
            if j < n - 1 and x[j + 1] < x[j]:
                out.append(i)
            i = j + 1
        else:
            i += 1
    return out


def _side_bases(x: np.ndarray) -> np.ndarray:
    """For every index i, the minimum of x between i and the nearest sample
    strictly higher than x[i] on the left (series start if none).

    Single monotonic-stack pass; each stack entry carries the running minimum
    of the span it closes over, so the whole array costs O(n).
    """
    n = x.size
    bases = np.empty(n)
    stack: list[tuple[float, float]] = []  # (height, min of span behind it)
    for i in range(n):
        v = x[i]
        m = v
        while stack and stack[-1][0] <= v:
            m = min(m, stack.pop()[1])
        bases[i] = m
        stack.append((v, m))
    return bases


def peak_prominences(x: np.ndarray, peaks: list[int]) -> np.ndarray:
    """Prominence of each peak: height above the higher of its two side bases."""
    left = _side_bases(x)
    right = _side_bases(x[::-1])[::-1]
    idx = np.asarray(peaks, dtype=int)
    return x[idx] - np.maximum(left[idx], right[idx])


def _enforce_distance(peaks: list[int], heights: dict[int, float], distance: int) -> list[int]:
    """Keep peaks greedily in decreasing height order (ties: earlier index),
    discarding any peak closer than *distance* samples to one already kept."""
    order = sorted(peaks, key=lambda i: (-heights[i], i))
    kept: list[int] = []
    for i in order:
        if all(abs(i - j) >= distance for j in kept):
            kept.append(i)
    return sorted(kept)


def find_peaks(series, params: PeakParams) -> list[tuple[int, float]]:
    """Detect prominent, well-separated local maxima.

    Returns (index, prominence) pairs in ascending index order.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise NotEnoughData(f"need >= 3 samples, got {x.size}")
    candidates = _local_maxima(x)
    if not candidates:
        return []
    proms = peak_prominences(x, candidates)
    prom_of = {i: p for i, p, ok in zip(candidates, proms, proms >= params.prominence) if ok}
    if not prom_of:
        return []
    heights = {i: float(x[i]) for i in prom_of}
    kept = _enforce_distance(list(prom_of), heights, params.distance)
    return [(i, float(prom_of[i])) for i in kept]


def find_minima(series, params: PeakParams) -> list[int]:
    """Indices of prominent local minima: peaks of the negated series."""
    x = np.asarray(series, dtype=float)
    return [i for i, _ in find_peaks(-x, params)]


# ---------------------------------------------------------------------------
# Storm segmentation
# ---------------------------------------------------------------------------

def _nearest_minimum(minima: list[int], lo: int, hi: int, near: int) -> int | None:
    """Nearest kept minimum to *near* within the open index interval (lo, hi)."""
    inside = [m for m in minima if lo < m < hi]
    if not inside:
        return None
    return min(inside, key=lambda m: abs(m - near))


def segment_storms(series, params: PeakParams, site_id: str = "") -> list[StormEvent]:
    """Cut the series into one StormEvent per kept crest.

    Each event ends at the nearest kept minimum after its crest (series end if
    none) and starts at the nearest kept minimum before it (series start if
    none).  When kept minima do not interleave two adjacent crests, the trough
    sample between them is used instead so recessions never overlap.
    """
    x = np.asarray(series, dtype=float)
    peaks = find_peaks(x, params)
    if not peaks:
        return []
    minima = find_minima(x, params)
    n = x.size
    events: list[StormEvent] = []
    peak_indices = [i for i, _ in peaks]
    for k, (p, prom) in enumerate(peaks):
        prev_p = peak_indices[k - 1] if k > 0 else None
        next_p = peak_indices[k + 1] if k + 1 < len(peaks) else None

        lo = prev_p if prev_p is not None else -1
        start = _nearest_minimum(minima, lo, p, p)
        if start is None:
            if prev_p is None:
                start = 0
            else:
                between = x[prev_p + 1 : p]
                start = prev_p + 1 + int(np.argmin(between))

        hi = next_p if next_p is not None else n
        end = _nearest_minimum(minima, p, hi, p)
        if end is None:
            if next_p is None:
                end = n - 1
            else:
                between = x[p + 1 : next_p]
                end = p + 1 + int(np.argmin(between))

        events.append(
            StormEvent(
                site_id=site_id,
                start_idx=int(start),
                peak_idx=int(p),
                end_idx=int(end),
                peak_level=float(x[p]),
                prominence=float(prom),
            )
        )
    return events


def align_with_rain(
    storms: list[StormEvent],
    peak_times: np.ndarray,
    rain: list[tuple[int, float]],
    window_hours: float = 6.0,
) -> RainAlignment:
    """Match each storm to the nearest preceding rain event within a window.

    peak_times gives each storm's crest time (epoch s, same order as storms);
    rain holds time-ordered (start epoch s, depth) pairs.  A rain event is
    consumed by at most one storm; storms are served in crest-time order, so
    the earlier storm wins a contested event.
    """
    window_s = window_hours * 3600.0
    order = sorted(range(len(storms)), key=lambda k: peak_times[k])
    taken: set[int] = set()
    matched: list[tuple[int, int]] = []
    unmatched_storms: list[int] = []
    for k in order:
        t_peak = peak_times[k]
        best = None
        for r, (t_rain, _depth) in enumerate(rain):
            if r in taken or not (t_peak - window_s <= t_rain <= t_peak):
                continue
            if best is None or abs(t_peak - t_rain) < abs(t_peak - rain[best][0]):
                best = r
        if best is None:
            unmatched_storms.append(k)
        else:
            taken.add(best)
            matched.append((k, best))
    matched.sort()
    unmatched_storms.sort()
    unmatched_rain = [r for r in range(len(rain)) if r not in taken]
    return RainAlignment(matched, unmatched_storms, unmatched_rain)

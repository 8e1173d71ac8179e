"""Timestamp handling and the in-memory water-level series container.

Timestamps are UTC epoch seconds (int) everywhere inside the package; ISO-8601
strings appear only at file and wire boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import InvalidSeries

SECONDS_PER_HOUR = 3600.0


def parse_timestamp(text: str) -> int:
    """Parse an ISO-8601 timestamp with explicit zone into UTC epoch seconds.

    Raises ValueError for unparseable text or zone-naive timestamps.
    """
    dt = datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    if dt.tzinfo is None:
        raise ValueError(f"timestamp {text!r} has no timezone")
    return int(dt.astimezone(timezone.utc).timestamp())


def format_timestamp(epoch_s: int) -> str:
    """Render UTC epoch seconds as a Z-suffixed ISO-8601 string."""
    dt = datetime.fromtimestamp(int(epoch_s), tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class TimeSeries:
    """One site's water-level record: parallel times (epoch s) and levels (m)."""

    site_id: str
    times: np.ndarray
    levels: np.ndarray
    battery_v: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.int64)
        self.levels = np.asarray(self.levels, dtype=np.float64)
        if self.times.shape != self.levels.shape:
            raise InvalidSeries(
                f"{self.site_id}: {self.times.size} timestamps vs {self.levels.size} levels"
            )

    def __len__(self) -> int:
        return int(self.times.size)

    def require_sorted(self) -> None:
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise InvalidSeries(f"{self.site_id}: timestamps not strictly increasing")

    def times_hours(self) -> np.ndarray:
        """Sample times in hours relative to the first sample."""
        if self.times.size == 0:
            return np.empty(0)
        return (self.times - self.times[0]) / SECONDS_PER_HOUR

    def nominal_dt_hours(self) -> float:
        """Median inter-sample interval in hours."""
        if self.times.size < 2:
            raise InvalidSeries(f"{self.site_id}: need >= 2 samples for a spacing")
        return float(np.median(np.diff(self.times))) / SECONDS_PER_HOUR

    def window(self, start: int | None = None, end: int | None = None) -> "TimeSeries":
        """Inclusive time-window restriction."""
        mask = np.ones(self.times.shape, dtype=bool)
        if start is not None:
            mask &= self.times >= start
        if end is not None:
            mask &= self.times <= end
        batt = self.battery_v[mask] if self.battery_v is not None else None
        return TimeSeries(self.site_id, self.times[mask], self.levels[mask], batt)

    def slice(self, start_idx: int, end_idx: int) -> "TimeSeries":
        """Sub-series over the inclusive index range [start_idx, end_idx]."""
        sl = np.s_[start_idx : end_idx + 1]
        batt = self.battery_v[sl] if self.battery_v is not None else None
        return TimeSeries(self.site_id, self.times[sl], self.levels[sl], batt)


def uniform_spacing_hours(times_hours: np.ndarray, rel_tol: float = 1e-6) -> float | None:
    """Return the common spacing if *times_hours* is uniform, else None."""
    t = np.asarray(times_hours, dtype=float)
    if t.size < 2:
        return None
    steps = np.diff(t)
    dt = float(np.median(steps))
    if dt <= 0 or np.any(np.abs(steps - dt) > rel_tol * dt):
        return None
    return dt

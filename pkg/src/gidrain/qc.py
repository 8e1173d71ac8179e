"""Pre-analysis data quality checks: gaps, sensor drift, dead sensors.

QC only flags and splits; it never mutates or imputes samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IndeterminateDrift, InvalidSeries
from .series import SECONDS_PER_HOUR, TimeSeries

NOMINAL_DT_HOURS = 1.0 / 6.0  # 10-minute sampling
GAP_TOLERANCE_FACTOR = 1.5
SPLIT_GAP_HOURS = 3.0  # recessions must not span longer interruptions
DRY_LEVEL_MAX_M = 0.05
MIN_DRY_HOURS = 12.0
DRIFT_THRESHOLD_M = 0.025
SENSOR_ACCURACY_M = 0.00762
MIN_RAIN_CM = 1.0
DEAD_WINDOW_HOURS = 2.0
MIN_VALID_DEPTH_M = -0.05  # small negatives tolerated as noise around dry


@dataclass(frozen=True)
class Gap:
    start: int  # epoch s of the last sample before the hole
    duration_hours: float


@dataclass
class QCReport:
    site_id: str
    gaps: list[Gap] = field(default_factory=list)
    drift_m: float | None = None
    drift_flag: bool | None = None
    dead_sensor_flag: bool | None = None
    samples_total: int = 0
    samples_valid: int = 0


def detect_gaps(
    times,
    nominal_dt_hours: float = NOMINAL_DT_HOURS,
    tolerance_factor: float = GAP_TOLERANCE_FACTOR,
) -> list[Gap]:
    """Every inter-sample interval exceeding tolerance * nominal spacing."""
    t = np.asarray(times, dtype=np.int64)
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise InvalidSeries("timestamps must be strictly increasing")
    if t.size < 2:
        return []
    steps_h = np.diff(t) / SECONDS_PER_HOUR
    tol = tolerance_factor * nominal_dt_hours
    return [
        Gap(int(t[i]), float(steps_h[i]))
        for i in np.nonzero(steps_h > tol)[0]
    ]


def split_at_gaps(times, min_gap_hours: float = SPLIT_GAP_HOURS) -> list[tuple[int, int]]:
    """Contiguous analysis segments as inclusive (first, last) index pairs,
    split wherever an interval reaches *min_gap_hours*."""
    t = np.asarray(times, dtype=np.int64)
    if t.size == 0:
        return []
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise InvalidSeries("timestamps must be strictly increasing")
    breaks = np.nonzero(np.diff(t) / SECONDS_PER_HOUR >= min_gap_hours)[0]
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [t.size - 1]])
    return [(int(a), int(b)) for a, b in zip(starts, ends)]


def _dry_runs(levels: np.ndarray, times: np.ndarray, dry_level_max: float, min_dry_hours: float):
    """Maximal runs below the dry threshold spanning at least min_dry_hours."""
    dry = levels < dry_level_max
    runs = []
    i = 0
    n = levels.size
    while i < n:
        if dry[i]:
            j = i
            while j + 1 < n and dry[j + 1]:
                j += 1
            if (times[j] - times[i]) / SECONDS_PER_HOUR >= min_dry_hours:
                runs.append((i, j))
            i = j + 1
        else:
            i += 1
    return runs


def detect_drift(
    levels,
    times,
    dry_level_max: float = DRY_LEVEL_MAX_M,
    min_dry_hours: float = MIN_DRY_HOURS,
    threshold: float = DRIFT_THRESHOLD_M,
) -> tuple[float, bool]:
    """Shift of the dry baseline between the first and last dry period.

    Returns (drift_m, flagged); raises IndeterminateDrift when the series
    holds fewer than two qualifying dry periods.
    """
    h = np.asarray(levels, dtype=float)
    t = np.asarray(times, dtype=np.int64)
    runs = _dry_runs(h, t, dry_level_max, min_dry_hours)
    if len(runs) < 2:
        raise IndeterminateDrift(f"found {len(runs)} dry period(s); need >= 2")
    first, last = runs[0], runs[-1]
    drift = float(
        np.median(h[last[0] : last[1] + 1]) - np.median(h[first[0] : first[1] + 1])
    )
    return drift, abs(drift) > threshold


def detect_dead_sensor(
    levels,
    times,
    rain_events,
    min_rain_cm: float = MIN_RAIN_CM,
    accuracy_m: float = SENSOR_ACCURACY_M,
    window_hours: float = DEAD_WINDOW_HOURS,
) -> bool | None:
    """True when the level stays within sensor accuracy of zero through a
    qualifying rain event and the following window; None (not evaluated)
    without rainfall data."""
    if rain_events is None:
        return None
    h = np.asarray(levels, dtype=float)
    t = np.asarray(times, dtype=np.int64)
    window_s = window_hours * SECONDS_PER_HOUR
    for rain_t, rain_cm in rain_events:
        if rain_cm < min_rain_cm:
            continue
        sel = (t >= rain_t) & (t <= rain_t + window_s)
        if np.any(sel) and np.all(np.abs(h[sel]) <= accuracy_m):
            return True
    return False


def build_qc_report(
    ts: TimeSeries,
    rain_events=None,
    nominal_dt_hours: float = NOMINAL_DT_HOURS,
    tolerance_factor: float = GAP_TOLERANCE_FACTOR,
    dry_level_max: float = DRY_LEVEL_MAX_M,
    min_dry_hours: float = MIN_DRY_HOURS,
    drift_threshold: float = DRIFT_THRESHOLD_M,
    min_rain_cm: float = MIN_RAIN_CM,
    accuracy_m: float = SENSOR_ACCURACY_M,
) -> QCReport:
    """Assemble the per-site QC report; indeterminate drift maps to None."""
    ts.require_sorted()
    report = QCReport(site_id=ts.site_id, samples_total=len(ts))
    report.samples_valid = int(
        np.sum(np.isfinite(ts.levels) & (ts.levels >= MIN_VALID_DEPTH_M))
    )
    report.gaps = detect_gaps(ts.times, nominal_dt_hours, tolerance_factor)
    try:
        report.drift_m, report.drift_flag = detect_drift(
            ts.levels, ts.times, dry_level_max, min_dry_hours, drift_threshold
        )
    except IndeterminateDrift:
        report.drift_m = report.drift_flag = None
    report.dead_sensor_flag = detect_dead_sensor(
        ts.levels, ts.times, rain_events, min_rain_cm, accuracy_m
    )
    return report

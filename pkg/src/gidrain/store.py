"""File-backed reading store: append-only batch log plus per-site index.

Each accepted batch is one JSON line appended to the site's log, so a crash
leaves either a complete batch or a truncated final line that is dropped on
reload -- batches are visible all-or-nothing.  Upserts are idempotent and
keyed by (site, timestamp), last write wins.
"""

from __future__ import annotations

import json
import math
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadRequest, InvalidRange, NotFound
from .series import TimeSeries
from .stats import SiteRecord

MIN_DEPTH_M = -0.05  # deeper negatives are malformed, not dry-noise


@dataclass(frozen=True)
class Reading:
    """One water-level sample."""

    ts: int  # UTC epoch seconds
    depth_m: float
    battery_v: float | None = None
    flags: str | None = None


@dataclass
class ReadingBatch:
    """One hourly report from a sensor (nominally 6 readings)."""

    site_id: str
    readings: list[Reading] = field(default_factory=list)


def validate_reading(r: Reading) -> None:
    if not isinstance(r.ts, (int, np.integer)):
        raise BadRequest(f"timestamp must be integer epoch seconds, got {r.ts!r}")
    if not (isinstance(r.depth_m, (int, float)) and math.isfinite(r.depth_m)):
        raise BadRequest(f"depth must be finite, got {r.depth_m!r}")
    if r.depth_m < MIN_DEPTH_M:
        raise BadRequest(f"depth {r.depth_m} below tolerated minimum {MIN_DEPTH_M}")


class Store:
    """Self-contained persistent store for site metadata and readings."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "readings").mkdir(exist_ok=True)
        self._lock = threading.RLock()
        self._sites: dict[str, SiteRecord] = {}
        self._index: dict[str, dict[int, Reading]] = {}
        self._load()

    # -- persistence ---------------------------------------------------------

    def _sites_path(self) -> Path:
        return self.root / "sites.json"

    def _log_path(self, site_id: str) -> Path:
        return self.root / "readings" / f"{site_id}.jsonl"

    def _load(self) -> None:
        path = self._sites_path()
        if path.exists():
            raw = json.loads(path.read_text(encoding="utf-8"))
            for site_id, fields_ in raw.items():
                self._sites[site_id] = SiteRecord(site_id=site_id, **fields_)
        for site_id in self._sites:
            self._index[site_id] = self._replay_log(site_id)

    def _replay_log(self, site_id: str) -> dict[int, Reading]:
        index: dict[int, Reading] = {}
        path = self._log_path(site_id)
        if not path.exists():
            return index
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().split("\n")
        for k, line in enumerate(lines):
            if not line:
                continue
            try:
                batch = json.loads(line)
            except json.JSONDecodeError:
                if k == len(lines) - 1:
                    break  # torn final write: batch never became visible
                raise
            for ts, depth, batt, flags in batch["readings"]:
                index[int(ts)] = Reading(int(ts), float(depth), batt, flags)
        return index

    def _write_sites(self) -> None:
        payload = {}
        for site_id, rec in sorted(self._sites.items()):
            d = {k: v for k, v in rec.__dict__.items() if k != "site_id"}
            payload[site_id] = d
        tmp = self._sites_path().with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, indent=1, sort_keys=True), encoding="utf-8")
        os.replace(tmp, self._sites_path())

    # -- site registry -------------------------------------------------------

    def register_site(self, record: SiteRecord) -> None:
        with self._lock:
            self._sites[record.site_id] = record
            self._index.setdefault(record.site_id, {})
            self._write_sites()

    def site_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._sites)

    def site_record(self, site_id: str) -> SiteRecord:
        with self._lock:
            if site_id not in self._sites:
                raise NotFound(f"site {site_id!r} is not registered")
            return self._sites[site_id]

    def site_records(self) -> list[SiteRecord]:
        with self._lock:
            return [self._sites[s] for s in sorted(self._sites)]

    # -- readings ------------------------------------------------------------

    def ingest_batch(self, batch: ReadingBatch) -> int:
        """Append one batch durably and upsert it into the index.

        Returns the number of readings accepted (idempotent replays accept
        again without changing the store).
        """
        with self._lock:
            if batch.site_id not in self._sites:
                raise NotFound(f"site {batch.site_id!r} is not registered")
            for r in batch.readings:
                validate_reading(r)
            ts_seq = [r.ts for r in batch.readings]
            if any(b < a for a, b in zip(ts_seq, ts_seq[1:])):
                raise BadRequest("readings within a batch must be time-ordered")
            line = json.dumps(
                {"readings": [[r.ts, r.depth_m, r.battery_v, r.flags] for r in batch.readings]},
                separators=(",", ":"),
            )
            with open(self._log_path(batch.site_id), "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            index = self._index[batch.site_id]
            for r in batch.readings:
                index[r.ts] = r
            return len(batch.readings)

    def query_readings(
        self, site_id: str, start: int | None = None, end: int | None = None
    ) -> list[Reading]:
        """Time-ordered readings within the inclusive [start, end] range."""
        if start is not None and end is not None and start > end:
            raise InvalidRange(f"start {start} after end {end}")
        with self._lock:
            if site_id not in self._sites:
                raise NotFound(f"site {site_id!r} is not registered")
            out = [
                r
                for ts, r in sorted(self._index[site_id].items())
                if (start is None or ts >= start) and (end is None or ts <= end)
            ]
        return out

    def load_series(
        self, site_id: str, start: int | None = None, end: int | None = None
    ) -> TimeSeries:
        readings = self.query_readings(site_id, start, end)
        times = np.array([r.ts for r in readings], dtype=np.int64)
        levels = np.array([r.depth_m for r in readings], dtype=float)
        return TimeSeries(site_id, times, levels)

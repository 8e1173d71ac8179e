"""Delimited-text input formats and their writers.

All parsers are strict: missing required columns fail with the offending
name, unknown columns warn, malformed cells raise SchemaError with a line
number.  Timestamps must be ISO-8601 with an explicit zone.
"""

from __future__ import annotations

import csv
import warnings
from pathlib import Path

import numpy as np

from .errors import SchemaError
from .series import TimeSeries, format_timestamp, parse_timestamp
from .stats import LAND_USE_CODES, SOIL_GROUP_CODES, SiteRecord
from .store import Reading

TIMESERIES_COLUMNS = ("timestamp", "depth_m")
RAIN_COLUMNS = ("timestamp", "rain_cm")
SITE_REQUIRED_COLUMNS = (
    "site_id",
    "latitude",
    "longitude",
    "surface_area",
    "drainage_area",
    "storage_volume",
    "media_depth",
    "age",
    "imperviousness",
    "land_use",
    "elevation",
    "slope",
    "hydrologic_soil_group",
    "groundwater_depth",
)
SITE_OPTIONAL_COLUMNS = ("da_sa_ratio", "mean_alpha")


def _open_table(path, required, optional=()):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    for col in required:
        if col not in header:
            raise SchemaError(f"{path}: line 1: missing required column {col!r}")
    known = set(required) | set(optional)
    for col in header:
        if col not in known:
            warnings.warn(f"{path}: ignoring unknown column {col!r}")
    return header, rows[1:]


def _parse_ts(value: str, path, lineno: int) -> int:
    try:
        return parse_timestamp(value)
    except ValueError as exc:
        raise SchemaError(f"{path}: line {lineno}: {exc}") from exc


def _parse_float(value: str, column: str, path, lineno: int) -> float:
    try:
        return float(value)
    except ValueError as exc:
        raise SchemaError(
            f"{path}: line {lineno}: column {column!r}: not numeric: {value!r}"
        ) from exc


# ---------------------------------------------------------------------------
# Water-level time series
# ---------------------------------------------------------------------------

def parse_timeseries_file(path) -> list[Reading]:
    """Read `timestamp,depth_m[,battery_v]` rows into time-ordered readings.

    A repeated timestamp keeps its last occurrence (the upsert rule) and
    warns.
    """
    header, rows = _open_table(path, TIMESERIES_COLUMNS, optional=("battery_v",))
    col = {name: header.index(name) for name in header}
    by_ts: dict[int, Reading] = {}
    for k, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise SchemaError(f"{path}: line {k}: expected {len(header)} cells, got {len(row)}")
        ts = _parse_ts(row[col["timestamp"]], path, k)
        depth = _parse_float(row[col["depth_m"]], "depth_m", path, k)
        battery = None
        if "battery_v" in col and row[col["battery_v"]].strip():
            battery = _parse_float(row[col["battery_v"]], "battery_v", path, k)
        if ts in by_ts:
            warnings.warn(f"{path}: line {k}: duplicate timestamp; last occurrence wins")
        by_ts[ts] = Reading(ts, depth, battery)
    return [by_ts[ts] for ts in sorted(by_ts)]


def readings_to_series(site_id: str, readings: list[Reading]) -> TimeSeries:
    times = np.array([r.ts for r in readings], dtype=np.int64)
    levels = np.array([r.depth_m for r in readings], dtype=float)
    return TimeSeries(site_id, times, levels)


def write_timeseries_file(path, readings: list[Reading]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        has_battery = any(r.battery_v is not None for r in readings)
        fh.write("timestamp,depth_m,battery_v\n" if has_battery else "timestamp,depth_m\n")
        for r in readings:
            cells = [format_timestamp(r.ts), repr(float(r.depth_m))]
            if has_battery:
                cells.append("" if r.battery_v is None else repr(float(r.battery_v)))
            fh.write(",".join(cells) + "\n")


# ---------------------------------------------------------------------------
# Site feature table
# ---------------------------------------------------------------------------

def _parse_land_use(value: str, codes: dict[str, int], path, lineno: int) -> float:
    text = value.strip()
    try:
        return float(text)
    except ValueError:
        pass
    if text.lower() in codes:
        return float(codes[text.lower()])
    raise SchemaError(
        f"{path}: line {lineno}: unknown land_use {value!r} (known: {sorted(codes)})"
    )


def _parse_soil_group(value: str, codes: dict[str, int], path, lineno: int) -> float:
    text = value.strip()
    try:
        return float(text)
    except ValueError:
        pass
    if text.upper() in codes:
        return float(codes[text.upper()])
    raise SchemaError(
        f"{path}: line {lineno}: unknown hydrologic_soil_group {value!r} (known: {sorted(codes)})"
    )


def parse_site_table(
    path,
    land_use_codes: dict[str, int] | None = None,
    soil_group_codes: dict[str, int] | None = None,
) -> list[SiteRecord]:
    """Read the site feature table; blank cells become missing values.

    land_use accepts numeric codes or names from the (overridable) ordinal
    enumeration; hydrologic_soil_group accepts 1-4 or letters A-D.  A present
    da_sa_ratio must agree with drainage_area / surface_area.
    """
    land_use_codes = land_use_codes or LAND_USE_CODES
    soil_group_codes = soil_group_codes or SOIL_GROUP_CODES
    header, rows = _open_table(path, SITE_REQUIRED_COLUMNS, SITE_OPTIONAL_COLUMNS)
    col = {name: header.index(name) for name in header}
    records: list[SiteRecord] = []
    for k, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise SchemaError(f"{path}: line {k}: expected {len(header)} cells, got {len(row)}")

        def cell(name: str) -> str:
            return row[col[name]].strip() if name in col else ""

        def num(name: str) -> float | None:
            text = cell(name)
            return _parse_float(text, name, path, k) if text else None

        site_id = cell("site_id")
        if not site_id:
            raise SchemaError(f"{path}: line {k}: empty site_id")
        surface_area = num("surface_area")
        if surface_area is not None and surface_area <= 0:
            raise SchemaError(f"{path}: line {k}: surface_area must be > 0, got {surface_area}")
        land_use = (
            _parse_land_use(cell("land_use"), land_use_codes, path, k)
            if cell("land_use")
            else None
        )
        soil = (
            _parse_soil_group(cell("hydrologic_soil_group"), soil_group_codes, path, k)
            if cell("hydrologic_soil_group")
            else None
        )
        stated = num("da_sa_ratio")
        record = SiteRecord(
            site_id=site_id,
            latitude=num("latitude"),
            longitude=num("longitude"),
            surface_area=surface_area,
            drainage_area=num("drainage_area"),
            storage_volume=num("storage_volume"),
            media_depth=num("media_depth"),
            age=num("age"),
            da_sa_ratio=stated,
            imperviousness=num("imperviousness"),
            land_use=land_use,
            elevation=num("elevation"),
            slope=num("slope"),
            hydrologic_soil_group=soil,
            groundwater_depth=num("groundwater_depth"),
            mean_alpha=num("mean_alpha"),
        )
        if stated is not None and record.drainage_area and record.surface_area:
            derived = record.drainage_area / record.surface_area
            if abs(stated - derived) > 1e-6 * max(1.0, abs(derived)):
                raise SchemaError(
                    f"{path}: line {k}: da_sa_ratio {stated} != drainage_area/surface_area {derived}"
                )
        records.append(record)
    return records


def write_site_table(path, records: list[SiteRecord]) -> None:
    columns = list(SITE_REQUIRED_COLUMNS) + ["da_sa_ratio"]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for rec in records:
            cells = []
            for name in columns:
                v = getattr(rec, name)
                if v is None:
                    cells.append("")
                elif name == "site_id":
                    cells.append(str(v))
                else:
                    cells.append(repr(float(v)))
            fh.write(",".join(cells) + "\n")


# ---------------------------------------------------------------------------
# Rainfall record
# ---------------------------------------------------------------------------

def parse_rain_file(path) -> list[tuple[int, float]]:
    """Read `timestamp,rain_cm` rows into time-ordered (epoch s, cm) pairs."""
    header, rows = _open_table(path, RAIN_COLUMNS)
    col = {name: header.index(name) for name in header}
    events: list[tuple[int, float]] = []
    for k, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise SchemaError(f"{path}: line {k}: expected {len(header)} cells, got {len(row)}")
        ts = _parse_ts(row[col["timestamp"]], path, k)
        cm = _parse_float(row[col["rain_cm"]], "rain_cm", path, k)
        events.append((ts, cm))
    events.sort()
    return events


def write_rain_file(path, events: list[tuple[int, float]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("timestamp,rain_cm\n")
        for ts, cm in events:
            fh.write(f"{format_timestamp(ts)},{repr(float(cm))}\n")


def find_series_files(data_dir) -> dict[str, Path]:
    """Map site id -> series file for `series_<site>.csv` files in a directory."""
    out: dict[str, Path] = {}
    for p in sorted(Path(data_dir).glob("series_*.csv")):
        out[p.stem[len("series_"):]] = p
    return out

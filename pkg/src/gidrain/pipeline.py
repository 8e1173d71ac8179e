"""Pipeline stages and the deterministic report bundle.

Stage order: qc -> segmentation -> drawdown -> stats -> surface.  Every stage
persists its result as delimited text under the output directory, and every
stage can be re-run alone from the artifacts of the previous ones.  Outputs
carry no wall-clock state, so identical inputs produce byte-identical
bundles.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .drawdown import (
    DecayFit,
    SiteSummary,
    estimate_derivative,
    fit_site,
    fit_storm,
    ponding_durations,
    summarize_site,
    time_to_drain,
)
from .errors import (
    ConfigError,
    GidrainError,
    NonDecaying,
    NonUniformSampling,
    NotEnoughData,
    StageError,
)
from .fileio import parse_rain_file
from .qc import QCReport, build_qc_report, split_at_gaps
from .segmentation import StormEvent, align_with_rain, segment_storms
from .series import TimeSeries, format_timestamp
from .stats import correlation_matrix
from .store import Store
from .surface import SurfaceGrid, export_grid, fit_surface, render_heatmap

QC_FILE = "qc_report.txt"
STORMS_FILE = "storms.csv"
FITS_FILE = "fits.csv"
SUMMARY_FILE = "site_summary.csv"
CORRELATION_FILE = "correlation.csv"
CORRELATION_N_FILE = "correlation_n.csv"
SURFACE_FILE = "surface.csv"
HEATMAP_FILE = "surface.svg"
RUN_MANIFEST_FILE = "run_manifest.json"
BUNDLE_FILES = (
    QC_FILE, STORMS_FILE, FITS_FILE, SUMMARY_FILE,
    CORRELATION_FILE, CORRELATION_N_FILE, SURFACE_FILE, HEATMAP_FILE,
    RUN_MANIFEST_FILE,
)


def _fmt(value) -> str:
    """Stable cell formatting: repr round-trips floats exactly."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def open_store(cfg: RunConfig) -> Store:
    if not Path(cfg.store_dir).exists():
        raise ConfigError(f"store directory {cfg.store_dir} does not exist")
    return Store(cfg.store_dir)


def load_site_series(cfg: RunConfig, store: Store) -> dict[str, TimeSeries]:
    """All per-site series restricted to the configured analysis window."""
    out: dict[str, TimeSeries] = {}
    for site_id in store.site_ids():
        ts = store.load_series(site_id, cfg.window_start, cfg.window_end)
        if len(ts):
            out[site_id] = ts
    if not out:
        raise ConfigError(f"store {cfg.store_dir} holds no readings")
    return out


def load_rain(cfg: RunConfig) -> list[tuple[int, float]] | None:
    path = Path(cfg.store_dir) / "rain.csv"
    return parse_rain_file(path) if path.exists() else None


# ---------------------------------------------------------------------------
# Stage: QC
# ---------------------------------------------------------------------------

def stage_qc(cfg: RunConfig, series: dict[str, TimeSeries], out_dir) -> dict[str, QCReport]:
    rain = load_rain(cfg)
    reports: dict[str, QCReport] = {}
    for site_id in sorted(series):
        ts = series[site_id]
        reports[site_id] = build_qc_report(
            ts,
            rain_events=rain,
            nominal_dt_hours=cfg.qc.nominal_dt_hours,
            tolerance_factor=cfg.qc.gap_tolerance_factor,
            dry_level_max=cfg.qc.dry_level_max_m,
            min_dry_hours=cfg.qc.min_dry_hours,
            drift_threshold=cfg.qc.drift_threshold_m,
            min_rain_cm=cfg.qc.min_rain_cm,
            accuracy_m=cfg.qc.sensor_accuracy_m,
        )
    _write_qc(Path(out_dir) / QC_FILE, reports, cfg)
    return reports


def _write_qc(path: Path, reports: dict[str, QCReport], cfg: RunConfig) -> None:
    lines: list[str] = []
    for site_id in sorted(reports):
        r = reports[site_id]
        lines.append(f"site: {site_id}")
        lines.append(f"  samples_total: {r.samples_total}")
        lines.append(f"  samples_valid: {r.samples_valid}")
        lines.append(f"  gaps: {len(r.gaps)}")
        for g in r.gaps:
            lines.append(
                f"    gap_after: {format_timestamp(g.start)} duration_hours: {_fmt(g.duration_hours)}"
            )
        if r.drift_m is None:
            lines.append("  drift: indeterminate")
        else:
            lines.append(f"  drift_m: {_fmt(r.drift_m)}")
            lines.append(f"  drift_flag: {_fmt(r.drift_flag)}")
        if r.dead_sensor_flag is None:
            lines.append("  dead_sensor: not-evaluated")
        else:
            lines.append(f"  dead_sensor: {_fmt(r.dead_sensor_flag)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Stage: segmentation
# ---------------------------------------------------------------------------

def segment_series(cfg: RunConfig, ts: TimeSeries) -> list[StormEvent]:
    """Detect storms per contiguous analysis segment (split at long gaps) and
    map indices back to the full series."""
    if len(ts) < 3:
        return []
    dt_hours = ts.nominal_dt_hours()
    params = cfg.segmentation.params_for(ts.site_id, dt_hours)
    storms: list[StormEvent] = []
    for lo, hi in split_at_gaps(ts.times, cfg.qc.split_gap_hours):
        if hi - lo + 1 < 3:
            continue
        for ev in segment_storms(ts.levels[lo : hi + 1], params, site_id=ts.site_id):
            storms.append(
                StormEvent(
                    site_id=ev.site_id,
                    start_idx=ev.start_idx + lo,
                    peak_idx=ev.peak_idx + lo,
                    end_idx=ev.end_idx + lo,
                    peak_level=ev.peak_level,
                    prominence=ev.prominence,
                )
            )
    return storms


def stage_segment(
    cfg: RunConfig, series: dict[str, TimeSeries], out_dir
) -> dict[str, list[StormEvent]]:
    storms = {site_id: segment_series(cfg, series[site_id]) for site_id in sorted(series)}
    rain = load_rain(cfg)
    _write_storms(Path(out_dir) / STORMS_FILE, storms, series, rain)
    return storms


def _rain_matches(
    storms: list[StormEvent], ts: TimeSeries, rain: list[tuple[int, float]] | None
) -> dict[int, int]:
    """Storm position -> matched rain timestamp, for the storm-table cross-check."""
    if not rain:
        return {}
    peak_times = np.array([ts.times[ev.peak_idx] for ev in storms])
    report = align_with_rain(storms, peak_times, rain)
    return {k: rain[r][0] for k, r in report.matched}


def _write_storms(
    path: Path,
    storms: dict[str, list[StormEvent]],
    series: dict[str, TimeSeries],
    rain: list[tuple[int, float]] | None = None,
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "site_id", "storm", "start", "peak", "end",
                "start_idx", "peak_idx", "end_idx", "peak_level_m", "prominence_m",
                "rain_matched",
            ]
        )
        for site_id in sorted(storms):
            ts = series[site_id]
            matches = _rain_matches(storms[site_id], ts, rain)
            for k, ev in enumerate(storms[site_id], start=1):
                writer.writerow(
                    [
                        site_id,
                        k,
                        format_timestamp(ts.times[ev.start_idx]),
                        format_timestamp(ts.times[ev.peak_idx]),
                        format_timestamp(ts.times[ev.end_idx]),
                        ev.start_idx,
                        ev.peak_idx,
                        ev.end_idx,
                        _fmt(ev.peak_level),
                        _fmt(ev.prominence),
                        format_timestamp(matches[k - 1]) if k - 1 in matches else "",
                    ]
                )


def load_storms(out_dir) -> dict[str, list[StormEvent]]:
    """Re-hydrate the segmentation artifact."""
    path = Path(out_dir) / STORMS_FILE
    if not path.exists():
        raise ConfigError(f"missing artifact {STORMS_FILE}; run the segment stage first")
    storms: dict[str, list[StormEvent]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            storms.setdefault(row["site_id"], []).append(
                StormEvent(
                    site_id=row["site_id"],
                    start_idx=int(row["start_idx"]),
                    peak_idx=int(row["peak_idx"]),
                    end_idx=int(row["end_idx"]),
                    peak_level=float(row["peak_level_m"]),
                    prominence=float(row["prominence_m"]),
                )
            )
    return storms


# ---------------------------------------------------------------------------
# Stage: drawdown fitting and site summaries
# ---------------------------------------------------------------------------

def fit_all_storms(
    cfg: RunConfig, series: dict[str, TimeSeries], storms: dict[str, list[StormEvent]]
) -> dict[str, list[tuple[StormEvent, DecayFit | None, str]]]:
    """(storm, fit, note) triples per site; fit is None when the recession
    cannot be fit, with the reason in the note."""
    results: dict[str, list[tuple[StormEvent, DecayFit | None, str]]] = {}
    for site_id in sorted(storms):
        ts = series[site_id]
        t_hours = ts.times_hours()
        rows = []
        for ev in storms[site_id]:
            try:
                fit = fit_storm(ev, ts.levels, t_hours, intercept=cfg.drawdown.intercept)
                note = "excluded: r_squared < 0" if fit.excluded else ""
            except (NotEnoughData, NonDecaying, NonUniformSampling) as exc:
                fit, note = None, f"skipped: {exc}"
            rows.append((ev, fit, note))
        results[site_id] = rows
    return results


def pooled_site_fit(
    cfg: RunConfig, ts: TimeSeries, rows: list[tuple[StormEvent, DecayFit | None, str]]
) -> DecayFit | None:
    """Pooled (level, rate) regression over the non-excluded recessions."""
    t_hours = ts.times_hours()
    pairs = []
    for ev, fit, _note in rows:
        if fit is None or fit.excluded:
            continue
        sl = ev.recession_slice()
        pairs.append(estimate_derivative(ts.levels[sl], t_hours[sl]))
    if not pairs:
        return None
    try:
        return fit_site(pairs, intercept=cfg.drawdown.intercept)
    except (NonDecaying, NotEnoughData):
        return None


def stage_fit(
    cfg: RunConfig,
    series: dict[str, TimeSeries],
    out_dir,
    storms: dict[str, list[StormEvent]] | None = None,
) -> tuple[dict[str, list[tuple[StormEvent, DecayFit | None, str]]], dict[str, SiteSummary]]:
    if storms is None:
        storms = load_storms(out_dir)
    fits = fit_all_storms(cfg, series, storms)
    summaries: dict[str, SiteSummary] = {}
    for site_id in sorted(series):
        rows = fits.get(site_id, [])
        ts = series[site_id]
        episodes = ponding_durations(
            ts.levels,
            ts.nominal_dt_hours() if len(ts) > 1 else 0.0,
            cfg.drawdown.ponding_threshold_m,
            cfg.drawdown.ponding_limit_hours,
        )
        max_ponding = max((e.duration_hours for e in episodes), default=0.0)
        summaries[site_id] = summarize_site(
            site_id,
            [fit for _ev, fit, _n in rows if fit is not None],
            storms_identified=len(rows),
            max_ponding_hours=max_ponding,
        )
    pooled = {
        site_id: pooled_site_fit(cfg, series[site_id], fits.get(site_id, []))
        for site_id in sorted(series)
    }
    _write_fits(Path(out_dir) / FITS_FILE, fits)
    _write_summary(Path(out_dir) / SUMMARY_FILE, summaries, pooled, cfg)
    return fits, summaries


def _write_fits(path: Path, fits) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "site_id", "storm", "alpha_hr", "offset_b_m", "scale_C_m",
                "r_squared", "rmse_m", "n_samples", "excluded", "note",
            ]
        )
        for site_id in sorted(fits):
            for k, (ev, fit, note) in enumerate(fits[site_id], start=1):
                if fit is None:
                    writer.writerow([site_id, k, "", "", "", "", "", "", "", note])
                else:
                    writer.writerow(
                        [
                            site_id, k,
                            _fmt(fit.alpha), _fmt(fit.offset_b), _fmt(fit.scale_C),
                            _fmt(fit.r_squared), _fmt(fit.rmse), fit.n_samples,
                            _fmt(fit.excluded), note,
                        ]
                    )


def _write_summary(path: Path, summaries, pooled, cfg: RunConfig) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "site_id", "storms_identified", "storms_analyzed",
                "mean_alpha_hr", "mean_rmse_m", "mean_r_squared",
                "pooled_alpha_hr", "drain_1m_to_1cm_hours",
                "max_ponding_hours", "ponding_compliant",
            ]
        )
        for site_id in sorted(summaries):
            s = summaries[site_id]
            p = pooled.get(site_id)
            drain = time_to_drain(p.alpha, 1.0, 0.01) if p and p.alpha < 0 else None
            compliant = (
                s.max_ponding_hours is not None
                and s.max_ponding_hours <= cfg.drawdown.ponding_limit_hours
            )
            writer.writerow(
                [
                    s.site_id, s.storms_identified, s.storms_analyzed,
                    _fmt(s.mean_alpha), _fmt(s.mean_rmse), _fmt(s.mean_r_squared),
                    _fmt(p.alpha if p else None), _fmt(drain),
                    _fmt(s.max_ponding_hours), _fmt(compliant),
                ]
            )


def load_summaries(out_dir) -> dict[str, SiteSummary]:
    path = Path(out_dir) / SUMMARY_FILE
    if not path.exists():
        raise ConfigError(f"missing artifact {SUMMARY_FILE}; run the fit stage first")
    summaries: dict[str, SiteSummary] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            summaries[row["site_id"]] = SiteSummary(
                site_id=row["site_id"],
                storms_identified=int(row["storms_identified"]),
                storms_analyzed=int(row["storms_analyzed"]),
                mean_alpha=float(row["mean_alpha_hr"]) if row["mean_alpha_hr"] else None,
                mean_rmse=float(row["mean_rmse_m"]) if row["mean_rmse_m"] else None,
                mean_r_squared=float(row["mean_r_squared"]) if row["mean_r_squared"] else None,
                max_ponding_hours=(
                    float(row["max_ponding_hours"]) if row["max_ponding_hours"] else None
                ),
            )
    return summaries


# ---------------------------------------------------------------------------
# Stage: correlation
# ---------------------------------------------------------------------------

def joined_records(store: Store, summaries: dict[str, SiteSummary]):
    records = []
    for rec in store.site_records():
        s = summaries.get(rec.site_id)
        rec.mean_alpha = s.mean_alpha if s else None
        records.append(rec)
    return records


def stage_correlate(cfg: RunConfig, store: Store, out_dir, summaries=None):
    if summaries is None:
        summaries = load_summaries(out_dir)
    records = joined_records(store, summaries)
    matrix = correlation_matrix(records, cfg.stats.features)
    _write_matrix(Path(out_dir) / CORRELATION_FILE, matrix.labels, matrix.rho)
    _write_matrix(Path(out_dir) / CORRELATION_N_FILE, matrix.labels, matrix.n_effective)
    return matrix


def _write_matrix(path: Path, labels, values) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["feature"] + list(labels))
        for i, label in enumerate(labels):
            row = [label]
            for j in range(len(labels)):
                v = values[i, j]
                if isinstance(v, (np.integer, int)):
                    row.append(str(int(v)))
                else:
                    row.append("NA" if np.isnan(v) else repr(float(v)))
            writer.writerow(row)


# ---------------------------------------------------------------------------
# Stage: surface
# ---------------------------------------------------------------------------

def stage_surface(cfg: RunConfig, store: Store, out_dir, summaries=None) -> SurfaceGrid:
    if summaries is None:
        summaries = load_summaries(out_dir)
    records = joined_records(store, summaries)
    points = [
        (r.groundwater_depth, r.da_sa_ratio, r.mean_alpha)
        for r in records
        if None not in (r.groundwater_depth, r.da_sa_ratio, r.mean_alpha)
    ]
    if not points:
        raise ConfigError("no sites carry groundwater_depth, da_sa_ratio and mean_alpha")
    grid = fit_surface(points, resolution=cfg.surface.resolution)
    export_grid(grid, Path(out_dir) / SURFACE_FILE)
    render_heatmap(grid, Path(out_dir) / HEATMAP_FILE)
    return grid


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------

def run_pipeline(cfg: RunConfig) -> dict:
    """Execute qc -> segment -> fit -> correlate -> surface and write the
    report bundle plus a run manifest of every parameter."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    store = open_store(cfg)
    series = load_site_series(cfg, store)

    def run_stage(name, fn):
        try:
            return fn()
        except GidrainError as exc:
            raise StageError(name, exc) from exc

    run_stage("qc", lambda: stage_qc(cfg, series, out))
    storms = run_stage("segment", lambda: stage_segment(cfg, series, out))
    fits, summaries = run_stage("fit", lambda: stage_fit(cfg, series, out, storms))
    matrix = run_stage("correlate", lambda: stage_correlate(cfg, store, out, summaries))
    run_stage("surface", lambda: stage_surface(cfg, store, out, summaries))

    manifest = {
        "version": __version__,
        "config": cfg.to_dict(),
        "sites": sorted(series),
        "storms_identified": {s: len(storms[s]) for s in sorted(storms)},
        "storms_analyzed": {s: summaries[s].storms_analyzed for s in sorted(summaries)},
        "correlation_labels": matrix.labels,
        "artifacts": [name for name in BUNDLE_FILES if name != RUN_MANIFEST_FILE],
    }
    with open(out / RUN_MANIFEST_FILE, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return manifest

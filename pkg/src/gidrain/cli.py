"""Command-line entry point wiring the full toolchain.

Subcommands: simulate | serve | ingest | qc | segment | fit | correlate |
surface | report.  Every subcommand accepts --config, --seed and --out.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import RunConfig, load_config
from .errors import ConfigError, GidrainError
from .fileio import find_series_files, parse_rain_file, parse_site_table, parse_timeseries_file
from .pipeline import (
    load_site_series,
    load_storms,
    open_store,
    run_pipeline,
    stage_correlate,
    stage_fit,
    stage_qc,
    stage_segment,
    stage_surface,
)
from .service import serve
from .store import ReadingBatch, Store
from .synth import generate_network


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gidrain",
        description="Green-infrastructure water-level analytics toolchain",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", "-c", type=Path, default=None, help="JSON run config")
        p.add_argument("--seed", type=int, default=None, help="override the run seed")
        p.add_argument("--out", "-o", type=Path, default=None, help="output directory")
        return p

    p = add("simulate", "generate a synthetic sensor network with known truth")
    p.add_argument("--sites", type=int, default=14)
    p.add_argument("--days", type=float, default=76.0)
    p.add_argument("--storms", type=int, default=None, help="network storm count")
    p.add_argument("--sigma", type=float, default=0.005, help="noise level (m)")

    p = add("ingest", "load dataset files (sites.csv, series_*.csv, rain.csv) into the store")
    p.add_argument("--data", type=Path, required=True, help="dataset directory")

    p = add("serve", "run the HTTP ingestion service until interrupted")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--host", default="127.0.0.1")

    add("qc", "write the data-quality report")
    p = add("segment", "detect storm events and write the storm table")
    p.add_argument("--site", default=None, help="restrict to one site")
    p = add("fit", "fit the drawdown model per storm and per site")
    p.add_argument("--site", default=None, help="restrict to one site")
    p.add_argument("--storm-id", default=None, help="print one fit, e.g. S1:3")
    add("correlate", "rank-correlate mean decay constants against site features")
    add("surface", "grid + heatmap of decay constants over (groundwater, DA/SA)")
    add("report", "run the full pipeline and write the report bundle")
    return parser


def _load_cfg(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    return cfg


def _require_out(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_simulate(cfg: RunConfig, args) -> int:
    out = _require_out(cfg)
    manifest, records, _rain, series = generate_network(
        n_sites=args.sites,
        seed=cfg.seed,
        duration_days=args.days,
        n_storms=args.storms,
        noise_sigma=args.sigma,
        out_dir=out,
    )
    total = sum(len(s) for s in series.values())
    print(f"wrote {len(records)} sites, {total} readings, manifest.json under {out}")
    return 0


def _cmd_ingest(cfg: RunConfig, args) -> int:
    data = Path(args.data)
    sites_path = data / "sites.csv"
    if not sites_path.exists():
        raise ConfigError(f"{sites_path} not found")
    store = Store(cfg.store_dir)
    records = parse_site_table(
        sites_path, cfg.stats.land_use_codes, cfg.stats.soil_group_codes
    )
    for rec in records:
        store.register_site(rec)
    series_files = find_series_files(data)
    accepted = 0
    for site_id, path in sorted(series_files.items()):
        readings = parse_timeseries_file(path)
        accepted += store.ingest_batch(ReadingBatch(site_id, readings))
    rain_path = data / "rain.csv"
    if rain_path.exists():
        parse_rain_file(rain_path)  # validate before adopting
        (Path(cfg.store_dir) / "rain.csv").write_bytes(rain_path.read_bytes())
    print(f"registered {len(records)} sites, accepted {accepted} readings into {cfg.store_dir}")
    return 0


def _cmd_serve(cfg: RunConfig, args) -> int:
    store = Store(cfg.store_dir)
    serve(store, host=args.host, port=args.port if args.port is not None else cfg.service_port)
    return 0


def _filter_sites(mapping: dict, site: str | None) -> dict:
    if site is None:
        return mapping
    if site not in mapping:
        raise ConfigError(f"site {site!r} not present in the store")
    return {site: mapping[site]}


def _cmd_fit(cfg: RunConfig, args) -> int:
    out = _require_out(cfg)
    store = open_store(cfg)
    series = _filter_sites(load_site_series(cfg, store), args.site)
    storms = load_storms(out)
    storms = {s: storms.get(s, []) for s in series}
    fits, _summaries = stage_fit(cfg, series, out, storms)
    if args.storm_id:
        try:
            site_id, ordinal = args.storm_id.rsplit(":", 1)
            k = int(ordinal)
        except ValueError:
            raise ConfigError(f"--storm-id must look like SITE:N, got {args.storm_id!r}")
        rows = fits.get(site_id, [])
        if not 1 <= k <= len(rows):
            raise ConfigError(f"storm {args.storm_id!r} not found ({len(rows)} storms)")
        _ev, fit, note = rows[k - 1]
        if fit is None:
            print(f"{args.storm_id}: {note}")
        else:
            print(
                f"{args.storm_id}: alpha={fit.alpha:.6g} 1/hr b={fit.offset_b:.6g} m "
                f"C={fit.scale_C:.6g} m r2={fit.r_squared:.4f} rmse={fit.rmse:.6g} m "
                f"n={fit.n_samples} excluded={fit.excluded}"
            )
    else:
        analyzed = sum(
            1 for rows in fits.values() for _e, f, _n in rows if f is not None and not f.excluded
        )
        print(f"fit {analyzed} analyzable storms; wrote fits.csv and site_summary.csv")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_cfg(args)
        if args.command == "simulate":
            return _cmd_simulate(cfg, args)
        if args.command == "ingest":
            return _cmd_ingest(cfg, args)
        if args.command == "serve":
            return _cmd_serve(cfg, args)
        if args.command == "qc":
            out = _require_out(cfg)
            store = open_store(cfg)
            reports = stage_qc(cfg, load_site_series(cfg, store), out)
            print(f"qc report for {len(reports)} sites -> {out / 'qc_report.txt'}")
            return 0
        if args.command == "segment":
            out = _require_out(cfg)
            store = open_store(cfg)
            series = _filter_sites(load_site_series(cfg, store), args.site)
            storms = stage_segment(cfg, series, out)
            total = sum(len(v) for v in storms.values())
            print(f"identified {total} storms across {len(storms)} site(s) -> storms.csv")
            return 0
        if args.command == "fit":
            return _cmd_fit(cfg, args)
        if args.command == "correlate":
            out = _require_out(cfg)
            store = open_store(cfg)
            matrix = stage_correlate(cfg, store, out)
            print(f"correlation matrix over {len(matrix.labels)} features -> correlation.csv")
            return 0
        if args.command == "surface":
            out = _require_out(cfg)
            store = open_store(cfg)
            stage_surface(cfg, store, out)
            print("surface grid -> surface.csv, heatmap -> surface.svg")
            return 0
        if args.command == "report":
            manifest = run_pipeline(cfg)
            print(
                f"report bundle in {cfg.out_dir}: "
                f"{sum(manifest['storms_identified'].values())} storms across "
                f"{len(manifest['sites'])} sites"
            )
            return 0
        raise ConfigError(f"unknown command {args.command!r}")
    except GidrainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Synthetic sensor networks with known ground truth.

Water levels evolve as a superposition of exponentially decaying storm jumps
over a site baseline, so every recession satisfies the fitted model class
exactly and estimator error can be separated from model error.  Generation is
deterministic for a fixed seed: all randomness comes from numpy's PCG64
generator, seeded as default_rng([seed]) for network structure and
default_rng([seed, site_index]) for per-site noise, with a fixed draw order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidManifest
from .series import TimeSeries, format_timestamp, parse_timestamp
from .stats import SiteRecord
from .store import Reading

DEFAULT_START = "2021-06-15T00:00:00Z"
#: Observed network extremes for the decay constant (hr^-1); synthetic sites
#: span this range.
ALPHA_FASTEST = -0.397
ALPHA_SLOWEST = -0.011


@dataclass
class SiteTruth:
    """Ground truth for one synthetic site."""

    site_id: str
    alpha_true: float  # hr^-1, negative
    b_true: float = 0.0  # asymptotic residual level, m
    noise_sigma: float = 0.0  # m
    storms: list[tuple[int, float]] = field(default_factory=list)  # (epoch s, jump m)
    drift_total_m: float = 0.0  # linear ramp over the full span
    dead_windows: list[tuple[int, int]] = field(default_factory=list)  # epoch s

    def validate(self) -> "SiteTruth":
        if not self.alpha_true < 0:
            raise InvalidManifest(f"{self.site_id}: alpha_true must be < 0, got {self.alpha_true}")
        if self.noise_sigma < 0:
            raise InvalidManifest(f"{self.site_id}: noise_sigma must be >= 0")
        return self


@dataclass
class TruthManifest:
    """Everything needed to regenerate and verify a synthetic dataset."""

    seed: int
    start: int  # epoch s
    duration_hours: float
    dt_minutes: float
    feature_rule: str
    sites: list[SiteTruth] = field(default_factory=list)

    def site(self, site_id: str) -> SiteTruth:
        for s in self.sites:
            if s.site_id == site_id:
                return s
        raise KeyError(site_id)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "start": format_timestamp(self.start),
            "duration_hours": self.duration_hours,
            "dt_minutes": self.dt_minutes,
            "feature_rule": self.feature_rule,
            "sites": [
                {
                    "site_id": s.site_id,
                    "alpha_true": s.alpha_true,
                    "b_true": s.b_true,
                    "noise_sigma": s.noise_sigma,
                    "storms": [[format_timestamp(t), j] for t, j in s.storms],
                    "drift_total_m": s.drift_total_m,
                    "dead_windows": [
                        [format_timestamp(a), format_timestamp(b)] for a, b in s.dead_windows
                    ],
                }
                for s in self.sites
            ],
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "TruthManifest":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        sites = [
            SiteTruth(
                site_id=s["site_id"],
                alpha_true=s["alpha_true"],
                b_true=s["b_true"],
                noise_sigma=s["noise_sigma"],
                storms=[(parse_timestamp(t), float(j)) for t, j in s["storms"]],
                drift_total_m=s.get("drift_total_m", 0.0),
                dead_windows=[
                    (parse_timestamp(a), parse_timestamp(b)) for a, b in s.get("dead_windows", [])
                ],
            )
            for s in raw["sites"]
        ]
        return cls(
            seed=raw["seed"],
            start=parse_timestamp(raw["start"]),
            duration_hours=raw["duration_hours"],
            dt_minutes=raw["dt_minutes"],
            feature_rule=raw["feature_rule"],
            sites=sites,
        )


# ---------------------------------------------------------------------------
# Series generation
# ---------------------------------------------------------------------------

def generate_site_series(
    truth: SiteTruth,
    start: int,
    duration_hours: float,
    dt_minutes: float = 10.0,
    rng: np.random.Generator | None = None,
) -> TimeSeries:
    """Generate one site's level series from its ground truth.

    level(t) = b + sum over past storms of J_k * exp(alpha * (t - t_k)),
    plus optional drift ramp, dead windows, and Gaussian noise, floored at 0.
    """
    truth.validate()
    dt_s = int(round(dt_minutes * 60))
    n = int(round(duration_hours * 3600 / dt_s)) + 1
    times = start + np.arange(n, dtype=np.int64) * dt_s
    t_hours = (times - start) / 3600.0
    levels = np.full(n, float(truth.b_true))
    for t_k, jump in truth.storms:
        rel = t_hours - (t_k - start) / 3600.0
        active = rel >= 0
        levels[active] += jump * np.exp(truth.alpha_true * rel[active])
    if truth.drift_total_m:
        levels += truth.drift_total_m * (t_hours / t_hours[-1])
    for a, b in truth.dead_windows:
        levels[(times >= a) & (times <= b)] = 0.0
    if truth.noise_sigma > 0:
        if rng is None:
            rng = np.random.default_rng()
        levels = levels + rng.normal(0.0, truth.noise_sigma, n)
    return TimeSeries(truth.site_id, times, np.maximum(levels, 0.0))


def _storm_calendar(
    rng: np.random.Generator, start: int, duration_hours: float, n_storms: int,
    min_separation_hours: float = 12.0, dt_minutes: float = 10.0,
) -> list[tuple[int, float]]:
    """Grid-aligned storm times with a minimum separation, plus rain depths."""
    dt_s = int(round(dt_minutes * 60))
    lead_s = int(12 * 3600)
    tail_s = int(24 * 3600)
    span_s = int(duration_hours * 3600) - lead_s - tail_s
    min_sep_s = int(min_separation_hours * 3600)
    if span_s < (n_storms - 1) * min_sep_s:
        raise InvalidManifest(
            f"{n_storms} storms with {min_separation_hours} h separation "
            f"do not fit into {duration_hours} h"
        )
    # rejection-free: draw slack between consecutive storms, then normalize
    slack = rng.uniform(0.0, 1.0, n_storms)
    slack = slack / slack.sum() * (span_s - (n_storms - 1) * min_sep_s)
    offsets = lead_s + np.cumsum(slack) + np.arange(n_storms) * min_sep_s
    times = start + (np.round(offsets / dt_s).astype(np.int64)) * dt_s
    depths = np.round(rng.uniform(1.5, 8.0, n_storms), 2)
    return [(int(t), float(d)) for t, d in zip(times, depths)]


def generate_network(
    n_sites: int = 14,
    seed: int = 0,
    duration_days: float = 76.0,
    dt_minutes: float = 10.0,
    n_storms: int | None = None,
    noise_sigma: float = 0.005,
    feature_rule: str = "alpha-decreasing-in-groundwater-depth",
    start: str | int = DEFAULT_START,
    out_dir=None,
) -> tuple[TruthManifest, list[SiteRecord], list[tuple[int, float]], dict[str, TimeSeries]]:
    """Build a synthetic network: site table, rainfall record, per-site
    series, and the truth manifest.

    The default feature rule ties alpha_true strictly decreasing to the
    synthetic groundwater depth (deeper water table drains faster), spanning
    the observed alpha range; all other features are uncorrelated noise.
    With *out_dir* set, writes sites.csv, rain.csv, series_<site>.csv and
    manifest.json there.
    """
    if n_sites < 1:
        raise InvalidManifest(f"n_sites must be >= 1, got {n_sites}")
    if feature_rule != "alpha-decreasing-in-groundwater-depth":
        raise InvalidManifest(f"unknown feature rule {feature_rule!r}")
    start_ts = parse_timestamp(start) if isinstance(start, str) else int(start)
    duration_hours = duration_days * 24.0
    rng = np.random.default_rng([seed])

    # network-wide storm calendar; every site responds to every storm
    if n_storms is None:
        n_storms = max(1, int(duration_days / 3.8))
    calendar = _storm_calendar(rng, start_ts, duration_hours, n_storms, dt_minutes=dt_minutes)

    gw_depth = np.linspace(1.5, 12.0, n_sites) + (
        rng.uniform(-0.2, 0.2, n_sites) if n_sites > 1 else np.zeros(1)
    )
    alphas = -np.geomspace(-ALPHA_SLOWEST, -ALPHA_FASTEST, n_sites)

    records: list[SiteRecord] = []
    manifest = TruthManifest(
        seed=seed,
        start=start_ts,
        duration_hours=duration_hours,
        dt_minutes=dt_minutes,
        feature_rule=feature_rule,
    )
    series: dict[str, TimeSeries] = {}
    for i in range(n_sites):
        site_id = f"S{i + 1}"
        surface = float(np.round(rng.uniform(15.0, 400.0), 1))
        dasa = float(np.round(rng.uniform(1.0, 10.0), 2))
        response = rng.uniform(0.8, 1.3)
        b_true = 0.0 if rng.uniform() < 0.7 else float(np.round(rng.uniform(0.01, 0.05), 3))
        records.append(
            SiteRecord(
                site_id=site_id,
                latitude=float(np.round(rng.uniform(42.28, 42.45), 5)),
                longitude=float(np.round(rng.uniform(-83.25, -82.95), 5)),
                surface_area=surface,
                drainage_area=float(np.round(surface * dasa, 1)),
                storage_volume=float(np.round(surface * rng.uniform(0.2, 0.5), 1)),
                media_depth=float(np.round(rng.uniform(0.3, 1.0), 2)),
                age=float(np.round(rng.uniform(1.0, 8.0), 1)),
                imperviousness=float(np.round(rng.uniform(20.0, 95.0), 1)),
                land_use=float(rng.integers(1, 6)),
                elevation=float(np.round(rng.uniform(170.0, 200.0), 1)),
                slope=float(np.round(rng.uniform(0.5, 5.0), 2)),
                hydrologic_soil_group=float(rng.integers(1, 5)),
                groundwater_depth=float(np.round(gw_depth[i], 2)),
            )
        )
        storms = [
            (t, float(np.clip(0.11 * depth * response, 0.18, 0.95)))
            for t, depth in calendar
        ]
        truth = SiteTruth(
            site_id=site_id,
            alpha_true=float(alphas[i]),
            b_true=b_true,
            noise_sigma=noise_sigma,
            storms=storms,
        ).validate()
        manifest.sites.append(truth)
        site_rng = np.random.default_rng([seed, i])
        series[site_id] = generate_site_series(
            truth, start_ts, duration_hours, dt_minutes, rng=site_rng
        )

    rain = [(t - 1800, d) for t, d in calendar]  # gauge record leads the response

    if out_dir is not None:
        write_dataset(out_dir, manifest, records, rain, series)
    return manifest, records, rain, series


def write_dataset(
    out_dir,
    manifest: TruthManifest,
    records: list[SiteRecord],
    rain: list[tuple[int, float]],
    series: dict[str, TimeSeries],
) -> None:
    """Write the dataset in the formats the ingestion layer reads."""
    from .fileio import write_rain_file, write_site_table, write_timeseries_file

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_site_table(out / "sites.csv", records)
    write_rain_file(out / "rain.csv", rain)
    for site_id in sorted(series):
        ts = series[site_id]
        readings = [Reading(int(t), float(d)) for t, d in zip(ts.times, ts.levels)]
        write_timeseries_file(out / f"series_{site_id}.csv", readings)
    manifest.save(out / "manifest.json")

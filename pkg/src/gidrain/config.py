"""Run configuration: JSON file with network defaults and per-site overrides.

Environment variables GIDRAIN_STORE_DIR and GIDRAIN_PORT override the store
directory and service port.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from . import qc, segmentation
from .errors import ConfigError
from .segmentation import PeakParams
from .series import parse_timestamp
from .stats import DEFAULT_FEATURES, LAND_USE_CODES, SOIL_GROUP_CODES

ENV_STORE_DIR = "GIDRAIN_STORE_DIR"
ENV_PORT = "GIDRAIN_PORT"


@dataclass
class SegmentationConfig:
    prominence_m: float = segmentation.DEFAULT_PROMINENCE_M
    distance_hours: float = segmentation.DEFAULT_DISTANCE_HOURS
    per_site: dict[str, dict] = field(default_factory=dict)

    def params_for(self, site_id: str, dt_hours: float) -> PeakParams:
        override = self.per_site.get(site_id, {})
        return PeakParams.from_spacing(
            float(override.get("prominence_m", self.prominence_m)),
            float(override.get("distance_hours", self.distance_hours)),
            dt_hours,
        )


@dataclass
class QCConfig:
    nominal_dt_minutes: float = 10.0
    gap_tolerance_factor: float = qc.GAP_TOLERANCE_FACTOR
    split_gap_hours: float = qc.SPLIT_GAP_HOURS
    dry_level_max_m: float = qc.DRY_LEVEL_MAX_M
    min_dry_hours: float = qc.MIN_DRY_HOURS
    drift_threshold_m: float = qc.DRIFT_THRESHOLD_M
    min_rain_cm: float = qc.MIN_RAIN_CM
    sensor_accuracy_m: float = qc.SENSOR_ACCURACY_M

    @property
    def nominal_dt_hours(self) -> float:
        return self.nominal_dt_minutes / 60.0


@dataclass
class DrawdownConfig:
    intercept: bool = True  # line fit includes an intercept (offset b)
    ponding_threshold_m: float = 1.0
    ponding_limit_hours: float = 24.0


@dataclass
class StatsConfig:
    features: list[str] = field(default_factory=lambda: list(DEFAULT_FEATURES))
    land_use_codes: dict[str, int] = field(default_factory=lambda: dict(LAND_USE_CODES))
    soil_group_codes: dict[str, int] = field(default_factory=lambda: dict(SOIL_GROUP_CODES))


@dataclass
class SurfaceConfig:
    resolution: int = 50


@dataclass
class RunConfig:
    store_dir: Path = Path("store")
    out_dir: Path = Path("out")
    seed: int = 0
    service_port: int = 8765
    window_start: int | None = None  # epoch s
    window_end: int | None = None
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    qc: QCConfig = field(default_factory=QCConfig)
    drawdown: DrawdownConfig = field(default_factory=DrawdownConfig)
    stats: StatsConfig = field(default_factory=StatsConfig)
    surface: SurfaceConfig = field(default_factory=SurfaceConfig)

    def validate(self) -> "RunConfig":
        if (
            self.window_start is not None
            and self.window_end is not None
            and not self.window_start < self.window_end
        ):
            raise ConfigError("window start must precede window end")
        return self

    def to_dict(self) -> dict:
        return {
            "store_dir": str(self.store_dir),
            "out_dir": str(self.out_dir),
            "seed": self.seed,
            "service_port": self.service_port,
            "window_start": self.window_start,
            "window_end": self.window_end,
            "segmentation": self.segmentation.__dict__,
            "qc": self.qc.__dict__,
            "drawdown": self.drawdown.__dict__,
            "stats": self.stats.__dict__,
            "surface": self.surface.__dict__,
        }


_SECTIONS = {"segmentation": SegmentationConfig, "qc": QCConfig,
             "drawdown": DrawdownConfig, "stats": StatsConfig, "surface": SurfaceConfig}
_TOP_KEYS = {"store_dir", "out_dir", "seed", "service_port", "window"} | set(_SECTIONS)


def _build_section(cls, raw, name: str):
    if not isinstance(raw, dict):
        raise ConfigError(f"section {name!r} must be an object")
    known = set(cls().__dict__)
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown key {name}.{key!r}")
    return cls(**raw)


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Load the JSON run config (defaults when *path* is None), then apply
    environment and explicit overrides."""
    raw: dict = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        try:
            raw = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p}: invalid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{p}: top level must be an object")
        for key in raw:
            if key not in _TOP_KEYS:
                raise ConfigError(f"{p}: unknown key {key!r}")

    cfg = RunConfig()
    if "store_dir" in raw:
        cfg.store_dir = Path(raw["store_dir"])
    if "out_dir" in raw:
        cfg.out_dir = Path(raw["out_dir"])
    if "seed" in raw:
        cfg.seed = int(raw["seed"])
    if "service_port" in raw:
        cfg.service_port = int(raw["service_port"])
    if "window" in raw:
        window = raw["window"]
        try:
            if window.get("start"):
                cfg.window_start = parse_timestamp(window["start"])
            if window.get("end"):
                cfg.window_end = parse_timestamp(window["end"])
        except (AttributeError, ValueError) as exc:
            raise ConfigError(f"invalid window: {exc}") from exc
    for name, cls in _SECTIONS.items():
        if name in raw:
            setattr(cfg, name, _build_section(cls, raw[name], name))

    if os.environ.get(ENV_STORE_DIR):
        cfg.store_dir = Path(os.environ[ENV_STORE_DIR])
    if os.environ.get(ENV_PORT):
        try:
            cfg.service_port = int(os.environ[ENV_PORT])
        except ValueError as exc:
            raise ConfigError(f"{ENV_PORT} must be an integer") from exc
    for key, value in (overrides or {}).items():
        setattr(cfg, key, value)
    return cfg.validate()

"""Rank correlation between per-site decay constants and site features.

Spearman's coefficient is computed as the Pearson correlation of average
ranks, the standard convention for tied and ordinal data (soil group, land
use).  Missing feature values are dropped pairwise, with the effective sample
size recorded per cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from .errors import InvalidGeometry, NoData, NotEnoughData, SchemaError, ShapeError

#: Default ordinal coding for land use, by built-up intensity.  Overridable
#: in the run configuration.
LAND_USE_CODES = {
    "vacant": 1,
    "residential": 2,
    "institutional": 3,
    "commercial": 4,
    "industrial": 5,
}

#: Hydrologic soil groups A-D mapped to 1-4 (infiltration capacity high->low).
SOIL_GROUP_CODES = {"A": 1, "B": 2, "C": 3, "D": 4}

#: Feature order used for the full correlation matrix.
DEFAULT_FEATURES = (
    "mean_alpha",
    "latitude",
    "longitude",
    "surface_area",
    "drainage_area",
    "da_sa_ratio",
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


@dataclass
class SiteRecord:
    """Design and physiographic features of one garden, plus the joined
    mean decay constant once fitting has run."""

    site_id: str
    latitude: float | None = None
    longitude: float | None = None
    surface_area: float | None = None  # m^2
    drainage_area: float | None = None  # m^2
    storage_volume: float | None = None  # m^3
    media_depth: float | None = None  # m
    age: float | None = None  # years
    da_sa_ratio: float | None = None
    imperviousness: float | None = None  # percent
    land_use: float | None = None  # ordinal code
    elevation: float | None = None  # m
    slope: float | None = None  # percent
    hydrologic_soil_group: float | None = None  # ordinal code, A-D -> 1-4
    groundwater_depth: float | None = None  # m
    mean_alpha: float | None = None  # hr^-1

    def __post_init__(self):
        if self.da_sa_ratio is None and None not in (self.drainage_area, self.surface_area):
            self.da_sa_ratio = da_sa_ratio(self.drainage_area, self.surface_area)


FEATURE_NAMES = tuple(f.name for f in fields(SiteRecord) if f.name != "site_id")


@dataclass
class CorrelationMatrix:
    """Symmetric Spearman matrix with per-cell effective sample sizes."""

    labels: list[str]
    rho: np.ndarray
    n_effective: np.ndarray = field(repr=False, default=None)


def da_sa_ratio(drainage_area: float, surface_area: float) -> float:
    """Drainage area divided by garden surface area (loading metric)."""
    if surface_area <= 0:
        raise InvalidGeometry(f"surface_area must be > 0, got {surface_area}")
    return drainage_area / surface_area


def average_ranks(values) -> np.ndarray:
    """Ranks 1..n with ties assigned the mean of the ranks they span."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise NoData("cannot rank an empty vector")
    if not np.all(np.isfinite(x)):
        raise ValueError("rank input contains non-finite values")
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size)
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Spearman's rank correlation; NaN when either rank vector is constant."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.size != yv.size:
        raise ShapeError(f"length mismatch: {xv.size} vs {yv.size}")
    if xv.size < 3:
        raise NotEnoughData(f"need >= 3 pairs, got {xv.size}")
    rx = average_ranks(xv)
    ry = average_ranks(yv)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sx = float(np.sqrt(np.sum(dx * dx)))
    sy = float(np.sqrt(np.sum(dy * dy)))
    if sx == 0.0 or sy == 0.0:
        return float("nan")
    return float(np.sum(dx * dy) / (sx * sy))


def correlation_matrix(records: list[SiteRecord], features=DEFAULT_FEATURES) -> CorrelationMatrix:
    """Pairwise Spearman matrix over the named features of *records*.

    Records missing a value contribute nothing to the cells involving that
    feature (pairwise deletion); cells left with fewer than 3 complete pairs
    get rho = NaN.  The diagonal is 1 by definition.
    """
    if len(records) < 3:
        raise NotEnoughData(f"need >= 3 site records, got {len(records)}")
    labels = list(features)
    columns = {}
    for name in labels:
        if any(not hasattr(r, name) for r in records):
            raise SchemaError(f"site records lack feature {name!r}")
        col = [getattr(r, name) for r in records]
        columns[name] = np.array(
            [np.nan if v is None else float(v) for v in col], dtype=float
        )
    k = len(labels)
    rho = np.eye(k)
    n_eff = np.full((k, k), len(records), dtype=int)
    for a in range(k):
        for b in range(a + 1, k):
            xa, xb = columns[labels[a]], columns[labels[b]]
            ok = np.isfinite(xa) & np.isfinite(xb)
            n = int(ok.sum())
            n_eff[a, b] = n_eff[b, a] = n
            if n < 3:
                r = float("nan")
            else:
                r = spearman(xa[ok], xb[ok])
            rho[a, b] = rho[b, a] = r
        n_eff[a, a] = int(np.isfinite(columns[labels[a]]).sum())
    return CorrelationMatrix(labels, rho, n_eff)

"""Bounded decay-constant surface over (groundwater depth, DA/SA ratio).

Inverse-distance-weighted averaging (power 2) on axes standardized to unit
variance, evaluated on a regular grid and masked outside the convex hull of
the observations, so the surface never extrapolates beyond what was measured.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoData, SchemaError

METHOD_NAME = "idw-power2-standardized"
DEFAULT_RESOLUTION = 50
#: Standardized distance below which a grid cell reuses an observation exactly.
COINCIDENT_EPS = 1e-9


@dataclass
class SurfaceGrid:
    """Gridded surface values; mask is True where the cell has no data
    (outside the observation hull)."""

    gw_axis: np.ndarray  # m, ascending
    dasa_axis: np.ndarray  # dimensionless, ascending
    values: np.ndarray  # shape (len(gw_axis), len(dasa_axis)), NaN where masked
    mask: np.ndarray  # bool, True = no data
    method: str = METHOD_NAME

    def __eq__(self, other):
        if not isinstance(other, SurfaceGrid):
            return NotImplemented
        return (
            self.method == other.method
            and np.array_equal(self.gw_axis, other.gw_axis)
            and np.array_equal(self.dasa_axis, other.dasa_axis)
            and np.array_equal(self.mask, other.mask)
            and np.array_equal(self.values, other.values, equal_nan=True)
        )


# ---------------------------------------------------------------------------
# Convex hull membership (handles point / segment / polygon hulls)
# ---------------------------------------------------------------------------

def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull in CCW order; collinear inputs collapse to their
    extreme segment, a single point to itself."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if pts.shape[0] <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    lower: list[np.ndarray] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[np.ndarray] = []
    for p in pts[::-1]:
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = np.array(lower[:-1] + upper[:-1])
    if hull.shape[0] == 2:  # all collinear: keep the extreme segment
        return hull
    return hull


def _in_hull(hull: np.ndarray, q: np.ndarray, eps: float) -> bool:
    """Membership with boundary (and collinear boundary points) included."""
    m = hull.shape[0]
    if m == 1:
        return bool(np.hypot(*(q - hull[0])) <= eps)
    if m == 2:
        a, b = hull
        ab = b - a
        denom = float(ab @ ab)
        if abs(_cross(a, b, q)) > eps * max(1.0, np.sqrt(denom)):
            return False
        t = float((q - a) @ ab) / denom
        return -eps <= t <= 1 + eps
    for k in range(m):
        if _cross(hull[k], hull[(k + 1) % m], q) < -eps:
            return False
    return True


# ---------------------------------------------------------------------------
# Surface fitting
# ---------------------------------------------------------------------------

def _axis(lo: float, hi: float, resolution: int) -> np.ndarray:
    if lo == hi:
        return np.array([lo], dtype=float)
    return np.linspace(lo, hi, resolution)


def fit_surface(
    points,
    resolution: int = DEFAULT_RESOLUTION,
    gw_axis=None,
    dasa_axis=None,
) -> SurfaceGrid:
    """Interpolate decay constants over a (groundwater depth, DA/SA) grid.

    *points* is a sequence of (gw_depth, dasa, alpha) triples.  Axes default
    to *resolution* cells spanning the observed ranges.  Values are the
    power-2 inverse-distance average in standardized coordinates, exact at
    observation locations (coincident observations are averaged), masked
    outside the convex hull of the observations.
    """
    pts = np.asarray(sorted(tuple(map(float, p)) for p in points), dtype=float)
    if pts.size == 0:
        raise NoData("no surface observations")
    if pts.ndim != 2 or pts.shape[1] != 3 or not np.all(np.isfinite(pts)):
        raise SchemaError("surface observations must be finite (gw, dasa, alpha) triples")
    xy = pts[:, :2]
    alpha = pts[:, 2]
    gw = np.asarray(gw_axis, dtype=float) if gw_axis is not None else _axis(
        xy[:, 0].min(), xy[:, 0].max(), resolution
    )
    da = np.asarray(dasa_axis, dtype=float) if dasa_axis is not None else _axis(
        xy[:, 1].min(), xy[:, 1].max(), resolution
    )

    scale = xy.std(axis=0)
    scale[scale == 0.0] = 1.0
    std_pts = xy / scale

    hull = convex_hull(xy)
    span = max(float(np.ptp(xy[:, 0])), float(np.ptp(xy[:, 1])), 1.0)
    hull_eps = 1e-9 * span

    values = np.full((gw.size, da.size), np.nan)
    mask = np.ones((gw.size, da.size), dtype=bool)
    for r, g in enumerate(gw):
        for c, d in enumerate(da):
            cell = np.array([g, d])
            if not _in_hull(hull, cell, hull_eps):
                continue
            dist = np.hypot(*(std_pts - cell / scale).T)
            hits = dist < COINCIDENT_EPS
            if np.any(hits):
                values[r, c] = float(alpha[hits].mean())
            else:
                w = dist ** -2.0
                values[r, c] = float(np.sum(w * alpha) / np.sum(w))
            mask[r, c] = False
    return SurfaceGrid(gw, da, values, mask)


# ---------------------------------------------------------------------------
# Serialization and rendering
# ---------------------------------------------------------------------------

def export_grid(grid: SurfaceGrid, path) -> None:
    """Write the grid as delimited text: axis metadata lines, then one
    gw,dasa,alpha row per cell (NA where masked)."""
    lines = [
        f"# method: {grid.method}",
        "# gw_axis: " + ",".join(repr(float(v)) for v in grid.gw_axis),
        "# dasa_axis: " + ",".join(repr(float(v)) for v in grid.dasa_axis),
    ]
    for r, g in enumerate(grid.gw_axis):
        for c, d in enumerate(grid.dasa_axis):
            v = "NA" if grid.mask[r, c] else repr(float(grid.values[r, c]))
            lines.append(f"{float(g)!r},{float(d)!r},{v}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_grid(path) -> SurfaceGrid:
    """Inverse of export_grid."""
    method = METHOD_NAME
    gw = da = None
    cells: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("# method:"):
                method = line.split(":", 1)[1].strip()
            elif line.startswith("# gw_axis:"):
                gw = _parse_axis(line)
            elif line.startswith("# dasa_axis:"):
                da = _parse_axis(line)
            else:
                cells.append(line)
    if gw is None or da is None:
        raise SchemaError(f"{path}: missing gw_axis/dasa_axis metadata")
    if len(cells) != gw.size * da.size:
        raise SchemaError(
            f"{path}: expected {gw.size * da.size} cell rows, found {len(cells)}"
        )
    values = np.full((gw.size, da.size), np.nan)
    mask = np.ones((gw.size, da.size), dtype=bool)
    for k, row in enumerate(cells):
        parts = row.split(",")
        if len(parts) != 3:
            raise SchemaError(f"{path}: malformed cell row {row!r}")
        r, c = divmod(k, da.size)
        if parts[2] != "NA":
            values[r, c] = float(parts[2])
            mask[r, c] = False
    return SurfaceGrid(gw, da, values, mask, method=method)


def _parse_axis(line: str) -> np.ndarray:
    body = line.split(":", 1)[1].strip()
    if not body:
        return np.empty(0)
    return np.array([float(v) for v in body.split(",")], dtype=float)


def _edges(axis: np.ndarray) -> np.ndarray:
    """Cell edges bracketing the axis centers (pcolormesh wants edges)."""
    if axis.size == 1:
        half = 0.5 if axis[0] == 0 else abs(axis[0]) * 0.05 + 0.5
        return np.array([axis[0] - half, axis[0] + half])
    mid = 0.5 * (axis[1:] + axis[:-1])
    first = axis[0] - (mid[0] - axis[0])
    last = axis[-1] + (axis[-1] - mid[-1])
    return np.concatenate([[first], mid, [last]])


def render_heatmap(grid: SurfaceGrid, path, title: str = "Decay constant surface") -> None:
    """Static vector heatmap: diverging color scale, blank no-data cells."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "gidrain"}):
        fig, ax = plt.subplots(figsize=(7.0, 5.0))
        data = np.ma.masked_where(grid.mask, grid.values)
        mesh = ax.pcolormesh(
            _edges(grid.dasa_axis), _edges(grid.gw_axis), data, cmap="RdBu_r", shading="flat"
        )
        fig.colorbar(mesh, ax=ax, label="decay constant (1/hr)")
        ax.set_xlabel("DA/SA ratio (-)")
        ax.set_ylabel("groundwater depth (m)")
        ax.set_title(title)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)

"""First-order drawdown model fitting.

Water level in a draining garden is modelled as dh/dt = alpha * (h - b) with
alpha < 0, i.e. h(t) = C * exp(alpha * t) + b.  The decay constant alpha is
the slope of a least-squares line through the (level, level-rate) pairs of a
recession; the line's intercept yields the asymptotic offset b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidTarget, NoData, NonDecaying, NonUniformSampling, NotEnoughData
from .segmentation import StormEvent
from .series import uniform_spacing_hours

#: Slopes with magnitude below this are treated as zero when deriving b = -i/s.
_SLOPE_EPS = 1e-12
#: Recessions shorter than this cannot support a two-parameter fit plus metrics.
MIN_RECESSION_SAMPLES = 4


@dataclass
class DecayFit:
    """Fitted decay curve h(t) = scale_C * exp(alpha * t) + offset_b.

    scale_C is None for pooled site fits, where no single curve exists and
    r_squared / rmse are computed in (level, rate) space instead.
    """

    alpha: float  # hr^-1, negative on success
    offset_b: float  # m
    scale_C: float | None  # m
    r_squared: float
    rmse: float
    n_samples: int
    excluded: bool

    def __post_init__(self):
        self.excluded = bool(self.r_squared < 0)


@dataclass
class SiteSummary:
    """Per-site roll-up over storm fits; means cover non-excluded storms only."""

    site_id: str
    storms_identified: int
    storms_analyzed: int
    mean_alpha: float | None
    mean_rmse: float | None
    mean_r_squared: float | None
    max_ponding_hours: float | None = None


@dataclass(frozen=True)
class PondingEpisode:
    """Maximal run of samples above the ponding threshold."""

    start_idx: int
    n_samples: int
    duration_hours: float
    compliant: bool


# ---------------------------------------------------------------------------
# Derivative estimation and line fitting
# ---------------------------------------------------------------------------

def _resolve_times(n: int, spacing) -> np.ndarray:
    """Spacing may be a scalar dt (hours) or a per-sample time vector (hours)."""
    if np.isscalar(spacing):
        dt = float(spacing)
        if dt <= 0:
            raise NonUniformSampling(f"spacing must be positive, got {dt}")
        return np.arange(n, dtype=float) * dt
    t = np.asarray(spacing, dtype=float)
    if t.size != n:
        raise NonUniformSampling(f"{t.size} timestamps for {n} samples")
    if uniform_spacing_hours(t) is None:
        raise NonUniformSampling("sample times are not uniformly spaced")
    return t


def estimate_derivative(levels, spacing) -> tuple[np.ndarray, np.ndarray]:
    """Pair each level with its time derivative (m/hr).

    Central differences at interior samples, one-sided first differences at
    the two endpoints.  *spacing* is either the uniform step in hours or the
    sample times in hours (checked for uniformity).
    """
    h = np.asarray(levels, dtype=float)
    if h.size < 3:
        raise NotEnoughData(f"need >= 3 samples for a derivative, got {h.size}")
    t = _resolve_times(h.size, spacing)
    dt = t[1] - t[0]
    dhdt = np.empty_like(h)
    dhdt[1:-1] = (h[2:] - h[:-2]) / (2.0 * dt)
    dhdt[0] = (h[1] - h[0]) / dt
    dhdt[-1] = (h[-1] - h[-2]) / dt
    return h, dhdt


def _decay_line(h: np.ndarray, dhdt: np.ndarray, intercept: bool) -> tuple[float, float]:
    """Least-squares line dh/dt = s*h + i; raises NonDecaying for s >= 0 or
    a level segment with no variance."""
    if float(np.ptp(h)) == 0.0:
        raise NonDecaying("constant level segment")
    if intercept:
        s, i = np.polyfit(h, dhdt, 1)
    else:
        s = float(np.dot(h, dhdt) / np.dot(h, h))
        i = 0.0
    if s >= 0:
        raise NonDecaying(f"fitted slope {s:.4g} is not negative")
    return float(s), float(i)


def _curve_metrics(h: np.ndarray, hhat: np.ndarray) -> tuple[float, float]:
    ss_res = float(np.sum((h - hhat) ** 2))
    ss_tot = float(np.sum((h - h.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    rmse = math.sqrt(ss_res / h.size)
    return r2, rmse


def fit_storm(
    storm: StormEvent, levels, spacing, intercept: bool = True
) -> DecayFit:
    """Fit the decay model to one storm's recession.

    *levels* and *spacing* describe the full series the storm indexes into;
    spacing is a scalar dt (hours) or the full time vector (hours).  The curve
    scale C is pinned to the first recession sample, and the fit is flagged
    excluded when the reconstruction explains less variance than the mean
    (r_squared < 0).
    """
    full = np.asarray(levels, dtype=float)
    sl = storm.recession_slice()
    h_rec = full[sl]
    if h_rec.size < MIN_RECESSION_SAMPLES:
        raise NotEnoughData(
            f"recession has {h_rec.size} samples; need >= {MIN_RECESSION_SAMPLES}"
        )
    if np.isscalar(spacing):
        rec_spacing = spacing
        t_rel = np.arange(h_rec.size, dtype=float) * float(spacing)
    else:
        t_full = np.asarray(spacing, dtype=float)
        if t_full.size != full.size:
            raise NonUniformSampling(f"{t_full.size} timestamps for {full.size} samples")
        t_rec = t_full[sl]
        rec_spacing = t_rec
        t_rel = t_rec - t_rec[0]
    h, dhdt = estimate_derivative(h_rec, rec_spacing)
    s, i = _decay_line(h, dhdt, intercept)
    b = -i / s if abs(s) >= _SLOPE_EPS else 0.0
    c = float(h_rec[0] - b)
    hhat = c * np.exp(s * t_rel) + b
    r2, rmse = _curve_metrics(h_rec, hhat)
    return DecayFit(
        alpha=s,
        offset_b=float(b),
        scale_C=c,
        r_squared=r2,
        rmse=rmse,
        n_samples=int(h_rec.size),
        excluded=r2 < 0,
    )


def fit_site(
    pairs: list[tuple[np.ndarray, np.ndarray]], intercept: bool = True
) -> DecayFit:
    """Pool (level, rate) pairs from all analyzable recessions of one site
    into a single line fit.

    r_squared and rmse are computed in the pooled (h, dh/dt) space: no single
    reconstruction curve exists across storms.
    """
    if not pairs:
        raise NoData("no analyzable recessions to pool")
    h = np.concatenate([np.asarray(p[0], dtype=float) for p in pairs])
    dhdt = np.concatenate([np.asarray(p[1], dtype=float) for p in pairs])
    s, i = _decay_line(h, dhdt, intercept)
    b = -i / s if abs(s) >= _SLOPE_EPS else 0.0
    pred = s * h + i
    ss_res = float(np.sum((dhdt - pred) ** 2))
    ss_tot = float(np.sum((dhdt - dhdt.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else -math.inf
    rmse = math.sqrt(ss_res / h.size)
    return DecayFit(
        alpha=s,
        offset_b=float(b),
        scale_C=None,
        r_squared=r2,
        rmse=rmse,
        n_samples=int(h.size),
        excluded=r2 < 0,
    )


# ---------------------------------------------------------------------------
# Derived quantities
# ---------------------------------------------------------------------------

def time_to_drain(alpha: float, h0: float, h_target: float) -> float:
    """Hours for the level to fall from h0 to h_target (both relative to the
    asymptotic offset b)."""
    if alpha >= 0:
        raise NonDecaying(f"alpha must be negative, got {alpha}")
    if not 0 < h_target <= h0:
        raise InvalidTarget(f"need 0 < h_target <= h0, got h_target={h_target}, h0={h0}")
    return math.log(h_target / h0) / alpha


def ponding_durations(
    levels, dt_hours: float, threshold: float = 1.0, limit_hours: float = 24.0
) -> list[PondingEpisode]:
    """Maximal runs of samples above *threshold*, with a compliance flag
    against the allowed ponding duration."""
    h = np.asarray(levels, dtype=float)
    above = h > threshold
    episodes: list[PondingEpisode] = []
    i = 0
    n = h.size
    while i < n:
        if above[i]:
            j = i
            while j + 1 < n and above[j + 1]:
                j += 1
            count = j - i + 1
            duration = count * dt_hours
            episodes.append(
                PondingEpisode(i, count, duration, compliant=duration <= limit_hours)
            )
            i = j + 1
        else:
            i += 1
    return episodes


def summarize_site(
    site_id: str,
    fits: list[DecayFit],
    storms_identified: int,
    max_ponding_hours: float | None = None,
) -> SiteSummary:
    """Arithmetic means over non-excluded fits; None means when nothing survives."""
    analyzed = [f for f in fits if not f.excluded]
    if analyzed:
        mean_alpha = float(np.mean([f.alpha for f in analyzed]))
        mean_rmse = float(np.mean([f.rmse for f in analyzed]))
        mean_r2 = float(np.mean([f.r_squared for f in analyzed]))
    else:
        mean_alpha = mean_rmse = mean_r2 = None
    return SiteSummary(
        site_id=site_id,
        storms_identified=storms_identified,
        storms_analyzed=len(analyzed),
        mean_alpha=mean_alpha,
        mean_rmse=mean_rmse,
        mean_r_squared=mean_r2,
        max_ponding_hours=max_ponding_hours,
    )

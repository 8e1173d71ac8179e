"""Water-level analytics for green-infrastructure sensor networks.

Core capabilities: storm segmentation by peak prominence, first-order
drawdown (decay-constant) fitting, rank correlation of decay constants
against site features, a bounded decay surface over (groundwater depth,
DA/SA), QC checks, a file-backed ingestion store with an HTTP service, and a
synthetic-network generator that serves as the verification oracle.
"""

__version__ = "0.1.0"

from . import errors
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
from .qc import build_qc_report, detect_dead_sensor, detect_drift, detect_gaps, split_at_gaps
from .segmentation import (
    PeakParams,
    StormEvent,
    align_with_rain,
    find_minima,
    find_peaks,
    segment_storms,
)
from .series import TimeSeries, format_timestamp, parse_timestamp
from .stats import (
    CorrelationMatrix,
    SiteRecord,
    average_ranks,
    correlation_matrix,
    da_sa_ratio,
    spearman,
)
from .store import Reading, ReadingBatch, Store
from .surface import SurfaceGrid, export_grid, fit_surface, parse_grid, render_heatmap
from .synth import SiteTruth, TruthManifest, generate_network, generate_site_series

__all__ = [
    "errors",
    "DecayFit",
    "SiteSummary",
    "estimate_derivative",
    "fit_site",
    "fit_storm",
    "ponding_durations",
    "summarize_site",
    "time_to_drain",
    "build_qc_report",
    "detect_dead_sensor",
    "detect_drift",
    "detect_gaps",
    "split_at_gaps",
    "PeakParams",
    "StormEvent",
    "align_with_rain",
    "find_minima",
    "find_peaks",
    "segment_storms",
    "TimeSeries",
    "format_timestamp",
    "parse_timestamp",
    "CorrelationMatrix",
    "SiteRecord",
    "average_ranks",
    "correlation_matrix",
    "da_sa_ratio",
    "spearman",
    "Reading",
    "ReadingBatch",
    "Store",
    "SurfaceGrid",
    "export_grid",
    "fit_surface",
    "parse_grid",
    "render_heatmap",
    "SiteTruth",
    "TruthManifest",
    "generate_network",
    "generate_site_series",
]

"""Correlate fitted decay constants against site features across a network.

A 14-site synthetic network (ground truth known) is segmented and fitted
site by site, then the per-site mean decay constants are rank-correlated
against design and physiographic features.
"""

from gidrain import PeakParams, correlation_matrix, fit_storm, segment_storms, summarize_site
from gidrain.synth import generate_network

manifest, records, rain, series = generate_network(n_sites=14, seed=1)
truth = {s.site_id: s.alpha_true for s in manifest.sites}

print(f"{'site':>5} {'storms':>6} {'mean alpha':>11} {'true alpha':>11}")
for rec in records:
    ts = series[rec.site_id]
    events = segment_storms(ts.levels, PeakParams.from_spacing(0.05), rec.site_id)
    fits = []
    for ev in events:
        try:
            fits.append(fit_storm(ev, ts.levels, ts.times_hours()))
        except Exception:
            continue
    summary = summarize_site(rec.site_id, fits, len(events))
    rec.mean_alpha = summary.mean_alpha
    print(
        f"{rec.site_id:>5} {summary.storms_analyzed:>3}/{summary.storms_identified:<3}"
        f"{summary.mean_alpha:>11.3f} {truth[rec.site_id]:>11.3f}"
    )

features = ["mean_alpha", "groundwater_depth", "da_sa_ratio", "imperviousness", "age"]
matrix = correlation_matrix(records, features)
print("\nSpearman rank correlations:")
width = max(len(f) for f in features)
print(" " * width, "  ".join(f"{f[:9]:>9}" for f in features))
for i, name in enumerate(features):
    row = "  ".join(f"{matrix.rho[i, j]:>9.2f}" for j in range(len(features)))
    print(f"{name:>{width}}", row)

print(
    "\nmean alpha vs groundwater depth:"
    f" rho = {matrix.rho[0, 1]:.2f} (the generator ties decay strictly to it)"
)

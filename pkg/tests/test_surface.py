import numpy as np
import pytest

from gidrain.errors import NoData
from gidrain.surface import (
    SurfaceGrid,
    convex_hull,
    export_grid,
    fit_surface,
    parse_grid,
    render_heatmap,
)
from oracles import delaunay_inside


class TestFitSurface:
    def test_single_point_degenerate_hull(self):
        g = fit_surface([(3.0, 2.0, -0.15)], resolution=5)
        assert g.gw_axis.tolist() == [3.0]
        assert g.dasa_axis.tolist() == [2.0]
        assert g.values[0, 0] == -0.15
        assert not g.mask[0, 0]

    def test_midpoint_of_two_points(self):
        g = fit_surface([(0.0, 0.0, -0.1), (2.0, 2.0, -0.3)], resolution=3)
        assert g.values[0, 0] == pytest.approx(-0.1)
        assert g.values[2, 2] == pytest.approx(-0.3)
        assert g.values[1, 1] == pytest.approx(-0.2)  # equidistant -> plain mean
        off_segment = g.mask.copy()
        assert off_segment[0, 1] and off_segment[1, 0]

    def test_exact_at_observations_and_bounded(self, rng):
        pts = [
            (float(g), float(d), float(a))
            for g, d, a in zip(
                rng.uniform(0, 10, 12), rng.uniform(1, 9, 12), rng.uniform(-0.4, -0.01, 12)
            )
        ]
        g = fit_surface(pts, resolution=21)
        alphas = [p[2] for p in pts]
        vals = g.values[~g.mask]
        assert vals.min() >= min(alphas) - 1e-12
        assert vals.max() <= max(alphas) + 1e-12
        # cells coincident with observations reproduce them exactly
        exact = fit_surface(pts, gw_axis=[pts[0][0]], dasa_axis=[pts[0][1]])
        assert exact.values[0, 0] == pytest.approx(pts[0][2], abs=1e-15)

    def test_permutation_invariance_is_exact(self, rng):
        pts = [
            (float(g), float(d), float(a))
            for g, d, a in zip(
                rng.uniform(0, 10, 8), rng.uniform(1, 9, 8), rng.uniform(-0.4, -0.01, 8)
            )
        ]
        g1 = fit_surface(pts, resolution=11)
        g2 = fit_surface(list(reversed(pts)), resolution=11)
        assert g1 == g2

    def test_mask_matches_independent_hull_oracle(self, rng):
        pts = np.column_stack(
            [rng.uniform(0, 10, 10), rng.uniform(0, 10, 10), rng.uniform(-0.3, -0.1, 10)]
        )
        g = fit_surface([tuple(p) for p in pts], resolution=15)
        centers = np.array(
            [(gw, da) for gw in g.gw_axis for da in g.dasa_axis], dtype=float
        )
        inside = delaunay_inside(pts[:, :2], centers).reshape(g.values.shape)
        # compare away from the hull boundary, where both tests are unambiguous
        for r in range(g.gw_axis.size):
            for c in range(g.dasa_axis.size):
                if inside[r, c] != (not g.mask[r, c]):
                    cell = np.array([g.gw_axis[r], g.dasa_axis[c]])
                    d = np.min(np.abs(np.linalg.norm(pts[:, :2] - cell, axis=1)))
                    # disagreement only tolerated on the boundary itself
                    assert _near_hull_boundary(pts[:, :2], cell), (r, c)

    def test_coincident_observations_average(self):
        g = fit_surface(
            [(1.0, 1.0, -0.1), (1.0, 1.0, -0.3), (4.0, 4.0, -0.2)],
            gw_axis=[1.0],
            dasa_axis=[1.0],
        )
        assert g.values[0, 0] == pytest.approx(-0.2)

    def test_empty_input_is_no_data(self):
        with pytest.raises(NoData):
            fit_surface([])


def _near_hull_boundary(points: np.ndarray, q: np.ndarray, tol: float = 1e-7) -> bool:
    hull = convex_hull(points)
    m = hull.shape[0]
    for k in range(m):
        a = hull[k]
        b = hull[(k + 1) % m]
        ab = b - a
        denom = float(ab @ ab)
        if denom == 0:
            continue
        t = np.clip(float((q - a) @ ab) / denom, 0.0, 1.0)
        if np.linalg.norm(q - (a + t * ab)) <= tol:
            return True
    return False


class TestGridSerialization:
    def grid(self):
        return fit_surface(
            [(0.0, 0.0, -0.1), (2.0, 1.0, -0.3), (1.0, 3.0, -0.2)], resolution=4
        )

    def test_round_trip_identity(self, tmp_path):
        g = self.grid()
        path = tmp_path / "surface.csv"
        export_grid(g, path)
        assert parse_grid(path) == g

    def test_cell_row_count(self, tmp_path):
        g = fit_surface([(0.0, 0.0, -0.1), (1.0, 1.0, -0.3)], resolution=2)
        path = tmp_path / "grid.csv"
        export_grid(g, path)
        lines = path.read_text().strip().split("\n")
        data = [ln for ln in lines if not ln.startswith("#")]
        assert len(data) == 4
        assert len([ln for ln in lines if ln.startswith("#")]) == 3

    def test_empty_grid_writes_only_headers(self, tmp_path):
        g = SurfaceGrid(
            np.empty(0), np.empty(0), np.empty((0, 0)), np.empty((0, 0), dtype=bool)
        )
        path = tmp_path / "empty.csv"
        export_grid(g, path)
        lines = path.read_text().strip().split("\n")
        assert all(ln.startswith("#") for ln in lines)
        assert parse_grid(path) == g

    def test_method_recorded_in_metadata(self, tmp_path):
        path = tmp_path / "surface.csv"
        export_grid(self.grid(), path)
        assert "# method: idw-power2-standardized" in path.read_text()


class TestHeatmap:
    def test_renders_deterministic_svg(self, tmp_path):
        g = self.make_grid()
        p1 = tmp_path / "a.svg"
        p2 = tmp_path / "b.svg"
        render_heatmap(g, p1)
        render_heatmap(g, p2)
        body = p1.read_text()
        assert body.lstrip().startswith("<?xml")
        assert "<dc:date>" not in body
        assert p1.read_bytes() == p2.read_bytes()

    @staticmethod
    def make_grid():
        return fit_surface(
            [(0.0, 0.0, -0.1), (2.0, 1.0, -0.3), (1.0, 3.0, -0.2)], resolution=8
        )

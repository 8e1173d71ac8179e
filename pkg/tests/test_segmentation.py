import numpy as np
import pytest

from gidrain.errors import NotEnoughData
from gidrain.segmentation import (
    PeakParams,
    align_with_rain,
    find_minima,
    find_peaks,
    segment_storms,
)
from oracles import brute_find_peaks, brute_prominence

H = 3600


class TestFindPeaks:
    def test_two_peaks_with_prominences(self):
        assert find_peaks([0, 1, 0, 2, 0], PeakParams(0.5, 1)) == [(1, 1.0), (3, 2.0)]

    def test_monotone_series_has_no_peaks(self):
        assert find_peaks([0, 1, 2, 3], PeakParams(0.5, 1)) == []

    def test_distance_filter_greedy_by_height(self):
        # peak 3 falls within 2 samples of the taller kept peak 5
        kept = find_peaks([0, 3, 0, 2, 0, 4, 0], PeakParams(0.5, 3))
        assert [i for i, _ in kept] == [1, 5]

    def test_prominence_threshold_is_inclusive(self):
        assert find_peaks([0, 1, 0], PeakParams(1.0, 1)) == [(1, 1.0)]
        assert find_peaks([0, 0.99, 0], PeakParams(1.0, 1)) == []

    def test_plateau_represented_by_leftmost_sample(self):
        assert find_peaks([0, 2, 2, 2, 0], PeakParams(0.5, 1)) == [(1, 2.0)]

    def test_too_short_series(self):
        with pytest.raises(NotEnoughData):
            find_peaks([1, 2], PeakParams(0.5, 1))
        with pytest.raises(NotEnoughData):
            find_peaks([], PeakParams(0.5, 1))

    def test_matches_brute_force_oracle_on_random_series(self, rng):
        for _ in range(300):
            n = int(rng.integers(3, 51))
            if rng.uniform() < 0.5:
                x = rng.normal(0, 1, n)
            else:
                x = rng.integers(0, 6, n).astype(float)  # ties and plateaus
            p = float(rng.uniform(0.1, 2.0))
            d = int(rng.integers(1, 8))
            got = find_peaks(x, PeakParams(p, d))
            want = brute_find_peaks(x, p, d)
            assert [i for i, _ in got] == [i for i, _ in want]
            np.testing.assert_allclose(
                [pr for _, pr in got], [pr for _, pr in want], rtol=0, atol=1e-12
            )

    def test_offset_invariance(self, rng):
        for _ in range(50):
            x = rng.normal(0, 1, 60)
            k = float(rng.uniform(-100, 100))
            base = find_peaks(x, PeakParams(0.4, 3))
            shifted = find_peaks(x + k, PeakParams(0.4, 3))
            assert [i for i, _ in base] == [i for i, _ in shifted]
            np.testing.assert_allclose(
                [pr for _, pr in base], [pr for _, pr in shifted], rtol=1e-9
            )

    def test_scale_equivariance(self, rng):
        for _ in range(50):
            x = rng.normal(0, 1, 60)
            c = float(rng.uniform(0.1, 10))
            base = find_peaks(x, PeakParams(0.4, 3))
            scaled = find_peaks(c * x, PeakParams(0.4 * c, 3))
            assert [i for i, _ in base] == [i for i, _ in scaled]
            np.testing.assert_allclose(
                [pr * c for _, pr in base], [pr for _, pr in scaled], rtol=1e-12
            )

    def test_kept_peaks_respect_thresholds(self, rng):
        x = rng.normal(0, 1, 200)
        params = PeakParams(0.3, 5)
        peaks = find_peaks(x, params)
        assert all(pr >= params.prominence for _, pr in peaks)
        idx = [i for i, _ in peaks]
        assert all(b - a >= params.distance for a, b in zip(idx, idx[1:]))
        for i, pr in peaks:
            assert pr == pytest.approx(brute_prominence(x, i), abs=1e-12)


class TestFindMinima:
    def test_single_minimum(self):
        assert find_minima([2, 0, 2], PeakParams(0.5, 1)) == [1]

    def test_negation_duality(self):
        x = np.array([0, 1, 0, 2, 0], dtype=float)
        assert find_minima(-x, PeakParams(0.5, 1)) == [1, 3]

    def test_flat_series_has_no_minima(self):
        assert find_minima([1, 1, 1], PeakParams(0.5, 1)) == []


class TestSegmentStorms:
    def test_constant_series_yields_no_events(self):
        assert segment_storms(np.ones(50), PeakParams(0.05, 3)) == []

    def test_synthetic_pulses_segment_exactly(self):
        # five injected pulses with full decay between them
        dt = 1.0 / 6.0
        t = np.arange(0, 24 * 30, dt)
        x = np.zeros_like(t)
        crests = []
        for k in range(5):
            t_k = 24.0 * (3 + 5 * k)
            crests.append(int(round(t_k / dt)))
            rel = t - t_k
            x[rel >= 0] += 0.6 * np.exp(-0.3 * rel[rel >= 0])
        events = segment_storms(x, PeakParams.from_spacing(0.05, 3.0, dt), "S")
        assert len(events) == 5
        for ev, crest in zip(events, crests):
            assert abs(ev.peak_idx - crest) <= 2

    def test_recessions_never_overlap_and_start_at_peak(self, rng):
        for _ in range(40):
            x = np.cumsum(rng.normal(0, 0.2, 300))
            events = segment_storms(x, PeakParams(0.3, 6), "S")
            for ev in events:
                assert ev.start_idx < ev.peak_idx <= ev.end_idx
                assert ev.recession(x)[0] == x[ev.peak_idx]
            for a, b in zip(events, events[1:]):
                assert a.end_idx <= b.peak_idx
                assert a.peak_idx < b.peak_idx

    def test_events_ordered_and_share_boundaries(self):
        x = np.array([0, 2, 0, 3, 0.5, 2.5, 0], dtype=float)
        events = segment_storms(x, PeakParams(0.5, 1), "S")
        assert [ev.peak_idx for ev in events] == [1, 3, 5]
        assert events[0].end_idx == events[1].start_idx == 2


class TestAlignWithRain:
    def test_match_within_window(self):
        ev = segment_storms([0, 1, 0], PeakParams(0.5, 1), "S")
        peak_times = np.array([2 * H])  # 02:00
        rain = [(int(0.5 * H), 1.0)]  # 00:30
        report = align_with_rain(ev, peak_times, rain, window_hours=6)
        assert report.matched == [(0, 0)]
        assert report.unmatched_storms == [] and report.unmatched_rain == []

    def test_rain_outside_window_unmatched(self):
        ev = segment_storms([0, 1, 0], PeakParams(0.5, 1), "S")
        peak_times = np.array([9 * H])
        rain = [(1 * H, 1.0)]  # 8 h before the peak
        report = align_with_rain(ev, peak_times, rain, window_hours=6)
        assert report.matched == []
        assert report.unmatched_storms == [0]
        assert report.unmatched_rain == [0]

    def test_contested_rain_goes_to_earlier_storm(self):
        x = [0, 1, 0, 1, 0]
        ev = segment_storms(x, PeakParams(0.5, 1), "S")
        assert len(ev) == 2
        peak_times = np.array([2 * H, 4 * H])
        rain = [(int(1.5 * H), 1.0)]  # eligible for both peaks
        report = align_with_rain(ev, peak_times, rain, window_hours=6)
        assert report.matched == [(0, 0)]
        assert report.unmatched_storms == [1]

    def test_empty_inputs(self):
        report = align_with_rain([], np.array([]), [], window_hours=6)
        assert report.matched == [] and report.unmatched_storms == [] and report.unmatched_rain == []

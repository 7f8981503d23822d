import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shelldec import SampledCurve, make_grid
from shelldec.peaks import (
    DegenerateFitError,
    LogFitSums,
    PeakRegion,
    estimate_term,
    find_next_peak,
    peak_extent,
    scan_peaks,
    solve_log_ls,
)
from shelldec.shells import EIGHT_PI2, shell_peak_gaussian


def region_for(curve: SampledCurve, eps_dec_abs: float, eps_peak_abs: float) -> PeakRegion:
    hit = find_next_peak(curve, eps_dec_abs)
    assert hit is not None
    n1, n2 = peak_extent(curve, hit.n_peak, eps_peak_abs)
    return PeakRegion(hit.n_peak, n1, n2, hit.sign, hit.at_edge)


class TestFindNextPeak:
    def test_all_below_threshold(self):
        r = make_grid(2.0, 0.1)
        c = SampledCurve(r, np.full_like(r, 1e-6))
        assert find_next_peak(c, 1e-3) is None

    def test_interior_peak_at_shell_radius(self):
        r = make_grid(8.0, 0.01)
        c = SampledCurve(r, shell_peak_gaussian(r, 3.0, 20.0))
        hit = find_next_peak(c, 1e-4)
        assert hit.n_peak == 300
        assert hit.sign == 1
        assert not hit.at_edge

    def test_negative_peak_flips_sign(self):
        r = make_grid(8.0, 0.01)
        c = SampledCurve(r, -shell_peak_gaussian(r, 3.0, 20.0))
        hit = find_next_peak(c, 1e-4)
        assert (hit.n_peak, hit.sign) == (300, -1)

    def test_origin_peak(self):
        r = make_grid(4.0, 0.01)
        c = SampledCurve(r, shell_peak_gaussian(r, 0.0, 30.0))
        hit = find_next_peak(c, 1e-4)
        assert (hit.n_peak, hit.sign, hit.at_edge) == (0, 1, False)

    def test_edge_peak_needs_monotone_same_sign_rise(self):
        r = make_grid(6.0, 0.01)
        c = SampledCurve(r, shell_peak_gaussian(r, 7.0, 10.0))  # maximum past r_N
        hit = find_next_peak(c, 1e-6)
        assert hit.at_edge and hit.n_peak == len(r) - 1

    def test_scan_order_strictly_increasing(self, interference_curve):
        indices = []
        start = 0
        while True:
            hit = find_next_peak(interference_curve, 1e-3, start)
            if hit is None:
                break
            indices.append(hit.n_peak)
            start = hit.n_peak + 1
        assert len(indices) > 5
        assert all(b > a for a, b in zip(indices, indices[1:]))

    def test_plateau_reports_leftmost_point(self):
        f = np.array([0.0, 1.0, 5.0, 5.0, 1.0, 0.0])
        c = SampledCurve(np.arange(6) * 0.1, f)
        assert find_next_peak(c, 0.5).n_peak == 2

    def test_plateau_inside_a_rise_is_not_a_peak(self):
        f = np.array([0.0, 5.0, 5.0, 9.0, 1.0, 0.0])
        c = SampledCurve(np.arange(6) * 0.1, f)
        assert find_next_peak(c, 0.5, start_index=1).n_peak == 3


class TestPeakExtent:
    def test_gaussian_inflection_border(self):
        # second-derivative root of the origin Gaussian at sqrt(B/(8 pi^2))
        B, h = 20.0, 0.01
        r = make_grid(8.0, h)
        c = SampledCurve(r, shell_peak_gaussian(r, 0.0, B))
        n1, n2 = peak_extent(c, 0, 1e-9)
        assert n1 == 0
        assert abs(n2 - math.sqrt(B / EIGHT_PI2) / h) <= 1.0

    def test_threshold_cut_before_inflection(self):
        B, h = 20.0, 0.01
        r = make_grid(8.0, h)
        f = shell_peak_gaussian(r, 0.0, B)
        cut = 0.9 * f[0]  # crosses the threshold well inside the concave part
        _, n2 = peak_extent(c := SampledCurve(r, f), 0, cut)
        assert f[n2] < cut <= f[n2 - 1]

    def test_origin_peak_left_border_is_zero(self):
        r = make_grid(3.0, 0.01)
        c = SampledCurve(r, shell_peak_gaussian(r, 0.0, 10.0))
        n1, _ = peak_extent(c, 0, 1e-6)
        assert n1 == 0

    def test_walk_hitting_edge_returns_last_index(self):
        r = make_grid(0.5, 0.01)
        c = SampledCurve(r, 2.0 - r * r)  # concave throughout: no inflection, no drop
        n1, n2 = peak_extent(c, 0, 1e-6)
        assert (n1, n2) == (0, len(r) - 1)


class TestSolveLogLs:
    def test_exact_linear_model(self):
        u0, v0 = 1.7, 0.35
        x = np.linspace(0.0, 2.0, 9)
        u, v = solve_log_ls(zip(x, u0 - v0 * x * x))
        assert u == pytest.approx(u0, abs=1e-12)
        assert v == pytest.approx(v0, abs=1e-12)

    def test_two_point_interpolation(self):
        pts = [(0.5, 2.0), (1.5, -1.0)]
        u, v = solve_log_ls(pts)
        for x, y in pts:
            assert u - v * x * x == pytest.approx(y, abs=1e-12)

    def test_identical_abscissae_are_degenerate(self):
        with pytest.raises(DegenerateFitError):
            solve_log_ls([(1.0, 2.0), (1.0, 3.0), (1.0, 4.0)])

    def test_fewer_than_two_points(self):
        with pytest.raises(DegenerateFitError):
            solve_log_ls([(1.0, 2.0)])

    @settings(max_examples=60, deadline=None)
    @given(
        u0=st.floats(-5.0, 5.0),
        v0=st.floats(0.01, 50.0),
        n=st.integers(3, 12),
        span=st.floats(0.1, 3.0),
    )
    def test_recovers_any_exact_model(self, u0, v0, n, span):
        x = np.linspace(0.0, span, n)
        u, v = solve_log_ls(zip(x, u0 - v0 * x * x))
        assert abs(u - u0) <= 1e-9 * max(1.0, abs(u0))
        assert abs(v - v0) <= 1e-9 * max(1.0, abs(v0))

    def test_accumulators_match_definition(self):
        x = np.array([0.0, 1.0, 2.0])
        y = np.array([5.0, 4.0, 1.0])
        sums = LogFitSums.from_points(x, y)
        assert (sums.n12, sums.sr2, sums.sr4) == (3, 5.0, 17.0)
        assert (sums.sy, sums.syr2) == (10.0, 8.0)


class TestEstimateTerm:
    def test_origin_peak_exact_model(self):
        r = make_grid(8.0, 0.01)
        c = SampledCurve(r, 5.0 * shell_peak_gaussian(r, 0.0, 30.0))
        t = estimate_term(c, region_for(c, 5e-3, 2.5e-2), b_min=EIGHT_PI2 * 0.01**2)
        assert t.R == 0.0
        assert t.B == pytest.approx(30.0, rel=1e-2)
        assert t.C == pytest.approx(5.0, rel=1e-2)

    def test_interior_negative_peak_exact_model(self):
        r = make_grid(8.0, 0.01)
        c = SampledCurve(r, -2.0 * shell_peak_gaussian(r, 4.0, 25.0))
        t = estimate_term(c, region_for(c, 1e-3, 5e-3), b_min=EIGHT_PI2 * 0.01**2)
        assert t.R == pytest.approx(4.0, abs=1e-12)
        assert t.B == pytest.approx(25.0, rel=2e-2)
        assert t.C == pytest.approx(-2.0, rel=2e-2)

    def test_sign_round_trip(self):
        r = make_grid(8.0, 0.01)
        f = 3.0 * shell_peak_gaussian(r, 2.0, 15.0)
        pos = estimate_term(
            (cp := SampledCurve(r, f)), region_for(cp, 1e-3, 5e-3), b_min=1e-3
        )
        neg = estimate_term(
            (cn := SampledCurve(r, -f)), region_for(cn, 1e-3, 5e-3), b_min=1e-3
        )
        assert (neg.R, neg.B) == (pos.R, pos.B)
        assert neg.C == -pos.C

    def test_single_point_spike_uses_narrow_rule(self):
        r = make_grid(1.0, 0.01)
        f = np.zeros_like(r)
        f[40] = 2.0
        c = SampledCurve(r, f)
        b_min = EIGHT_PI2 * 0.01**2
        t = estimate_term(c, region_for(c, 0.5, 0.5), b_min)
        assert (t.R, t.B) == (0.4, b_min)
        # closing formula: term value at the peak equals the curve there
        assert t.C * shell_peak_gaussian(t.R, t.R, t.B) == pytest.approx(2.0, rel=1e-12)

    def test_narrow_origin_spike_matches_curve_at_zero(self):
        r = make_grid(1.0, 0.01)
        f = np.zeros_like(r)
        f[0] = 3.0
        c = SampledCurve(r, f)
        b_min = EIGHT_PI2 * 0.01**2
        t = estimate_term(c, PeakRegion(0, 0, 1, 1), b_min)
        assert (t.R, t.B) == (0.0, b_min)
        assert t.C * shell_peak_gaussian(0.0, 0.0, b_min) == pytest.approx(3.0, rel=1e-12)

    def test_error_vanishes_with_grid_step(self):
        # full shell shape (not the peak model): coarse-grid bias must shrink
        from shelldec.shells import omega_radial

        errs = []
        for h in (0.04, 0.01):
            r = make_grid(8.0, h)
            c = SampledCurve(r, 1.3 * omega_radial(r, 3.0, 6.0))
            t = estimate_term(c, region_for(c, 1e-3, 5e-3), b_min=EIGHT_PI2 * h * h)
            errs.append(abs(t.B - 6.0) + abs(t.C - 1.3))
        assert errs[1] <= errs[0]

    def test_region_shrinks_past_sign_changes(self, interference_curve):
        # first negative ripple carries positive neighbours inside its borders
        hit = find_next_peak(interference_curve, 1e-3, start_index=1)
        assert hit.sign == -1
        n1, n2 = peak_extent(interference_curve, hit.n_peak, 5e-3)
        t = estimate_term(
            interference_curve, PeakRegion(hit.n_peak, n1, n2, hit.sign), b_min=1e-3
        )
        assert t.C < 0.0 and t.B > 0.0

    def test_edge_peak_estimate_pins_radius_to_last_point(self):
        r = make_grid(6.0, 0.01)
        c = SampledCurve(r, shell_peak_gaussian(r, 7.0, 10.0))
        hit = find_next_peak(c, 1e-6)
        n1, n2 = peak_extent(c, hit.n_peak, 1e-6)
        t = estimate_term(c, PeakRegion(hit.n_peak, n1, n2, hit.sign, True), b_min=1e-3)
        assert t.R == 6.0

    def test_edge_peak_turns_interior_on_a_longer_grid(self):
        short = SampledCurve((rs := make_grid(6.0, 0.01)), shell_peak_gaussian(rs, 7.0, 10.0))
        long = SampledCurve((rl := make_grid(9.0, 0.01)), shell_peak_gaussian(rl, 7.0, 10.0))
        assert find_next_peak(short, 1e-6).at_edge
        hit = find_next_peak(long, 1e-6)
        assert not hit.at_edge
        assert rl[hit.n_peak] == pytest.approx(7.0, abs=1e-12)


class TestScanPeaks:
    def test_one_region_per_ripple(self, interference_curve):
        regions = scan_peaks(interference_curve, 1e-3, 5e-3)
        assert 10 <= len(regions) <= 20
        signs = [reg.sign for reg in regions]
        # ripples alternate after the origin peak
        assert all(a != b for a, b in zip(signs[1:], signs[2:]))

    def test_respects_budget(self, interference_curve):
        assert len(scan_peaks(interference_curve, 1e-3, 5e-3, max_count=3)) == 3

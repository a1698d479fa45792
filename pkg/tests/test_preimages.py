"""Certified preimage enumeration against closed forms and grid scans.

Oracles: the arctan closed form for tan (every solution of tan z = a is
atan(a) + k pi), the exhaustive grid scan from oracle_utils, and hand
counts for the frozen example regions.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from hypdim import (
    CountingSample,
    InsufficientData,
    Preimage,
    Rect,
    SolveReport,
    certified_counting_samples,
    count_zeros_in_rectangle,
    counting_function,
    estimate_order_of_growth,
    find_preimages,
    solve_in_disk,
    solve_in_rect,
)
from oracle_utils import grid_scan_count, grid_scan_roots


def assert_complete(report: SolveReport):
    assert report.region_count == report.refined_count == len(report.preimages)
    assert report.leaf_count_sum == report.region_count


class TestRect:
    def test_validation(self):
        with pytest.raises(ValueError):
            Rect(0.0, 0.0, 0.0, 1.0)

    def test_geometry(self):
        r = Rect(-1.0, 3.0, 0.0, 2.0)
        assert r.width == 4.0 and r.height == 2.0
        assert r.center == 1.0 + 1.0j
        assert r.diameter == pytest.approx(math.hypot(4.0, 2.0))
        assert r.contains(3.0 + 0.0j)
        assert not r.contains(3.1 + 0.0j)
        assert r.contains(3.1 + 0.0j, pad=0.2)

    def test_split_tiles(self):
        r = Rect(0.0, 1.0, 0.0, 1.0)
        parts = r.split()
        assert len(parts) == 4
        assert sum(p.width * p.height for p in parts) == pytest.approx(1.0)


class TestTanPreimages:
    def test_arctan_closed_form(self, tan_family):
        a = 0.37 + 0.2j
        rect = Rect(-10.0, 10.0, -2.0, 2.0)
        report = solve_in_rect(tan_family, a, rect)
        assert_complete(report)
        z0 = cmath.atan(a)
        expected = sorted(
            z0.real + k * math.pi for k in range(-10, 11) if abs(z0.real + k * math.pi) <= 10.0
        )
        got = sorted(p.point.real for p in report.preimages)
        assert len(got) == len(expected) == 7
        for g, e in zip(got, expected):
            assert abs(g - e) < 1e-8
        for p in report.preimages:
            assert abs(p.point.imag - z0.imag) < 1e-8

    def test_residuals_are_honest(self, tan_family):
        a = 0.37 + 0.2j
        for p in find_preimages(tan_family, a, 6.0):
            recomputed = abs(complex(tan_family.value_raw(np.asarray([p.point]))[0]) - a)
            assert p.residual == pytest.approx(recomputed, abs=1e-15)
            assert p.residual < 1e-9
            assert p.modulus == pytest.approx(abs(p.point))
            assert p.target == a

    def test_target_outside_every_branch(self, tan_family):
        # atan(2i) = +-pi/2 + i ln(3)/2, outside this rectangle
        rect = Rect(-math.pi / 2 + 0.1, math.pi / 2 - 0.1, -1.0, 1.0)
        report = solve_in_rect(tan_family, 2.0j, rect)
        assert report.region_count == 0
        assert report.preimages == []
        assert grid_scan_count(tan_family, 2.0j, rect) == 0

    def test_disk_filter_and_ordering(self, tan_family):
        pres = find_preimages(tan_family, 0.5, 8.0)
        assert all(p.modulus <= 8.0 for p in pres)
        moduli = [p.modulus for p in pres]
        assert moduli == sorted(moduli)

    def test_count_zeros_matches_grid(self, tan_family):
        rect = Rect(-4.0, 4.0, -1.5, 1.5)
        a = 1.3 - 0.7j
        assert count_zeros_in_rectangle(tan_family, a, rect) == grid_scan_count(
            tan_family, a, rect
        )


class TestWeierstrassPreimages:
    def test_two_per_fundamental_domain(self, wp_family):
        report = solve_in_rect(wp_family, 5.0, Rect(0.02, 0.98, 0.02, 0.98))
        assert_complete(report)
        assert report.region_count == 2
        z1, z2 = (p.point for p in report.preimages)
        # wp is even: the two preimages are symmetric through the cell center
        assert abs((z1 + z2) - (1.0 + 1.0j)) < 1e-8

    def test_frozen_large_square(self, wp_family):
        rect = Rect(-3.0, 3.0, -3.0, 3.0)
        report = solve_in_rect(wp_family, 10.0, rect)
        assert_complete(report)
        assert report.region_count == 84
        assert grid_scan_count(wp_family, 10.0, rect, n=601) == 84

    def test_grid_scan_positions_agree(self, wp_family):
        rect = Rect(0.02, 0.98, 0.02, 0.98)
        report = solve_in_rect(wp_family, 5.0, rect)
        oracle = grid_scan_roots(wp_family, 5.0, rect)
        assert len(oracle) == len(report.preimages)
        for p in sorted(report.preimages, key=lambda q: (q.point.real, q.point.imag)):
            assert min(abs(p.point - w) for w in oracle) < 1e-8


class TestCountingFunction:
    def test_nested_counts(self, tan_family):
        pres = find_preimages(tan_family, 0.5, 10.0)
        radii = [1.0, 2.0, 4.0, 8.0, 10.0]
        samples = counting_function(pres, radii)
        counts = [s.count for s in samples]
        assert counts == sorted(counts)
        assert counts[-1] == len(pres)
        # tan z = 0.5 has one solution per period: N(r) ~ 2r / pi
        assert counts[-1] == pytest.approx(2 * 10.0 / math.pi, abs=2)

    def test_unsorted_radii_rejected(self):
        with pytest.raises(ValueError):
            counting_function([], [2.0, 1.0])

    def test_insufficient_data(self):
        samples = [CountingSample(float(r), 0) for r in (1, 2, 3, 4, 5, 6)]
        with pytest.raises(InsufficientData):
            estimate_order_of_growth(samples)

    def test_order_of_growth_tan(self, tan_family):
        radii = [2.0 * 1.35**k for k in range(10)]
        samples = certified_counting_samples(tan_family, 0.5, radii)
        assert abs(estimate_order_of_growth(samples) - 1.0) < 0.1

    def test_order_of_growth_wp(self, wp_family):
        # small squares feel lattice discreteness; start the ladder at 1.5
        radii = [1.5 * 1.4**k for k in range(8)]
        samples = certified_counting_samples(wp_family, 5.0, radii)
        assert abs(estimate_order_of_growth(samples) - 2.0) < 0.1

    def test_synthetic_power_law(self):
        # N(r) = r^3 exactly must regress to slope 3
        samples = [CountingSample(float(r), int(r**3)) for r in (2, 3, 4, 5, 6, 8, 10)]
        assert abs(estimate_order_of_growth(samples) - 3.0) < 0.05


class TestSolveReportShape:
    def test_cells_examined_counts_work(self, tan_family):
        report = solve_in_rect(tan_family, 0.5, Rect(-4.0, 4.0, -1.0, 1.0))
        assert report.cells_examined >= 1
        assert_complete(report)

    def test_disk_report_keeps_region(self, tan_family):
        report = solve_in_disk(tan_family, 0.5, 3.0)
        assert report.region.x0 <= -3.0 and report.region.x1 >= 3.0
        assert all(isinstance(p, Preimage) for p in report.preimages)

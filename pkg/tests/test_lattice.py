"""Weierstrass lattice machinery: invariants, wp, reduction, compensated ops.

Oracles used here, all independent of the q-series implementation:
  * the square-lattice closed form g2 = Gamma(1/4)^8 / (16 pi^2), g3 = 0;
  * the defining lattice sums, truncated at a large cutoff;
  * Fraction arithmetic for the error-free transformations;
  * frozen reference values for wp and wp' at an interior point, computed
    once from the direct lattice sum at cutoff 2000 and pinned below.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypdim import Lattice
from hypdim._compensated import (
    cdd_collapse,
    cdd_from_complex,
    cdd_mul,
    horner_compensated,
    integer_combination,
    two_prod,
    two_sum,
)

# square-lattice closed form (lemniscatic case)
G2_SQUARE = math.gamma(0.25) ** 8 / (16.0 * math.pi**2)

# direct lattice sum at cutoff 2000, frozen
WP_REF_Z = 0.3 + 0.4j
WP_REF = -1.4702490148453613 - 1.8701856365620024j
WP_PRIME_REF = 19.905156159413043 + 8.320805028328504j


@pytest.fixture(scope="module")
def rect_lattice() -> Lattice:
    return Lattice(1.0, 1.5j)


def random_interior_points(lattice, rng, n):
    """Points of the fundamental cell at distance >= 0.1 from every pole."""
    out = []
    while len(out) < n:
        xy = rng.random((2, 4 * n)) - 0.5
        z = lattice.reduce(xy[0] * lattice.omega1 + xy[1] * lattice.omega2)
        z = z[lattice.distance_to_lattice(z) >= 0.1]
        out.extend(z.tolist())
    return np.array(out[:n])


class TestInvariants:
    def test_square_lattice_closed_form(self, square_lattice):
        assert square_lattice.g3 == 0
        assert abs(square_lattice.g2 - G2_SQUARE) < 1e-10 * G2_SQUARE

    def test_rectangular_invariants_real(self, rect_lattice):
        # rectangular lattices are self-conjugate, so g2, g3 are real
        assert abs(rect_lattice.g2.imag) < 1e-12 * abs(rect_lattice.g2)
        assert abs(rect_lattice.g3.imag) < 1e-12 * abs(rect_lattice.g3)
        assert rect_lattice.g3 != 0

    def test_eisenstein_cross_check(self, square_lattice, rect_lattice):
        # truncation error of sum' w^-4 decays like cutoff^-2
        for lat in (square_lattice, rect_lattice):
            r120 = lat.invariants_residual(120.0)
            assert r120 < 2e-4
            assert lat.invariants_residual(240.0) < 0.5 * r120

    def test_scaling_covariance(self):
        # g2(c L) = c^-4 g2(L), g3(c L) = c^-6 g3(L)
        base = Lattice(1.0, 1.5j)
        scaled = Lattice(2.0, 3.0j)
        assert abs(scaled.g2 - base.g2 / 16.0) < 1e-12 * abs(base.g2)
        assert abs(scaled.g3 - base.g3 / 64.0) < 1e-12 * abs(base.g3)


class TestWp:
    def test_frozen_reference_point(self, square_lattice):
        assert abs(square_lattice.wp(WP_REF_Z) - WP_REF) < 1e-10
        assert abs(square_lattice.wp_prime(WP_REF_Z) - WP_PRIME_REF) < 1e-9

    def test_against_direct_sum(self, square_lattice, rect_lattice):
        for lat, z in ((square_lattice, 0.31 + 0.24j), (rect_lattice, 0.27 + 0.61j)):
            direct = lat.wp_lattice_sum(z, 300.0)
            assert abs(lat.wp(z) - direct) < 1e-4 * max(1.0, abs(direct))

    def test_differential_equation(self, square_lattice, rect_lattice, rng):
        for lat in (square_lattice, rect_lattice):
            z = random_interior_points(lat, rng, 100)
            p, pp = lat.wp_and_prime(z)
            lhs = pp**2
            rhs = 4 * p**3 - lat.g2 * p - lat.g3
            scale = np.maximum(1.0, np.abs(lhs))
            assert np.max(np.abs(lhs - rhs) / scale) < 1e-9

    def test_periodicity_and_evenness(self, square_lattice, rng):
        lat = square_lattice
        z = random_interior_points(lat, rng, 100)
        p = lat.wp(z)
        scale = np.maximum(1.0, np.abs(p))
        for shift in (lat.omega1, lat.omega2, 3 * lat.omega1 - 2 * lat.omega2):
            assert np.max(np.abs(lat.wp(z + shift) - p) / scale) < 1e-8
        assert np.max(np.abs(lat.wp(-z) - p) / scale) < 1e-8
        assert np.max(np.abs(lat.wp_prime(-z) + lat.wp_prime(z))) < 1e-8 * np.max(
            np.maximum(1.0, np.abs(lat.wp_prime(z)))
        )

    def test_pole_behavior(self, square_lattice):
        # wp(z) ~ z^-2 near the origin
        for eps in (1e-3, 1e-4):
            z = eps * np.exp(0.37j)
            assert abs(square_lattice.wp(z) * z**2 - 1.0) < 100 * eps**2
        assert np.isinf(square_lattice.wp(0.0).real)

    def test_critical_values_at_half_periods(self, square_lattice):
        # wp' vanishes at the three half-periods
        lat = square_lattice
        for w in (lat.omega1 / 2, lat.omega2 / 2, (lat.omega1 + lat.omega2) / 2):
            assert abs(lat.wp_prime(w)) < 1e-9

    def test_large_argument(self, square_lattice):
        # periodicity must survive arguments far from the fundamental cell
        z = WP_REF_Z + 1000 * square_lattice.omega1 - 737 * square_lattice.omega2
        assert abs(square_lattice.wp(z) - WP_REF) < 1e-8


class TestReduce:
    def test_voronoi_property(self, square_lattice, rng):
        z = (rng.random(200) - 0.5) * 40 + 1j * (rng.random(200) - 0.5) * 40
        u = square_lattice.reduce(z)
        # nearest lattice point to the reduced value is the origin
        pts = np.array(square_lattice.points_in_disk(2.0))
        for p in pts[np.abs(pts) > 0]:
            assert np.all(np.abs(u) <= np.abs(u - p) + 1e-12)

    @given(
        m=st.integers(min_value=-50, max_value=50),
        n=st.integers(min_value=-50, max_value=50),
        x=st.floats(min_value=-0.49, max_value=0.49),
        y=st.floats(min_value=-0.49, max_value=0.49),
    )
    @settings(max_examples=60, deadline=None)
    def test_translation_invariance(self, m, n, x, y):
        lat = Lattice(1.0, 1.0j)
        z = complex(x, y)
        shifted = lat.reduce(z + m * lat.omega1 + n * lat.omega2)
        assert abs(shifted - lat.reduce(z)) < 1e-9 * max(1.0, abs(m) + abs(n))

    def test_compensated_matches_plain_for_small_args(self, square_lattice, rng):
        z = (rng.random(50) - 0.5) * 6 + 1j * (rng.random(50) - 0.5) * 6
        quad = cdd_from_complex(z)
        assert np.max(
            np.abs(square_lattice.reduce_compensated(quad) - square_lattice.reduce(z))
        ) < 1e-14


class TestPointEnumeration:
    def test_disk_count_square(self, square_lattice):
        pts = np.array(square_lattice.points_in_disk(10.0))
        # Gauss circle: |N(r) - pi r^2| = O(r)
        assert abs(len(pts) - math.pi * 100.0) < 40
        assert np.max(np.abs(pts)) <= 10.0
        assert len(set(pts.tolist())) == len(pts)

    def test_points_near_matches_brute_force(self, rect_lattice):
        center, radius = 17.3 - 4.1j, 6.0
        got = set(np.round(rect_lattice.points_near(center, radius), 9).tolist())
        brute = set()
        for m in range(-40, 41):
            for n in range(-40, 41):
                w = m * rect_lattice.omega1 + n * rect_lattice.omega2
                if abs(w - center) <= radius:
                    brute.add(complex(np.round(w.real, 9), np.round(w.imag, 9)))
        assert got == brute

    def test_half_lattice_near(self, square_lattice):
        # the three strict half-period classes, full lattice points excluded
        center, radius = 5.0 + 5.0j, 2.0
        pts = square_lattice.half_lattice_points_near(center, radius)
        got = {complex(np.round(p.real, 9), np.round(p.imag, 9)) for p in pts}
        brute = set()
        for m in range(0, 21):
            for n in range(0, 21):
                w = complex(m, n) / 2.0
                if (m % 2, n % 2) != (0, 0) and abs(w - center) <= radius:
                    brute.add(w)
        assert got == brute

    def test_points_in_rect(self, square_lattice):
        pts = square_lattice.points_in_rect(-1.5, 1.5, -0.5, 2.5)
        assert len(pts) == 9


# two_prod's error term underflows once |a*b| nears the subnormal range, so
# the exactness property is only claimed over a wide-but-safe magnitude band
def _safe_floats():
    return st.floats(min_value=-1e50, max_value=1e50).filter(
        lambda v: v == 0.0 or abs(v) >= 1e-50
    )


class TestCompensated:
    @given(a=_safe_floats(), b=_safe_floats())
    @settings(max_examples=200, deadline=None)
    def test_two_sum_exact(self, a, b):
        s, e = two_sum(a, b)
        assert Fraction(s) + Fraction(e) == Fraction(a) + Fraction(b)

    @given(a=_safe_floats(), b=_safe_floats())
    @settings(max_examples=200, deadline=None)
    def test_two_prod_exact(self, a, b):
        p, e = two_prod(a, b)
        assert Fraction(p) + Fraction(e) == Fraction(a) * Fraction(b)

    def test_cdd_mul_exact(self):
        x = cdd_from_complex(np.array(3e7 + 1.0 + 1j * (2e7 - 1.0)))
        y = cdd_from_complex(np.array(1e7 - 3.0 + 1j * (5e6 + 7.0)))
        z = cdd_mul(x, y)
        exact_re = Fraction(3e7 + 1.0) * Fraction(1e7 - 3.0) - Fraction(
            2e7 - 1.0
        ) * Fraction(5e6 + 7.0)
        got = Fraction(float(z[0])) + Fraction(float(z[1]))
        assert abs(got - exact_re) <= Fraction(1, 10**12)

    def test_horner_matches_exact_rational(self):
        # z^3 - 2^40 z + 1/3 near z = 2^20: the cubic and linear terms cancel
        # to 7 digits, which plain doubles cannot survive
        coeffs = [1.0 / 3.0, -(2.0**40), 0.0, 1.0]
        zv = 1048576.123456
        exact = Fraction(0)
        for c in reversed(coeffs):
            exact = exact * Fraction(zv) + Fraction(c)
        quad = horner_compensated(coeffs, np.array(zv + 0.0j))
        got = Fraction(float(quad[0])) + Fraction(float(quad[1]))
        assert abs(got - exact) < Fraction(1, 10**12)

    def test_horner_beats_plain_doubles(self):
        coeffs = [1.0 / 3.0, -(2.0**40), 0.0, 1.0]
        zv = 1048576.123456
        exact = Fraction(0)
        for c in reversed(coeffs):
            exact = exact * Fraction(zv) + Fraction(c)
        compensated = complex(
            cdd_collapse(horner_compensated(coeffs, np.array(zv + 0.0j)))
        )
        plain = float(np.polyval(list(reversed(coeffs)), zv))
        comp_err = abs(Fraction(compensated.real) - exact)
        plain_err = abs(Fraction(plain) - exact)
        assert plain_err > 1  # measured ~1e2: cancellation really does bite
        assert comp_err < plain_err / 10**6

    def test_integer_combination_exact(self):
        quad = integer_combination(
            np.array(12345678.0), np.array(-9876543.0), 1.0, 1.0j
        )
        assert float(quad[0]) == 12345678.0 and float(quad[1]) == 0.0
        assert float(quad[2]) == -9876543.0 and float(quad[3]) == 0.0

    def test_reduce_compensated_cancellation(self, square_lattice):
        # a value within 1e-9 of a huge lattice point: plain reduction sees
        # only ulp(1e8) ~ 1.5e-8 of it, the compensated path keeps the offset
        big = 7.0e7 + 1.0j * 3.0e7
        offset = 1e-9 + 2e-9j
        quad = cdd_from_complex(np.array(big))
        quad = (
            quad[0],
            quad[1] + offset.real,
            quad[2],
            quad[3] + offset.imag,
        )
        u = complex(square_lattice.reduce_compensated(quad))
        assert abs(u - offset) < 1e-15

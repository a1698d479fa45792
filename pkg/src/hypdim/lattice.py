r"""Weierstrass elliptic functions on an arbitrary period lattice.

A lattice ``L = Z*omega1 + Z*omega2`` (generators independent over R)
carries the Weierstrass function

    wp(z) = 1/z^2 + sum' [ 1/(z-w)^2 - 1/w^2 ],   w over L \ {0},

a doubly periodic meromorphic function with a double pole on every
lattice point, together with the invariants

    g2 = 60 sum' w^-4,      g3 = 140 sum' w^-6,

tied to wp by the differential equation  wp'^2 = 4 wp^3 - g2 wp - g3.

Evaluation strategy
-------------------
The defining sum converges too slowly for double-precision targets, so
it is kept only as a cross-check oracle (:func:`wp_lattice_sum`).  The
production path is:

1. Lagrange/Gauss reduction of the basis, so the half-period ratio tau
   satisfies |Re tau| <= 1/2, |tau| >= 1.
2. g2, g3 from the normalized Eisenstein q-expansions at the reduced
   tau (|q| <= exp(-pi*sqrt(3)), a handful of terms reaches 1e-15).
3. wp via its Laurent expansion around 0, whose coefficients follow the
   classical recursion seeded by g2/20 and g3/28.  Arguments are first
   translated to the Voronoi cell of the origin; if still too large a
   fraction of the shortest lattice vector, the argument is halved and
   the duplication formula applied on the way back up.

All evaluators accept numpy arrays and are pure; a built lattice is
immutable.
"""

from __future__ import annotations

import numpy as np

from ._compensated import cdd_add, cdd_collapse, cdd_neg, integer_combination
from .errors import SeriesNotConverged

# Laurent tail (|u| <= SERIES_RADIUS_FRACTION * shortest vector) decays like
# (fraction^2)^k; 0.45 needs ~24 terms for 1e-16, padded below.
SERIES_RADIUS_FRACTION = 0.45
SERIES_TERMS = 40

_ZETA4 = np.pi**4 / 90.0
_ZETA6 = np.pi**6 / 945.0


def _gauss_reduce(w1: complex, w2: complex) -> tuple[complex, complex]:
    """Return a Lagrange-reduced basis (a, b) of Z*w1 + Z*w2 with Im(b/a) > 0."""
    a, b = complex(w1), complex(w2)
    for _ in range(200):
        if abs(a) > abs(b):
            a, b = b, a
        mu = round((b * a.conjugate()).real / abs(a) ** 2)
        b_next = b - mu * a
        if abs(b_next) >= abs(a) and mu == 0:
            break
        b = b_next
    else:  # pragma: no cover - reduction always terminates for a valid basis
        raise SeriesNotConverged("lattice basis reduction did not terminate")
    if (b / a).imag < 0:
        b = -b
    return a, b


class Lattice:
    """Immutable period lattice with cached invariants and series data.

    Parameters are the two generators.  Orientation is normalized at
    construction (generators are swapped if needed) so the stored pair
    satisfies Im(omega1/omega2) > 0.  Generators must be R-independent.
    """

    def __init__(self, omega1: complex, omega2: complex, series_tolerance: float = 1e-10):
        w1, w2 = complex(omega1), complex(omega2)
        ratio = w1 / w2
        if ratio.imag == 0.0:
            raise ValueError("lattice generators are linearly dependent over R")
        if ratio.imag < 0:
            w1, w2 = w2, w1
        self.omega1 = w1
        self.omega2 = w2
        self.series_tolerance = float(series_tolerance)

        a, b = _gauss_reduce(w1, w2)
        self._a = a
        self._b = b
        self.tau = b / a
        self.shortest_vector = abs(a)
        self.cell_area = abs((a.conjugate() * b).imag)

        self.g2, self.g3 = self._invariants_from_q_series()
        self._coeffs = _laurent_coefficients(self.g2, self.g3, SERIES_TERMS)

        # inverse of the real 2x2 basis matrix, for argument reduction
        det = a.real * b.imag - a.imag * b.real
        self._inv_basis = np.array(
            [[b.imag / det, -b.real / det], [-a.imag / det, a.real / det]]
        )

    # -- construction helpers -------------------------------------------------

    def _invariants_from_q_series(self) -> tuple[complex, complex]:
        q = np.exp(2j * np.pi * self.tau)
        if abs(q) > 0.9:  # pragma: no cover - impossible after reduction
            raise SeriesNotConverged("q-expansion of the invariants diverges")
        n = np.arange(1, 60)
        qn = q**n
        e4 = 1 + 240 * np.sum(n**3 * qn / (1 - qn))
        e6 = 1 - 504 * np.sum(n**5 * qn / (1 - qn))
        g2 = complex(60 * (2 * _ZETA4) * e4 / self._a**4)
        g3 = complex(140 * (2 * _ZETA6) * e6 / self._a**6)
        # square-like and hexagonal lattices have an exactly vanishing
        # invariant that the q-series only reproduces to rounding level
        scale = max(abs(g2) ** 1.5, abs(g3), 1e-300)
        if abs(g3) < 1e-12 * scale:
            g3 = 0.0 + 0.0j
        if abs(g2) < 1e-12 * max(abs(g3), 1e-300) ** (2.0 / 3.0):
            g2 = 0.0 + 0.0j
        return g2, g3

    # -- lattice geometry ------------------------------------------------------

    def reduce(self, z: np.ndarray | complex) -> np.ndarray:
        """Translate z by lattice vectors into the Voronoi cell of the origin."""
        z = np.asarray(z, dtype=complex)
        xy = np.tensordot(self._inv_basis, np.stack([z.real, z.imag]), axes=1)
        u = z - np.round(xy[0]) * self._a - np.round(xy[1]) * self._b
        # rounding in basis coordinates gives the centered parallelogram;
        # scan the 8 neighbor translates for the true nearest lattice point
        best = u.copy()
        best_abs = np.abs(best)
        for s in (-1, 0, 1):
            for t in (-1, 0, 1):
                if s == 0 and t == 0:
                    continue
                cand = u - (s * self._a + t * self._b)
                mask = np.abs(cand) < best_abs
                best = np.where(mask, cand, best)
                best_abs = np.abs(best)
        return best

    def distance_to_lattice(self, z: np.ndarray | complex) -> np.ndarray:
        return np.abs(self.reduce(z))

    def reduce_compensated(self, quad) -> np.ndarray:
        """Reduce a compensated value (re_hi, re_lo, im_hi, im_lo) into the cell.

        A value of modulus ~1e6 rounded to a plain double already carries an
        absolute error ~1e-10, which survives reduction and dominates every
        downstream evaluation.  Subtracting the nearest lattice point while
        both operands are still unevaluated double-double sums keeps the
        cancellation exact; only then is the small remainder collapsed.
        """
        hi = quad[0] + 1j * quad[2]
        xy = np.tensordot(self._inv_basis, np.stack([hi.real, hi.imag]), axes=1)
        lam = integer_combination(np.round(xy[0]), np.round(xy[1]), self._a, self._b)
        u = cdd_collapse(cdd_add(quad, cdd_neg(lam)))
        # remainder is at most one cell across: plain reduce finds the
        # Voronoi representative without reintroducing large operands
        return self.reduce(u)

    def points_in_disk(self, radius: float) -> list[complex]:
        """All lattice points with modulus <= radius, nearest first."""
        return self.points_near(0.0, radius)

    def points_near(self, center: complex, radius: float) -> list[complex]:
        """All lattice points within radius of center, nearest first.

        The index window is anchored at the basis coordinates of center, so
        the cost depends on the radius only, not on how far out center sits.
        """
        center = complex(center)
        xy = self._inv_basis @ np.array([center.real, center.imag])
        # conservative index bounds from the inverse basis
        bound = int(np.ceil(radius * np.abs(self._inv_basis).sum())) + 2
        m = np.arange(int(np.floor(xy[0])) - bound, int(np.ceil(xy[0])) + bound + 1)
        n = np.arange(int(np.floor(xy[1])) - bound, int(np.ceil(xy[1])) + bound + 1)
        mm, nn = np.meshgrid(m, n, indexing="ij")
        pts = mm * self._a + nn * self._b
        keep = np.abs(pts - center) <= radius
        chosen = pts[keep]
        order = np.lexsort((np.angle(chosen), np.round(np.abs(chosen - center), 12)))
        return [complex(p) for p in chosen[order]]

    def points_in_rect(self, x0: float, x1: float, y0: float, y1: float) -> list[complex]:
        """All lattice points inside the closed axis-aligned rectangle."""
        corners = np.array([complex(x0, y0), complex(x1, y0), complex(x0, y1), complex(x1, y1)])
        xy = np.tensordot(self._inv_basis, np.stack([corners.real, corners.imag]), axes=1)
        mlo, mhi = int(np.floor(xy[0].min())) - 1, int(np.ceil(xy[0].max())) + 1
        nlo, nhi = int(np.floor(xy[1].min())) - 1, int(np.ceil(xy[1].max())) + 1
        mm, nn = np.meshgrid(np.arange(mlo, mhi + 1), np.arange(nlo, nhi + 1), indexing="ij")
        pts = mm * self._a + nn * self._b
        keep = (pts.real >= x0) & (pts.real <= x1) & (pts.imag >= y0) & (pts.imag <= y1)
        chosen = pts[keep]
        order = np.lexsort((np.angle(chosen), np.round(np.abs(chosen), 12)))
        return [complex(p) for p in chosen[order]]

    def half_lattice_points_in_disk(self, radius: float) -> list[complex]:
        """Half-period points (critical points of wp) with modulus <= radius."""
        return self.half_lattice_points_near(0.0, radius)

    def half_lattice_points_near(self, center: complex, radius: float) -> list[complex]:
        """Half-period points within radius of center, nearest first."""
        center = complex(center)
        out = []
        for base in (self._a / 2, self._b / 2, (self._a + self._b) / 2):
            for p in self.points_near(center - base, radius):
                out.append(p + base)
        return sorted(out, key=lambda w: (abs(w - center), np.angle(w - center)))

    # -- evaluation ------------------------------------------------------------

    def wp(self, z: np.ndarray | complex) -> np.ndarray | complex:
        p, _ = self.wp_and_prime(z)
        return p

    def wp_prime(self, z: np.ndarray | complex) -> np.ndarray | complex:
        _, pp = self.wp_and_prime(z)
        return pp

    def wp_and_prime(self, z: np.ndarray | complex) -> tuple:
        """Evaluate (wp(z), wp'(z)) elementwise; lattice points map to inf."""
        scalar = np.isscalar(z) or (isinstance(z, np.ndarray) and z.ndim == 0)
        u = self.reduce(np.atleast_1d(np.asarray(z, dtype=complex)))
        split = SERIES_RADIUS_FRACTION * self.shortest_vector

        au = np.abs(u)
        at_pole = au == 0.0
        au = np.where(at_pole, 1.0, au)  # avoid log of zero below
        halvings = np.maximum(0, np.ceil(np.log2(au / split)).astype(int))
        max_halvings = int(halvings.max(initial=0))
        if max_halvings > 60:  # pragma: no cover - defensive
            raise SeriesNotConverged("argument reduction required too many halvings")

        v = u / (2.0**halvings)
        p, pp = _laurent_eval(np.where(at_pole, 1.0, v), self._coeffs)
        for j in range(1, max_halvings + 1):
            mask = halvings >= j
            if not mask.any():
                continue
            p_m, pp_m = _duplicate(p[mask], pp[mask], self.g2, self.g3)
            p[mask] = p_m
            pp[mask] = pp_m

        p[at_pole] = np.inf
        pp[at_pole] = np.inf
        if scalar:
            return complex(p[0]), complex(pp[0])
        return p.reshape(np.shape(z)), pp.reshape(np.shape(z))

    # -- slow oracles ----------------------------------------------------------

    def wp_lattice_sum(self, z: complex, cutoff: float) -> complex:
        """Direct defining sum over lattice points with |w| <= cutoff.

        Slowly convergent; intended as an independent cross-check only.
        """
        z = complex(z)
        pts = np.array(self.points_in_disk(cutoff))
        pts = pts[np.abs(pts) > 0]
        return 1.0 / z**2 + np.sum(1.0 / (z - pts) ** 2 - 1.0 / pts**2)

    def eisenstein_sum(self, power: int, cutoff: float) -> complex:
        """Truncated sum' w^-power over |w| <= cutoff."""
        pts = np.array(self.points_in_disk(cutoff))
        pts = pts[np.abs(pts) > 0]
        return complex(np.sum(pts ** (-float(power))))

    def invariants_residual(self, cutoff: float) -> float:
        """Max relative deviation of g2, g3 from truncated Eisenstein sums."""
        g2_direct = 60 * self.eisenstein_sum(4, cutoff)
        g3_direct = 140 * self.eisenstein_sum(6, cutoff)
        scale = max(abs(self.g2), abs(self.g3), 1.0)
        return max(abs(self.g2 - g2_direct), abs(self.g3 - g3_direct)) / scale

    def __repr__(self) -> str:
        return f"Lattice(omega1={self.omega1}, omega2={self.omega2})"


def _laurent_coefficients(g2: complex, g3: complex, terms: int) -> np.ndarray:
    """Coefficients c_k of wp(u) = u^-2 + sum_{k>=1} c_k u^{2k}."""
    c = np.zeros(terms + 1, dtype=complex)
    c[1] = g2 / 20.0
    c[2] = g3 / 28.0
    for k in range(3, terms + 1):
        acc = 0.0 + 0.0j
        for m in range(1, k - 1):
            acc += c[m] * c[k - 1 - m]
        c[k] = 3.0 * acc / ((2 * k + 3) * (k - 2))
    return c


def _laurent_eval(u: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u2 = u * u
    p_tail = np.zeros_like(u)
    pp_tail = np.zeros_like(u)
    for k in range(len(c) - 1, 0, -1):  # Horner in u^2
        p_tail = p_tail * u2 + c[k]
        pp_tail = pp_tail * u2 + 2 * k * c[k]
    p = 1.0 / u2 + p_tail * u2
    pp = -2.0 / (u2 * u) + pp_tail * u
    return p, pp


def _duplicate(p: np.ndarray, pp: np.ndarray, g2: complex, g3: complex):
    """(wp, wp')(u) -> (wp, wp')(2u) through the duplication rational map."""
    num = (6 * p * p - g2 / 2) ** 2
    den = 4 * (4 * p**3 - g2 * p - g3)
    dnum = 2 * (6 * p * p - g2 / 2) * 12 * p
    dden = 4 * (12 * p * p - g2)
    p2 = num / den - 2 * p
    slope = (dnum * den - num * dden) / den**2 - 2
    pp2 = slope * pp / 2.0
    return p2, pp2

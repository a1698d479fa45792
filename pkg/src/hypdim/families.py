"""Catalogued meromorphic function families.

Four families are supported, each with closed-form analytic metadata
(order of growth, derivative growth exponent on preimage sets, pole
catalog with multiplicities and leading coefficients):

* ``TanPower``             f(z) = lam * tan(z)^m
* ``WeierstrassP``         f(z) = wp(z) on a period lattice
* ``EllipticComposePoly``  f(z) = wp(P(z)), P a polynomial
* ``ExpElliptic``          f(z) = lam * (1 + wp(z)/d)^d

Every family exposes a scalar guarded evaluator (``value`` returns an
:class:`AtPole` marker inside the pole exclusion disk), raw vectorized
evaluators for bulk numerics, and pole enumeration in disks and
rectangles.  All instances are immutable and safe to share.
"""

from __future__ import annotations

import functools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from ._compensated import horner_compensated
from .errors import AtPoleError
from .lattice import Lattice

DEFAULT_POLE_EXCLUSION_RADIUS = 1e-12


@dataclass(frozen=True)
class AtPole:
    """Marker result for evaluation inside a pole exclusion disk."""

    pole: complex


@dataclass(frozen=True)
class PoleData:
    """One catalogued pole: f(z) ~ leading_coefficient / (z - location)^multiplicity."""

    location: complex
    multiplicity: int
    leading_coefficient: complex

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("pole multiplicity must be >= 1")


@dataclass(frozen=True)
class Polynomial:
    """Polynomial with coefficients listed lowest degree first."""

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        if not coeffs or coeffs[-1] == 0:
            raise ValueError("leading coefficient must be nonzero")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, z):
        return np.polyval(list(reversed(self.coefficients)), z)

    def eval_compensated(self, z):
        """P(z) as a double-double quadruple; see hypdim._compensated."""
        return horner_compensated(self.coefficients, z)

    def derivative_at(self, z):
        dcoeffs = [k * c for k, c in enumerate(self.coefficients)][1:]
        if not dcoeffs:
            return np.zeros_like(np.asarray(z, dtype=complex))
        return np.polyval(list(reversed(dcoeffs)), z)

    def solve(self, w: complex) -> np.ndarray:
        """All roots of P(z) = w (companion-matrix eigenvalues)."""
        coeffs = list(reversed(self.coefficients))
        coeffs[-1] = coeffs[-1] - w
        return np.roots(coeffs)


class Family(ABC):
    """A meromorphic function with evaluators and analytic metadata."""

    order: float
    alpha1: float
    max_pole_multiplicity: int

    def __init__(self, pole_exclusion_radius: float = DEFAULT_POLE_EXCLUSION_RADIUS):
        self.pole_exclusion_radius = float(pole_exclusion_radius)

    # -- evaluation -------------------------------------------------------

    def value(self, z: complex):
        """f(z), or AtPole when z sits inside a pole exclusion disk."""
        z = complex(z)
        pole = self.nearest_pole(z)
        if pole is not None and abs(z - pole.location) <= self.pole_exclusion_radius:
            return AtPole(pole.location)
        return complex(self.value_raw(np.asarray([z]))[0])

    def derivative(self, z: complex) -> complex:
        """f'(z); raises AtPoleError inside a pole exclusion disk."""
        z = complex(z)
        pole = self.nearest_pole(z)
        if pole is not None and abs(z - pole.location) <= self.pole_exclusion_radius:
            raise AtPoleError(z, pole.location)
        return complex(self.derivative_raw(np.asarray([z]))[0])

    @abstractmethod
    def value_raw(self, z: np.ndarray) -> np.ndarray:
        """Vectorized f(z) without pole guarding."""

    @abstractmethod
    def derivative_raw(self, z: np.ndarray) -> np.ndarray:
        """Vectorized f'(z) without pole guarding."""

    # -- pole catalog -----------------------------------------------------

    @abstractmethod
    def poles_in_disk(self, radius: float) -> list[PoleData]:
        """All poles with |location| <= radius, sorted by modulus then argument."""

    @abstractmethod
    def poles_in_rect(self, x0: float, x1: float, y0: float, y1: float) -> list[PoleData]:
        """All poles inside the closed rectangle."""

    @abstractmethod
    def distance_to_poles(self, z: np.ndarray) -> np.ndarray:
        """Elementwise distance to the nearest catalogued pole."""

    def nearest_pole(self, z: complex) -> PoleData | None:
        """Nearest catalogued pole, or None for families without poles nearby."""
        hits = self.poles_in_rect(z.real - 2.0, z.real + 2.0, z.imag - 2.0, z.imag + 2.0)
        if not hits:
            hits = self.poles_in_disk(abs(z) + 4.0)
        if not hits:
            return None
        return min(hits, key=lambda p: abs(z - p.location))

    # -- analytic metadata --------------------------------------------------

    @abstractmethod
    def singular_values(self) -> list[complex]:
        """Known finite critical and asymptotic values."""

    @abstractmethod
    def critical_points_in_disk(self, center: complex, radius: float) -> list[complex]:
        """Known critical points within distance radius of center."""

    @abstractmethod
    def describe(self) -> dict:
        """Plain-data description for manifests and reports."""

    @property
    def label(self) -> str:
        return self.describe()["variant"]


def _ipow(base: np.ndarray, n: int) -> np.ndarray:
    """Integer power by repeated squaring."""
    result = np.ones_like(base)
    b = base.copy() if isinstance(base, np.ndarray) else base
    k = n
    while k > 0:
        if k & 1:
            result = result * b
        b = b * b
        k >>= 1
    return result


def _quiet(fn):
    """Silence inf/nan warnings: pole-adjacent evaluation overflows by
    design, and downstream certificates reject affected panels."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            return fn(*args, **kwargs)

    return wrapper


class TanPower(Family):
    """f(z) = lam * tan(z)^m, 1-periodic in units of pi, poles at pi/2 + k*pi."""

    def __init__(self, lam: complex = 1.0, m: int = 1, **kwargs):
        super().__init__(**kwargs)
        if m < 1:
            raise ValueError("power m must be a positive integer")
        if lam == 0:
            raise ValueError("lam must be nonzero")
        self.lam = complex(lam)
        self.m = int(m)
        self.order = 1.0
        self.alpha1 = 0.0
        self.max_pole_multiplicity = self.m

    @_quiet
    def value_raw(self, z):
        t = np.tan(np.asarray(z, dtype=complex))
        return self.lam * _ipow(t, self.m)

    @_quiet
    def derivative_raw(self, z):
        t = np.tan(np.asarray(z, dtype=complex))
        return self.lam * self.m * _ipow(t, self.m - 1) * (1.0 + t * t)

    def _leading_coefficient(self) -> complex:
        # tan(pi/2 + u) = -cot(u), so f * (z - pole)^m -> lam * (-1)^m
        return self.lam * (-1.0) ** self.m

    def poles_in_disk(self, radius):
        out = []
        k = 0
        while True:
            hit = False
            for loc in {math.pi / 2 + k * math.pi, math.pi / 2 - (k + 1) * math.pi}:
                if abs(loc) <= radius:
                    out.append(PoleData(complex(loc), self.m, self._leading_coefficient()))
                    hit = True
            if not hit:
                break
            k += 1
        return sorted(out, key=lambda p: (abs(p.location), np.angle(p.location)))

    def poles_in_rect(self, x0, x1, y0, y1):
        if y0 > 0 or y1 < 0:
            return []
        klo = math.ceil((x0 - math.pi / 2) / math.pi)
        khi = math.floor((x1 - math.pi / 2) / math.pi)
        return [
            PoleData(complex(math.pi / 2 + k * math.pi), self.m, self._leading_coefficient())
            for k in range(klo, khi + 1)
        ]

    def distance_to_poles(self, z):
        z = np.asarray(z, dtype=complex)
        k = np.round((z.real - math.pi / 2) / math.pi)
        return np.abs(z - (math.pi / 2 + k * math.pi))

    def singular_values(self):
        vals = [self.lam * (1j) ** self.m, self.lam * (-1j) ** self.m]
        if self.m >= 2:
            vals.append(0.0 + 0.0j)
        out = []
        for v in vals:
            if all(abs(v - u) > 1e-12 for u in out):
                out.append(complex(v))
        return out

    def critical_points_in_disk(self, center, radius):
        if self.m < 2:
            return []
        klo = math.ceil((center.real - radius) / math.pi)
        khi = math.floor((center.real + radius) / math.pi)
        pts = [complex(k * math.pi) for k in range(klo, khi + 1)]
        return [p for p in pts if abs(p - center) <= radius]

    def describe(self):
        return {
            "variant": "tan",
            "lambda_re": self.lam.real,
            "lambda_im": self.lam.imag,
            "m": self.m,
        }


class WeierstrassP(Family):
    """The Weierstrass function on a period lattice; double pole on each lattice point."""

    def __init__(self, lattice: Lattice, **kwargs):
        super().__init__(**kwargs)
        self.lattice = lattice
        self.order = 2.0
        self.alpha1 = 0.0
        self.max_pole_multiplicity = 2

    @_quiet
    def value_raw(self, z):
        return self.lattice.wp(np.asarray(z, dtype=complex))

    @_quiet
    def derivative_raw(self, z):
        return self.lattice.wp_prime(np.asarray(z, dtype=complex))

    def poles_in_disk(self, radius):
        return [PoleData(p, 2, 1.0 + 0j) for p in self.lattice.points_in_disk(radius)]

    def poles_in_rect(self, x0, x1, y0, y1):
        return [PoleData(p, 2, 1.0 + 0j) for p in self.lattice.points_in_rect(x0, x1, y0, y1)]

    def distance_to_poles(self, z):
        return self.lattice.distance_to_lattice(np.asarray(z, dtype=complex))

    def branch_values(self) -> list[complex]:
        """Values at the half-period critical points (roots of 4t^3 - g2 t - g3)."""
        roots = np.roots([4.0, 0.0, -self.lattice.g2, -self.lattice.g3])
        return [complex(r) for r in roots]

    def singular_values(self):
        return self.branch_values()

    def critical_points_in_disk(self, center, radius):
        pts = self.lattice.half_lattice_points_in_disk(abs(center) + radius)
        return [p for p in pts if abs(p - center) <= radius]

    def describe(self):
        return {
            "variant": "weierstrass",
            "omega1_re": self.lattice.omega1.real,
            "omega1_im": self.lattice.omega1.imag,
            "omega2_re": self.lattice.omega2.real,
            "omega2_im": self.lattice.omega2.imag,
        }


class EllipticComposePoly(Family):
    """f(z) = wp(P(z)); poles are the P-preimages of lattice points."""

    def __init__(self, lattice: Lattice, poly: Polynomial, **kwargs):
        super().__init__(**kwargs)
        if poly.degree < 1:
            raise ValueError("polynomial must be nonconstant")
        self.lattice = lattice
        self.poly = poly
        self.order = 2.0 * poly.degree
        self.alpha1 = float(poly.degree - 1)
        self.max_pole_multiplicity = 2

    def _reduced_argument(self, z):
        # P(z) can be enormous where anchors live; reducing it in plain
        # doubles would cap wp's argument accuracy at ulp(P), so the
        # rounding of P and the lattice subtraction are fused
        return self.lattice.reduce_compensated(self.poly.eval_compensated(z))

    @_quiet
    def value_raw(self, z):
        z = np.asarray(z, dtype=complex)
        return self.lattice.wp(self._reduced_argument(z))

    @_quiet
    def derivative_raw(self, z):
        z = np.asarray(z, dtype=complex)
        return self.lattice.wp_prime(self._reduced_argument(z)) * self.poly.derivative_at(z)

    def _image_disk(self, center: complex, boundary: np.ndarray) -> tuple[complex, float]:
        """Disk around P(center) covering P of the region bounded by boundary.

        |P - P(center)| is analytic, so its maximum over the closed region is
        attained on the boundary; anchoring the lattice search at P(center)
        keeps the target count proportional to the region size rather than to
        its distance from the origin.
        """
        pc = complex(self.poly(np.asarray([center]))[0])
        rad = float(np.max(np.abs(self.poly(boundary) - pc)))
        return pc, rad * 1.05 + 1.0

    def _poles_from_lattice_targets(self, targets, keep) -> list[PoleData]:
        out = []
        for om in targets:
            for root in self.poly.solve(om):
                root = complex(root)
                if not keep(root):
                    continue
                dp = complex(self.poly.derivative_at(root))
                if abs(dp) < 1e-9:
                    # P critical point on the pole fibre: higher-multiplicity
                    # pole, outside the catalogued generic case
                    continue
                out.append(PoleData(root, 2, 1.0 / dp**2))
        return sorted(out, key=lambda p: (round(abs(p.location), 12), np.angle(p.location)))

    def poles_in_disk(self, radius):
        theta = np.linspace(0, 2 * np.pi, 512, endpoint=False)
        pc, rmax = self._image_disk(0.0, radius * np.exp(1j * theta))
        targets = self.lattice.points_near(pc, rmax)
        return self._poles_from_lattice_targets(targets, lambda r: abs(r) <= radius)

    def poles_in_rect(self, x0, x1, y0, y1):
        tx = np.linspace(x0, x1, 128)
        ty = np.linspace(y0, y1, 128)
        edge = np.concatenate(
            [tx + 1j * y0, tx + 1j * y1, x0 + 1j * ty, x1 + 1j * ty]
        )
        zc = complex((x0 + x1) / 2.0, (y0 + y1) / 2.0)
        pc, rmax = self._image_disk(zc, edge)
        targets = self.lattice.points_near(pc, rmax)
        return self._poles_from_lattice_targets(
            targets, lambda r: x0 <= r.real <= x1 and y0 <= r.imag <= y1
        )

    def distance_to_poles(self, z):
        # first-order estimate: |P(z) - nearest lattice point| / |P'(z)|
        z = np.asarray(z, dtype=complex)
        num = self.lattice.distance_to_lattice(self.poly(z))
        den = np.maximum(np.abs(self.poly.derivative_at(z)), 1e-12)
        return num / den

    def singular_values(self):
        wp_branch = WeierstrassP(self.lattice).branch_values()
        dcoeffs = [k * c for k, c in enumerate(self.poly.coefficients)][1:]
        crit_of_p = np.roots(list(reversed(dcoeffs))) if len(dcoeffs) > 1 else []
        extra = [complex(self.lattice.wp(self.poly(np.asarray([c]))[0])) for c in crit_of_p]
        return wp_branch + [v for v in extra if np.isfinite(v)]

    def critical_points_in_disk(self, center, radius):
        out = []
        dcoeffs = [k * c for k, c in enumerate(self.poly.coefficients)][1:]
        if len(dcoeffs) > 1:
            out.extend(complex(r) for r in np.roots(list(reversed(dcoeffs))))
        theta = np.linspace(0, 2 * np.pi, 256, endpoint=False)
        pc, rmax = self._image_disk(center, center + radius * np.exp(1j * theta))
        for h in self.lattice.half_lattice_points_near(pc, rmax):
            out.extend(complex(r) for r in self.poly.solve(h))
        return sorted(
            (p for p in out if abs(p - center) <= radius),
            key=lambda p: abs(p - center),
        )

    def describe(self):
        return {
            "variant": "elliptic_compose_poly",
            "omega1_re": self.lattice.omega1.real,
            "omega1_im": self.lattice.omega1.imag,
            "omega2_re": self.lattice.omega2.real,
            "omega2_im": self.lattice.omega2.imag,
            "poly_re": [c.real for c in self.poly.coefficients],
            "poly_im": [c.imag for c in self.poly.coefficients],
        }


class ExpElliptic(Family):
    """f(z) = lam * (1 + wp(z)/d)^d, a polynomial-in-wp stand-in for lam*exp(wp)."""

    def __init__(self, lam: complex, d: int, lattice: Lattice, **kwargs):
        super().__init__(**kwargs)
        if d < 1:
            raise ValueError("d must be a positive integer")
        if lam == 0:
            raise ValueError("lam must be nonzero")
        self.lam = complex(lam)
        self.d = int(d)
        self.lattice = lattice
        self.order = 2.0
        self.alpha1 = 0.0
        self.max_pole_multiplicity = 2 * self.d

    @_quiet
    def value_raw(self, z):
        p = self.lattice.wp(np.asarray(z, dtype=complex))
        return self.lam * _ipow(1.0 + p / self.d, self.d)

    @_quiet
    def derivative_raw(self, z):
        p, pp = self.lattice.wp_and_prime(np.asarray(z, dtype=complex))
        return self.lam * _ipow(1.0 + p / self.d, self.d - 1) * pp

    def _leading_coefficient(self) -> complex:
        return self.lam / self.d**self.d

    def poles_in_disk(self, radius):
        return [
            PoleData(p, 2 * self.d, self._leading_coefficient())
            for p in self.lattice.points_in_disk(radius)
        ]

    def poles_in_rect(self, x0, x1, y0, y1):
        return [
            PoleData(p, 2 * self.d, self._leading_coefficient())
            for p in self.lattice.points_in_rect(x0, x1, y0, y1)
        ]

    def distance_to_poles(self, z):
        return self.lattice.distance_to_lattice(np.asarray(z, dtype=complex))

    def singular_values(self):
        vals = [0.0 + 0.0j]
        for e in WeierstrassP(self.lattice).branch_values():
            vals.append(self.lam * (1.0 + e / self.d) ** self.d)
        return vals

    def critical_points_in_disk(self, center, radius):
        # half-period points; fibres of wp = -d are handled by the sampling
        # safety check when building pipeline configurations
        pts = self.lattice.half_lattice_points_in_disk(abs(center) + radius)
        return [p for p in pts if abs(p - center) <= radius]

    def describe(self):
        return {
            "variant": "exp_elliptic",
            "lambda_re": self.lam.real,
            "lambda_im": self.lam.imag,
            "d": self.d,
            "omega1_re": self.lattice.omega1.real,
            "omega1_im": self.lattice.omega1.imag,
            "omega2_re": self.lattice.omega2.real,
            "omega2_im": self.lattice.omega2.imag,
        }


def near_pole_scaling_exponent(
    family: Family,
    pole: PoleData,
    samples: int = 40,
    eps_lo: float = 1e-6,
    eps_hi: float = 1e-2,
    direction: complex = complex(math.cos(0.7), math.sin(0.7)),
) -> float:
    """Slope of log|f'| against log|f| on a ray approaching the pole.

    For a pole of multiplicity q the slope is 1 + 1/q.  Sample radii are
    log-spaced in [eps_lo, eps_hi] along a fixed direction.
    """
    if samples < 10:
        raise ValueError("need at least 10 samples")
    eps = np.logspace(math.log10(eps_lo), math.log10(eps_hi), samples)
    z = pole.location + eps * direction
    other = family.distance_to_poles(z) < np.abs(z - pole.location) - 1e-15
    if np.any(other):
        # some sample point is closer to a different pole
        bad = z[other][0]
        raise AtPoleError(complex(bad), complex(pole.location))
    fv = np.abs(family.value_raw(z))
    dv = np.abs(family.derivative_raw(z))
    slope, _ = np.polyfit(np.log(fv), np.log(dv), 1)
    return float(slope)

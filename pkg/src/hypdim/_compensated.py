"""Compensated (double-double) arithmetic for large-argument reduction.

Evaluating a polynomial at |z| ~ 1e3 produces values ~ 1e6 whose unit of
last place is ~ 1e-10; reducing such a value modulo a lattice then carries
that rounding error into an argument of order 1, which caps the accuracy
of everything evaluated downstream.  Representing the value as an unevaluated
sum hi + lo of two doubles keeps the full product precision, and subtracting
the nearest lattice point while still in that representation makes the large
cancellation exact.

All helpers are elementwise over numpy float64 arrays.  Complex values are
carried as (re_hi, re_lo, im_hi, im_lo) quadruples.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1, Dekker splitting constant


def two_sum(a, b):
    """Exact sum: returns (s, e) with s = fl(a + b) and a + b = s + e."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def quick_two_sum(a, b):
    """Exact sum assuming |a| >= |b|: one branch-free renormalization."""
    s = a + b
    e = b - (s - a)
    return s, e


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    """Exact product: returns (p, e) with p = fl(a * b) and a * b = p + e."""
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    e = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, e


def dd_add(xhi, xlo, yhi, ylo):
    s, e = two_sum(xhi, yhi)
    e = e + xlo + ylo
    return quick_two_sum(s, e)


def dd_mul(xhi, xlo, yhi, ylo):
    p, e = two_prod(xhi, yhi)
    e = e + xhi * ylo + xlo * yhi
    return quick_two_sum(p, e)


def cdd_from_complex(z: np.ndarray):
    """Lift complex doubles into the quadruple representation."""
    z = np.asarray(z, dtype=complex)
    zero = np.zeros_like(z.real)
    return z.real.copy(), zero.copy(), z.imag.copy(), zero.copy()


def cdd_add(x, y):
    rh, rl = dd_add(x[0], x[1], y[0], y[1])
    ih, il = dd_add(x[2], x[3], y[2], y[3])
    return rh, rl, ih, il


def cdd_neg(x):
    return -x[0], -x[1], -x[2], -x[3]


def cdd_mul(x, y):
    # (a + bi)(c + di) with each partial product kept exact
    ac = dd_mul(x[0], x[1], y[0], y[1])
    bd = dd_mul(x[2], x[3], y[2], y[3])
    ad = dd_mul(x[0], x[1], y[2], y[3])
    bc = dd_mul(x[2], x[3], y[0], y[1])
    rh, rl = dd_add(ac[0], ac[1], -bd[0], -bd[1])
    ih, il = dd_add(ad[0], ad[1], bc[0], bc[1])
    return rh, rl, ih, il


def cdd_collapse(x) -> np.ndarray:
    """Round the quadruple back to complex doubles."""
    return (x[0] + x[1]) + 1j * (x[2] + x[3])


def horner_compensated(coefficients: Sequence[complex], z: np.ndarray):
    """Evaluate sum c_k z^k (coefficients lowest degree first) by compensated Horner.

    Returns the (re_hi, re_lo, im_hi, im_lo) quadruple; hi parts alone equal
    the plain double evaluation to rounding, lo parts carry the correction.
    """
    z = np.asarray(z, dtype=complex)
    zq = cdd_from_complex(z)
    coeffs = list(coefficients)
    acc = cdd_from_complex(np.full(z.shape, complex(coeffs[-1])))
    for c in reversed(coeffs[:-1]):
        acc = cdd_mul(acc, zq)
        cq = cdd_from_complex(np.full(z.shape, complex(c)))
        acc = cdd_add(acc, cq)
    return acc


def integer_combination(m: np.ndarray, n: np.ndarray, a: complex, b: complex):
    """m*a + n*b as a quadruple, for exact-integer m, n stored in doubles."""
    m = np.asarray(m, dtype=float)
    n = np.asarray(n, dtype=float)
    parts = []
    for coef, vec in ((m, complex(a)), (n, complex(b))):
        rh, rl = two_prod(coef, vec.real)
        ih, il = two_prod(coef, vec.imag)
        parts.append((rh, rl, ih, il))
    return cdd_add(parts[0], parts[1])

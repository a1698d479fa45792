"""Theoretical lower bound rho / (alpha1 + 1 + 1/q) and verdicts.

For a finite-order meromorphic function whose poles b_j of
multiplicity q_j satisfy the uniform comparability
|f(z)| ~ |b_j|^(-alpha1) |z - b_j|^(-q_j) near every pole, the
hyperbolic dimension exceeds rho / (alpha1 + 1 + 1/q) with
rho the order of growth, alpha1 the pole-modulus weight and q the
maximal multiplicity.  compare() checks a numerically estimated
critical exponent against the closed form and issues a verdict.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .errors import HypothesisViolated
from .ifs import ThetaEstimate


@dataclass(frozen=True)
class BoundInput:
    """Parameters (rho, alpha1, q) of the lower-bound formula."""

    rho: float
    alpha1: float
    q: int

    def __post_init__(self):
        if self.rho <= 0:
            raise HypothesisViolated("order of growth rho must be positive")
        if self.alpha1 < 0:
            raise HypothesisViolated("pole-modulus weight alpha1 must be nonnegative")
        if self.q < 1:
            raise HypothesisViolated("pole multiplicity q must be a positive integer")


def theorem1_bound(inp: BoundInput) -> float:
    """Closed-form lower bound rho / (alpha1 + 1 + 1/q)."""
    return inp.rho / (inp.alpha1 + 1.0 + 1.0 / inp.q)


class Verdict(enum.Enum):
    CONSISTENT = "Consistent"
    INCONSISTENT = "Inconsistent"
    NUMERICS_UNAVAILABLE = "NumericsUnavailable"


@dataclass(frozen=True)
class BoundReport:
    """One bound row: closed form, optional numerics, verdict.

    theoretical always lies in (0, 2]; theta_hat and bowen_root are
    None for theory-only rows, whose verdict is NumericsUnavailable.
    """

    family_label: str
    rho: float
    alpha1: float
    q: int
    theoretical: float
    theta_hat: float | None = None
    bowen_root: float | None = None
    verdict: Verdict = Verdict.NUMERICS_UNAVAILABLE
    note: str = ""

    def __post_init__(self):
        if not 0 < self.theoretical <= 2:
            raise HypothesisViolated("hyperbolic dimension bound must lie in (0, 2]")

    def csv_row(self) -> list[str]:
        def fmt(x):
            return "" if x is None else f"{x:.12g}"

        return [
            self.family_label,
            f"{self.rho:.12g}",
            f"{self.alpha1:.12g}",
            str(self.q),
            f"{self.theoretical:.12g}",
            fmt(self.theta_hat),
            fmt(self.bowen_root),
            self.verdict.value,
        ]


CSV_HEADER = [
    "family_label",
    "rho",
    "alpha1",
    "q",
    "theoretical",
    "theta_hat",
    "bowen_root",
    "verdict",
]


def _frac(num: int, den: int) -> str:
    f = Fraction(num, den)
    return f"{f.numerator}/{f.denominator}"


def _theory_row(label: str, inp: BoundInput, note: str) -> BoundReport:
    return BoundReport(
        family_label=label,
        rho=inp.rho,
        alpha1=inp.alpha1,
        q=inp.q,
        theoretical=theorem1_bound(inp),
        note=note,
    )


def corollary_table() -> list[BoundReport]:
    """Closed-form bounds for the standard families (theory-only rows).

    Covers lambda tan^m (bound m/(m+1), at least 1/2), elliptic
    functions of multiplicity q (2q/(q+1)), polynomials of degree d
    composed with an elliptic function (4d/(2d+1)), exponentials of
    elliptic functions (2d/(d+1/2), increasing to 2), Riccati-type
    solutions of linear ODEs with rational coefficients, and
    Schwarzian-triangle maps; the last two have no pipeline family
    here, so their rows stay theory-only.
    """
    rows: list[BoundReport] = []
    for m in range(1, 6):
        inp = BoundInput(rho=1.0, alpha1=0.0, q=m)
        note = f"bound {_frac(m, m + 1)}"
        if m == 1:
            note += "; at least 1/2"
        rows.append(_theory_row(f"tan_power_m{m}", inp, note))
    for q in (2, 3):
        inp = BoundInput(rho=2.0, alpha1=0.0, q=q)
        rows.append(_theory_row(f"elliptic_q{q}", inp, f"bound {_frac(2 * q, q + 1)}"))
    for d in range(1, 5):
        inp = BoundInput(rho=2.0 * d, alpha1=float(d - 1), q=2)
        rows.append(
            _theory_row(f"elliptic_poly_d{d}", inp, f"bound {_frac(4 * d, 2 * d + 1)}")
        )
    for d in range(1, 11):
        inp = BoundInput(rho=2.0, alpha1=0.0, q=2 * d)
        rows.append(
            _theory_row(
                f"exp_elliptic_d{d}",
                inp,
                f"bound {_frac(4 * d, 2 * d + 1)}; increases to 2 with d",
            )
        )
    for d0 in range(5):
        for d1 in range(5):
            rho = 1.0 + max(d0 / 2.0, float(d1))
            alpha1 = float(max(d0, d1))
            inp = BoundInput(rho=rho, alpha1=alpha1, q=1)
            rows.append(
                _theory_row(
                    f"riccati_d0{d0}_d1{d1}",
                    inp,
                    "second-order linear ODE with polynomial coefficients",
                )
            )
    for d in (0, 2, 4):
        inp = BoundInput(rho=float(d + 2) / 2.0, alpha1=float(d) / 2.0, q=1)
        rows.append(
            _theory_row(
                f"schwarzian_d{d}", inp, f"bound {_frac(d + 2, d + 4)}"
            )
        )
    return rows


def compare(
    family_label: str,
    inp: BoundInput,
    theta: ThetaEstimate | float | None,
    bowen_root: float | None = None,
    theta_tol: float = 0.05,
    bowen_slack: float = 0.05,
    note: str = "",
) -> BoundReport:
    """Verdict for a numerical run against the closed-form bound.

    Consistent requires |theta_hat - theoretical| <= theta_tol and,
    when a Bowen root is supplied, bowen_root <= theoretical +
    bowen_slack (the one-level root underestimates the exponent).
    Missing numerics yield NumericsUnavailable, never Inconsistent.
    """
    theoretical = theorem1_bound(inp)
    theta_hat = theta.theta_hat if isinstance(theta, ThetaEstimate) else theta
    if theta_hat is None:
        verdict = Verdict.NUMERICS_UNAVAILABLE
    else:
        ok = abs(theta_hat - theoretical) <= theta_tol
        if bowen_root is not None:
            ok = ok and bowen_root <= theoretical + bowen_slack
        verdict = Verdict.CONSISTENT if ok else Verdict.INCONSISTENT
    return BoundReport(
        family_label=family_label,
        rho=inp.rho,
        alpha1=inp.alpha1,
        q=inp.q,
        theoretical=theoretical,
        theta_hat=theta_hat,
        bowen_root=bowen_root,
        verdict=verdict,
        note=note,
    )

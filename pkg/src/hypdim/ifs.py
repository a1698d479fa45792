"""Conformal iterated function system over a pole of a meromorphic map.

Fix a pole b of order q and a disk D = D(b, r).  For every solution
z_n of f(z) = b lying far outside D there is an inverse branch of f
taking D to a small neighbourhood of z_n, and an inverse branch of f
near the pole taking that neighbourhood back inside D (q choices, one
per root sheet).  The compositions Phi_n map D strictly inside itself
with derivative 1 / (f'(w_n) f'(z_n)) at b, where w_n is the near-pole
preimage of z_n.  The critical exponent of the series sum |Phi_n'(b)|^t
is a lower bound for the hyperbolic dimension of f; it is estimated
here from the decay of |Phi_n'(b)| against |z_n| combined with the
growth order of the counting function of the z_n.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    ConfigError,
    InsufficientBranches,
    NewtonDiverged,
    NotContracting,
)
from .families import Family, PoleData
from .preimages import Preimage

log = logging.getLogger(__name__)


def koebe_distortion_factor(s: float) -> float:
    """Distortion bound (1+s)/(1-s)^3 for univalent maps at radius fraction s."""
    if not 0 <= s < 1:
        raise ValueError("radius fraction must lie in [0, 1)")
    return (1 + s) / (1 - s) ** 3


# branches extend univalently to the safety disk of twice the radius,
# so their distortion on D is bounded by the factor at s = 1/2
KOEBE_HALF = koebe_distortion_factor(0.5)


@dataclass(frozen=True)
class IfsConfig:
    """Geometry of the system: base disk, safety disk, escape radius.

    D = D(b, inner_radius) must keep its double D* = D(b, 2r) clear of
    other poles and critical points, and must itself avoid the singular
    values of f (so the first-level inverse branches extend univalently
    to D*).  outer_radius R lies past both max |f| on the circle
    |z - b| = r and every finite singular value, so the near-pole
    inverse is defined on {|w| > R}; only anchors with |z_n| > 3R are
    admitted.
    """

    pole: PoleData
    inner_radius: float
    safety_radius: float
    outer_radius: float
    max_branches: int = 1024

    def __post_init__(self):
        if self.inner_radius <= 0:
            raise ConfigError("inner radius must be positive")
        if abs(self.safety_radius - 2 * self.inner_radius) > 1e-12 * self.inner_radius:
            raise ConfigError("safety radius must be twice the inner radius")
        if self.outer_radius <= 0:
            raise ConfigError("outer radius must be positive")
        if self.max_branches < 1:
            raise ConfigError("max_branches must be positive")

    @property
    def min_modulus(self) -> float:
        """Admission cutoff 3R for branch anchors."""
        return 3.0 * self.outer_radius

    @classmethod
    def auto(
        cls,
        family: Family,
        pole: PoleData | None = None,
        max_branches: int = 1024,
        radius_fraction: float = 0.45,
        radius_cap: float = 0.5,
        escape_margin: float = 1.1,
        circle_samples: int = 512,
    ) -> "IfsConfig":
        """Derive the geometry from the family's catalogue.

        The inner radius is radius_fraction times the distance from b
        to the nearest other pole or critical point (keeping D* clear
        of both) and to the nearest singular value (keeping the branch
        domain schlicht), capped at radius_cap.  The default pole is
        the admissible one nearest the origin.
        """
        sing = np.array(family.singular_values(), dtype=complex)

        def build(p: PoleData) -> "IfsConfig":
            b = p.location
            search = abs(b) + 8.0
            others = [
                q.location
                for q in family.poles_in_disk(search)
                if abs(q.location - b) > 1e-9
            ]
            pole_gap = min(abs(o - b) for o in others) if others else 8.0
            crit = family.critical_points_in_disk(b, search)
            crit_gap = min((abs(c - b) for c in crit), default=np.inf)
            sing_gap = float(np.min(np.abs(sing - b))) if sing.size else np.inf
            r = min(radius_fraction * min(pole_gap, crit_gap, sing_gap), radius_cap)
            if not np.isfinite(r) or r <= 1e-9:
                raise ConfigError(f"no admissible base disk around pole {b}")
            # D* audit by sampling: f' must not vanish on the double disk
            rad = np.sqrt(np.linspace(0.0025, 1.0, 24)) * 2 * r
            ang = np.exp(2j * np.pi * np.arange(48) / 48)
            grid = (b + rad[:, None] * ang[None, :]).ravel()
            dmag = np.abs(family.derivative_raw(grid))
            if np.any(dmag < 1e-12):
                raise ConfigError(f"critical point detected inside D* around {b}")
            circle = b + r * np.exp(2j * np.pi * np.arange(circle_samples) / circle_samples)
            boundary_max = float(np.max(np.abs(family.value_raw(circle))))
            sing_mod = float(np.max(np.abs(sing))) if sing.size else 0.0
            R = escape_margin * max(boundary_max, sing_mod)
            return cls(
                pole=p,
                inner_radius=float(r),
                safety_radius=float(2 * r),
                outer_radius=float(R),
                max_branches=max_branches,
            )

        if pole is not None:
            return build(pole)
        candidates: list[PoleData] = []
        for search in (2.0, 5.0, 12.0, 30.0):
            candidates = family.poles_in_disk(search)
            if candidates:
                break
        if not candidates:
            raise ConfigError("no pole of the family near the origin")
        candidates.sort(
            key=lambda p: (round(abs(p.location), 9), np.angle(p.location) % (2 * np.pi))
        )
        last_error: ConfigError | None = None
        for cand in candidates:
            try:
                return build(cand)
            except ConfigError as exc:
                last_error = exc
        raise ConfigError(f"no admissible pole found: {last_error}")


@dataclass(frozen=True)
class Branch:
    """One contraction Phi_n, anchored at z_n with near-pole point w_n."""

    index: int  # 1-based, ordered by (|z_n|, arg z_n, sheet)
    z_n: complex
    w_n: complex
    phi_deriv_mag: float
    sheet: int
    f_prime_z: complex
    f_prime_w: complex
    residuals: tuple[float, float]  # (|f(z_n) - b|, |f(w_n) - z_n| / |z_n|)


def build_branches(
    family: Family,
    cfg: IfsConfig,
    bpoints: Sequence[Preimage] | np.ndarray,
    newton_tol: float = 1e-13,
) -> list[Branch]:
    """Construct the branch set from anchors z_n with f(z_n) = b.

    Anchors may be Preimage records or a plain complex array; those
    with |z_n| <= 3R are filtered out.  Each anchor yields up to q
    branches, one per root sheet of the near-pole inverse; Newton
    refinement starts from the leading-order seed
    w = b + (g(b) / z_n)^(1/q) e^(2 pi i k / q).  A sheet whose refined
    point escapes the base disk is dropped (and logged), not fatal.
    """
    b = cfg.pole.location
    q = cfg.pole.multiplicity
    g_b = cfg.pole.leading_coefficient

    if isinstance(bpoints, np.ndarray):
        z_all = bpoints.astype(complex)
    else:
        z_all = np.array([p.point for p in bpoints], dtype=complex)
    z_all = z_all[np.abs(z_all) > cfg.min_modulus]
    if z_all.size == 0:
        return []
    order = np.lexsort((np.angle(z_all), np.abs(z_all)))
    z_all = z_all[order]
    if z_all.size * q > cfg.max_branches:
        # decimate uniformly through the radius-sorted anchors: a prefix
        # would collapse onto the innermost ring and starve the derivative
        # regression of radial span
        keep = max(1, cfg.max_branches // q)
        sel = np.unique(np.round(np.linspace(0, z_all.size - 1, keep)).astype(int))
        z_all = z_all[sel]

    k = np.arange(q)
    root_scale = np.exp(np.log((g_b / z_all).astype(complex)) / q)
    seeds = b + root_scale[:, None] * np.exp(2j * np.pi * k[None, :] / q)
    targets = np.broadcast_to(z_all[:, None], seeds.shape).copy()

    w = seeds.ravel().copy()
    tgt = targets.ravel()
    active = np.ones(w.size, dtype=bool)
    for _ in range(60):
        if not active.any():
            break
        fw = family.value_raw(w[active])
        dfw = family.derivative_raw(w[active])
        step = (fw - tgt[active]) / dfw
        w[active] -= step
        idx = np.nonzero(active)[0]
        done = np.abs(step) <= newton_tol * np.abs(w[idx] - b)
        active[idx[done]] = False
    if active.any():
        raise NewtonDiverged(f"{active.sum()} near-pole sheets failed to converge")

    resid_w = np.abs(family.value_raw(w) - tgt) / np.abs(tgt)
    if np.any(resid_w > 1e-9):
        raise NewtonDiverged("near-pole Newton residuals too large")
    wm = w.reshape(-1, q)
    if q > 1:
        for j in range(q):
            for l in range(j + 1, q):
                if np.any(np.abs(wm[:, j] - wm[:, l]) < 1e-9 * np.abs(wm[:, j] - b)):
                    raise NewtonDiverged("two root sheets collapsed")

    fz = family.value_raw(z_all)
    fpz = family.derivative_raw(z_all)
    fpw = family.derivative_raw(w).reshape(-1, q)
    phi = 1.0 / (np.abs(fpw) * np.abs(fpz)[:, None])
    resid_z = np.abs(fz - b)
    resid_w = resid_w.reshape(-1, q)
    inside = np.abs(wm - b) < cfg.inner_radius

    branches: list[Branch] = []
    dropped = 0
    idx = 1
    for i in range(z_all.size):
        for j in range(q):
            if not inside[i, j]:
                dropped += 1
                continue
            branches.append(
                Branch(
                    index=idx,
                    z_n=complex(z_all[i]),
                    w_n=complex(wm[i, j]),
                    phi_deriv_mag=float(phi[i, j]),
                    sheet=j,
                    f_prime_z=complex(fpz[i]),
                    f_prime_w=complex(fpw[i, j]),
                    residuals=(float(resid_z[i]), float(resid_w[i, j])),
                )
            )
            idx += 1
    if dropped:
        log.warning("%d near-pole sheets escaped the base disk and were dropped", dropped)
    return branches[: cfg.max_branches]


def poincare_sum(branches: list[Branch], t: float, n0: int = 1) -> float:
    """Partial Poincare series sum |Phi_n'(b)|^t over branches with index >= n0."""
    if t <= 0:
        raise ValueError("exponent must be positive")
    phi = np.array([br.phi_deriv_mag for br in branches if br.index >= n0])
    return float(np.sum(phi**t))


@dataclass(frozen=True)
class ThetaEstimate:
    """Critical exponent estimate theta = rho / |slope_beta|.

    slope_beta is the fitted log-log slope of |Phi_n'(b)| against
    |z_n| (expected negative) and rho_hat the growth order of the
    anchor counting function, supplied by the caller.
    """

    slope_beta: float
    rho_hat: float
    theta_hat: float
    r_squared: float
    n_used: int

    @property
    def degenerate_fit(self) -> bool:
        return self.r_squared < 0.9


def estimate_theta(branches: list[Branch], rho_hat: float, min_branches: int = 30) -> ThetaEstimate:
    """Fit log |Phi_n'(b)| against log |z_n| and divide rho by the decay.

    The series sum |Phi_n'(b)|^t behaves like sum |z_n|^(slope_beta t)
    with counting order rho, so it converges exactly when
    t > rho / |slope_beta|.
    """
    if len(branches) < min_branches:
        raise InsufficientBranches(
            f"need at least {min_branches} branches, got {len(branches)}"
        )
    if rho_hat <= 0:
        raise ValueError("rho_hat must be positive")
    lz = np.log(np.array([abs(br.z_n) for br in branches]))
    lp = np.log(np.array([br.phi_deriv_mag for br in branches]))
    slope, intercept = np.polyfit(lz, lp, 1)
    fitted = slope * lz + intercept
    ss_res = float(np.sum((lp - fitted) ** 2))
    ss_tot = float(np.sum((lp - lp.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    if slope >= 0:
        raise NotContracting("branch derivatives do not decay with |z_n|")
    return ThetaEstimate(
        slope_beta=float(slope),
        rho_hat=float(rho_hat),
        theta_hat=float(rho_hat / abs(slope)),
        r_squared=r2,
        n_used=len(branches),
    )


def bowen_one_level(
    branches: list[Branch],
    subset_size: int | None = None,
    distortion_factor: float = 1.0,
    tol: float = 1e-9,
) -> float:
    """Bisection root t* of sum over the first subset_size branches of
    (|Phi_n'(b)| / distortion_factor)^t = 1 on [1e-6, 10].

    The sum is strictly decreasing in t, so the root is unique; it is
    nondecreasing in subset_size and nonincreasing in the distortion
    factor.  Returns 0.0 when the sum stays below one for every
    positive t (a single weak contraction has no root).
    """
    if distortion_factor < 1.0:
        raise ValueError("distortion factor must be at least 1")
    if not branches:
        raise InsufficientBranches("empty branch set")
    if subset_size is None:
        subset_size = len(branches)
    if not 1 <= subset_size <= len(branches):
        raise ValueError("subset_size out of range")
    phi = np.array([br.phi_deriv_mag for br in branches[:subset_size]])
    if np.max(phi) >= 1.0:
        raise NotContracting("a branch derivative magnitude is not below 1")
    ratios = phi / distortion_factor

    def total(t: float) -> float:
        return float(np.sum(ratios**t))

    lo, hi = 1e-6, 10.0
    if total(lo) <= 1.0:
        return 0.0
    if total(hi) > 1.0:
        raise NotContracting("Poincare sum exceeds one at the top of the bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if total(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SeparationReport:
    """Koebe-disk separation audit of the branch images.

    Each image Phi_n(D) contains a quarter disk D(w_n, rho_n / 4) and
    is contained in D(w_n, 4 rho_n), rho_n = |Phi_n'(b)| r.  n0 is the
    smallest index from which every outer disk lies inside D and the
    inner disks are pairwise disjoint; violating pairs are listed (a
    containment failure of branch n is recorded as the pair (n, n)).
    """

    n0: int
    checked_up_to: int
    violations: list

    @property
    def ok_beyond_n0(self) -> bool:
        return all(max(i, j) < self.n0 for i, j in self.violations)


def separation_check(branches: list[Branch], cfg: IfsConfig) -> SeparationReport:
    """Audit quarter-disk disjointness and outer-disk containment."""
    if not branches:
        raise InsufficientBranches("empty branch set")
    b = cfg.pole.location
    r = cfg.inner_radius
    idx = np.array([br.index for br in branches])
    w = np.array([br.w_n for br in branches])
    rho = np.array([br.phi_deriv_mag for br in branches]) * r

    violations: list[tuple[int, int]] = []
    contained = np.abs(w - b) + 4.0 * rho < r
    for i in np.nonzero(~contained)[0]:
        violations.append((int(idx[i]), int(idx[i])))

    gap = np.abs(w[:, None] - w[None, :]) - 0.25 * (rho[:, None] + rho[None, :])
    iu, ju = np.triu_indices(len(branches), k=1)
    bad = gap[iu, ju] <= 0
    for i, j in zip(iu[bad], ju[bad]):
        violations.append((int(idx[i]), int(idx[j])))

    n0 = 1
    if violations:
        n0 = max(max(pair) for pair in violations) + 1
    return SeparationReport(
        n0=int(n0),
        checked_up_to=int(idx.max()),
        violations=sorted(violations),
    )

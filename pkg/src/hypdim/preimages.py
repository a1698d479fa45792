"""Certified enumeration of the solutions of f(z) = a in bounded regions.

The count of solutions inside a rectangle is certified through the
argument principle: the boundary integral of f'/(f-a), evaluated by
adaptive Gauss-Kronrod panels, equals (zeros - poles) * 2*pi*i, and the
catalogued pole multiplicities inside the rectangle are added back.
Because the true value is an integer, loose quadrature still certifies
the count as long as the estimate lands within 0.25 of an integer.

Enumeration subdivides a region into quadrants, pruning empty cells,
until each cell holds a single solution and is small enough for Newton
refinement.  The sum of leaf counts is checked against the enclosing
count, so a run either returns the complete solution set or fails.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryCollision,
    CountMismatch,
    InsufficientData,
    QuadratureNotConverged,
)
from .families import Family

# Gauss-Kronrod 15/7 panel (QUADPACK constants), ordered by ascending node.
_K_POS = np.array(
    [
        0.000000000000000,
        0.207784955007898,
        0.405845151377397,
        0.586087235467691,
        0.741531185599394,
        0.864864423359769,
        0.949107912342759,
        0.991455371120813,
    ]
)
_K_WPOS = np.array(
    [
        0.209482141084728,
        0.204432940075298,
        0.190350578064785,
        0.169004726639267,
        0.140653259715525,
        0.104790010322250,
        0.063092092629979,
        0.022935322010529,
    ]
)
_G_WPOS = np.array([0.417959183673469, 0.381830050505119, 0.279705391489277, 0.129484966168870])

GK_NODES = np.concatenate([-_K_POS[:0:-1], _K_POS])
GK_WEIGHTS = np.concatenate([_K_WPOS[:0:-1], _K_WPOS])
# the embedded Gauss-7 rule lives on every second Kronrod node
G7_WEIGHTS = np.zeros(15)
G7_WEIGHTS[1::2] = np.array(
    [_G_WPOS[3], _G_WPOS[2], _G_WPOS[1], _G_WPOS[0], _G_WPOS[1], _G_WPOS[2], _G_WPOS[3]]
)


@dataclass(frozen=True)
class Rect:
    """Closed axis-aligned rectangle [x0, x1] x [y0, y1]."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("rectangle must have positive width and height")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.width, self.height))

    @property
    def center(self) -> complex:
        return complex((self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2)

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (
            self.x0 - pad <= z.real <= self.x1 + pad
            and self.y0 - pad <= z.imag <= self.y1 + pad
        )

    def split(self, fx: float = 0.5, fy: float = 0.5) -> list["Rect"]:
        xm = self.x0 + fx * self.width
        ym = self.y0 + fy * self.height
        return [
            Rect(self.x0, xm, self.y0, ym),
            Rect(xm, self.x1, self.y0, ym),
            Rect(self.x0, xm, ym, self.y1),
            Rect(xm, self.x1, ym, self.y1),
        ]


@dataclass(frozen=True)
class Preimage:
    """One refined solution of f(z) = a."""

    point: complex
    target: complex
    residual: float
    modulus: float


@dataclass(frozen=True)
class CountingSample:
    """Number of enumerated solutions within region scale radius."""

    radius: float
    count: int


@dataclass
class SolveReport:
    """Enumeration result with its completeness certificate."""

    preimages: list
    region: Rect
    region_count: int
    leaf_count_sum: int
    refined_count: int
    cells_examined: int


def _winding_batch(
    family: Family,
    a: complex,
    rects: list[Rect],
    edge_tol: float = 0.05,
    boundary_margin: float = 1e-6,
    eval_budget: int = 4_000_000,
    max_rounds: int = 50,
):
    """Boundary integrals of f'/(f-a) / (2*pi*i) for a batch of rectangles.

    Returns (winding complex array, collision flags, converged flags).
    Collisions mark rectangles whose boundary passes within
    boundary_margin of a root or pole.
    """
    n = len(rects)
    acc = np.zeros(n, dtype=complex)
    collided = np.zeros(n, dtype=bool)
    converged = np.ones(n, dtype=bool)

    # one segment per edge to start; edges traversed counterclockwise
    rid = np.repeat(np.arange(n), 4)
    corners = np.array(
        [[complex(r.x0, r.y0), complex(r.x1, r.y0), complex(r.x1, r.y1), complex(r.x0, r.y1)] for r in rects]
    )
    starts = corners.reshape(-1)
    ends = np.roll(corners, -1, axis=1).reshape(-1)
    p = starts
    d = ends - starts
    t0 = np.zeros(4 * n)
    t1 = np.ones(4 * n)

    # panels sample the 15 Kronrod nodes plus both endpoints; endpoints
    # make the phase chain contiguous across neighbouring panels
    tnorm = np.concatenate([[0.0], (GK_NODES + 1.0) * 0.5, [1.0]])

    evals = 0
    for _ in range(max_rounds):
        if rid.size == 0:
            break
        keep = ~collided[rid]
        rid, p, d, t0, t1 = rid[keep], p[keep], d[keep], t0[keep], t1[keep]
        if rid.size == 0:
            break
        if evals > eval_budget:
            converged[np.unique(rid)] = False
            break

        tm = t0[:, None] + tnorm[None, :] * (t1 - t0)[:, None]
        z = p[:, None] + d[:, None] * tm
        flat = z.ravel()
        evals += flat.size
        fv = family.value_raw(flat)
        dv = family.derivative_raw(flat)
        den = fv - a

        dist_pole = family.distance_to_poles(flat)
        with np.errstate(divide="ignore", invalid="ignore"):
            dist_root = np.abs(den) / np.maximum(np.abs(dv), 1e-300)
        bad = (
            (dist_pole < boundary_margin)
            | (dist_root < boundary_margin)
            | ~np.isfinite(den)
            | ~np.isfinite(dv)
        )
        if bad.any():
            hit = np.unique(rid[np.nonzero(bad.reshape(z.shape).any(axis=1))[0]])
            collided[hit] = True
            keep = ~collided[rid]
            rid, p, d, t0, t1 = rid[keep], p[keep], d[keep], t0[keep], t1[keep]
            if rid.size == 0:
                break
            tm = t0[:, None] + tnorm[None, :] * (t1 - t0)[:, None]
            z = p[:, None] + d[:, None] * tm
            flat = z.ravel()
            fv = family.value_raw(flat)
            dv = family.derivative_raw(flat)
            den = fv - a
            dist_pole = family.distance_to_poles(flat)

        den = den.reshape(z.shape)
        hfull = (dv / den.ravel()).reshape(z.shape)
        h = hfull[:, 1:-1]
        half = 0.5 * (t1 - t0)
        ik = (h @ GK_WEIGHTS) * half * d
        ig = (h @ G7_WEIGHTS) * half * d
        err = np.abs(ik - ig)

        # Three panel certificates, each protecting against a different
        # blind spot of the others.  (1) Kronrod error small.  (2) The
        # phase of f - a moves at most pi/4 between neighbouring sample
        # points: a root or pole between nodes forces a large phase
        # step.  (3) Node gaps are shorter than 3/4 of the distance to
        # the nearest pole, unless the integrand is numerically dead
        # across the gap: solutions of f = a cluster near the poles, so
        # this pins the sampling to the scale at which features can
        # live and defeats phase aliasing (a swing through more than
        # 2 pi inside one gap wraps back to a small measured step).
        gk_ok = err <= edge_tol * np.maximum(t1 - t0, 1e-12)
        steps = np.abs(np.angle(den[:, 1:] / den[:, :-1]))
        phase_ok = steps.max(axis=1) <= 0.25 * np.pi

        dp = dist_pole.reshape(z.shape)
        habs = np.abs(hfull)
        gap_arc = np.abs(z[:, 1:] - z[:, :-1])
        allowed = 0.75 * np.minimum(dp[:, 1:], dp[:, :-1])
        dead = np.maximum(habs[:, 1:], habs[:, :-1]) * gap_arc <= 1e-12
        scale_ok = ((gap_arc <= np.maximum(allowed, boundary_margin)) | dead).all(axis=1)

        accept = gk_ok & phase_ok & scale_ok
        tiny = (t1 - t0) * np.abs(d) < 1e-11
        if np.any(tiny & ~accept):
            collided[np.unique(rid[tiny & ~accept])] = True
            accept = accept | tiny
        np.add.at(acc, rid[accept], ik[accept])

        sub = ~accept
        rid_s, p_s, d_s, t0_s, t1_s = rid[sub], p[sub], d[sub], t0[sub], t1[sub]
        tmid = 0.5 * (t0_s + t1_s)
        rid = np.concatenate([rid_s, rid_s])
        p = np.concatenate([p_s, p_s])
        d = np.concatenate([d_s, d_s])
        t0 = np.concatenate([t0_s, tmid])
        t1 = np.concatenate([tmid, t1_s])
    else:
        converged[np.unique(rid)] = False

    winding = acc / (2j * np.pi)
    return winding, collided, converged


def count_zeros_in_rectangle(
    family: Family,
    a: complex,
    rect: Rect,
    edge_tol: float = 0.05,
    boundary_margin: float = 1e-6,
) -> int:
    """Certified number of solutions of f(z) = a strictly inside rect.

    The boundary winding number counts zeros minus poles; catalogued
    pole multiplicities are added back.  Raises BoundaryCollision when a
    root or pole sits within boundary_margin of the contour (the caller
    may perturb the rectangle and retry) and QuadratureNotConverged when
    the integral cannot be pinned to an integer.
    """
    winding, collided, converged = _winding_batch(
        family, complex(a), [rect], edge_tol=edge_tol, boundary_margin=boundary_margin
    )
    if collided[0]:
        raise BoundaryCollision(f"root or pole within {boundary_margin} of {rect}")
    if not converged[0]:
        raise QuadratureNotConverged(f"contour quadrature stalled on {rect}")
    w = complex(winding[0])
    nearest = round(w.real)
    if abs(w - nearest) >= 0.25:
        raise QuadratureNotConverged(f"winding {w} not within 0.25 of an integer")
    pole_mult = sum(p.multiplicity for p in family.poles_in_rect(rect.x0, rect.x1, rect.y0, rect.y1))
    count = nearest + pole_mult
    if count < 0:
        raise CountMismatch(f"negative zero count {count} on {rect}")
    return count


def _certified_count(
    family: Family,
    a: complex,
    rect: Rect,
    rng: np.random.Generator,
    retries: int = 5,
    **kwargs,
) -> tuple[int, Rect]:
    """count_zeros_in_rectangle with deterministic perturbation retries."""
    current = rect
    for attempt in range(retries + 1):
        try:
            return count_zeros_in_rectangle(family, a, current, **kwargs), current
        except BoundaryCollision:
            if attempt == retries:
                raise
            scale = 1e-3 * max(current.width, current.height) * (attempt + 1)
            dx, dy = rng.uniform(-1, 1, 2) * scale
            grow = rng.uniform(0.5, 1.5) * scale
            current = Rect(
                current.x0 - grow + dx,
                current.x1 + grow + dx,
                current.y0 - grow + dy,
                current.y1 + grow + dy,
            )
    raise BoundaryCollision("unreachable")  # pragma: no cover


def _newton_refine(
    family: Family,
    a: complex,
    seeds: np.ndarray,
    tol: float = 1e-12,
    max_iter: int = 60,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized Newton iteration; returns (roots, converged mask)."""
    z = seeds.astype(complex).copy()
    active = np.ones(z.shape, dtype=bool)
    start = seeds.copy()
    for _ in range(max_iter):
        if not active.any():
            break
        fv = family.value_raw(z[active])
        dv = family.derivative_raw(z[active])
        with np.errstate(divide="ignore", invalid="ignore"):
            step = (fv - a) / dv
        step = np.where(np.isfinite(step), step, 0.1)
        znew = z[active] - step
        idx = np.nonzero(active)[0]
        z[idx] = znew
        done = np.abs(step) <= tol * np.maximum(1.0, np.abs(znew))
        active[idx[done]] = False
    resid = np.abs(family.value_raw(z) - a)
    escaped = np.abs(z - start) > 1e6
    # backward-error floor: a root representable only to ulp(|z|) cannot
    # push the residual below |f'| * ulp, however converged the iteration
    floor = 8.0 * np.abs(family.derivative_raw(z)) * np.finfo(float).eps * np.maximum(1.0, np.abs(z))
    ok = (resid <= np.maximum(1e-9 * max(1.0, abs(a)), floor)) & ~escaped & np.isfinite(z)
    return z, ok


def solve_in_rect(
    family: Family,
    a: complex,
    rect: Rect,
    cell_floor: float = 0.1,
    newton_tol: float = 1e-12,
    seed: int = 42,
    max_levels: int = 64,
    edge_tol: float = 0.05,
    boundary_margin: float = 1e-6,
) -> SolveReport:
    """Enumerate all solutions of f(z) = a inside rect, with certificate.

    Quadrant subdivision driven by certified counts prunes empty cells;
    cells shrink past cell_floor (deeper when two roots share a cell)
    and are finished by Newton from the cell center.  The refined roots
    are complete: their number equals the certified count on rect.
    """
    a = complex(a)
    rng = np.random.default_rng(seed)
    total, rect = _certified_count(
        family, a, rect, rng, edge_tol=edge_tol, boundary_margin=boundary_margin
    )
    report = SolveReport(
        preimages=[], region=rect, region_count=total, leaf_count_sum=0, refined_count=0, cells_examined=1
    )
    if total == 0:
        return report

    pending: list[tuple[Rect, int]] = [(rect, total)]
    leaves: list[tuple[Rect, int]] = []
    roots: list[complex] = []

    for _level in range(max_levels):
        if not pending:
            break
        split_parents = []
        for cell, cnt in pending:
            if cnt == 0:
                continue
            if cnt == 1 and cell.diameter <= cell_floor:
                leaves.append((cell, cnt))
            else:
                split_parents.append((cell, cnt))
        pending = []
        if not split_parents:
            break

        # subdivide every parent, certify children, retry jittered splits
        # on collision or count mismatch
        remaining = split_parents
        for attempt in range(6):
            if not remaining:
                break
            children: list[Rect] = []
            for cell, _ in remaining:
                if attempt == 0:
                    fx = fy = 0.5
                else:
                    fx, fy = rng.uniform(0.38, 0.62, 2)
                children.extend(cell.split(fx, fy))
            winding, collided, conv = _winding_batch(
                family, a, children, edge_tol=edge_tol, boundary_margin=boundary_margin
            )
            report.cells_examined += len(children)
            next_remaining = []
            for i, (cell, cnt) in enumerate(remaining):
                quad = children[4 * i : 4 * i + 4]
                wq = winding[4 * i : 4 * i + 4]
                if collided[4 * i : 4 * i + 4].any() or not conv[4 * i : 4 * i + 4].all():
                    next_remaining.append((cell, cnt))
                    continue
                counts = []
                bad = False
                for q, w in zip(quad, wq):
                    nearest = round(w.real)
                    if abs(w - nearest) >= 0.25:
                        bad = True
                        break
                    mult = sum(
                        p.multiplicity for p in family.poles_in_rect(q.x0, q.x1, q.y0, q.y1)
                    )
                    counts.append(nearest + mult)
                if bad or sum(counts) != cnt or any(c < 0 for c in counts):
                    next_remaining.append((cell, cnt))
                    continue
                for q, c in zip(quad, counts):
                    if c > 0:
                        pending.append((q, c))
            remaining = next_remaining
        if remaining:
            raise CountMismatch(
                f"children counts never reconciled for {len(remaining)} cells"
            )
    if pending:
        raise CountMismatch("subdivision depth cap reached before isolating roots")

    report.leaf_count_sum = sum(c for _, c in leaves)

    # Newton refinement; a root escaping its own leaf falls back to a
    # deeper subdivision of just that leaf
    if leaves:
        centers = np.array([cell.center for cell, _ in leaves])
        refined, ok = _newton_refine(family, a, centers, tol=newton_tol)
        for (cell, cnt), root, good in zip(leaves, refined, ok):
            root = complex(root)
            if good and cell.contains(root, pad=1e-12):
                roots.append(root)
                continue
            sub = solve_in_rect(
                family,
                a,
                cell,
                cell_floor=cell.diameter / 4,
                newton_tol=newton_tol,
                seed=seed + 1,
                edge_tol=edge_tol,
                boundary_margin=boundary_margin,
            )
            if sub.region_count != cnt:
                raise CountMismatch("leaf recount disagreed during Newton fallback")
            roots.extend(p.point for p in sub.preimages)
            report.cells_examined += sub.cells_examined

    roots_arr = np.array(roots, dtype=complex)
    if roots_arr.size > 1:
        order = np.lexsort((np.angle(roots_arr), np.abs(roots_arr)))
        roots_arr = roots_arr[order]
        by_re = np.argsort(roots_arr.real, kind="stable")
        sr = roots_arr[by_re]
        for i in range(sr.size - 1):
            j = i + 1
            while j < sr.size and sr[j].real - sr[i].real < 1e-8:
                if abs(sr[j] - sr[i]) < 1e-8:
                    raise CountMismatch("two refined roots coincide; certificate broken")
                j += 1
    resid = np.abs(family.value_raw(roots_arr) - a) if roots_arr.size else np.array([])
    report.preimages = [
        Preimage(complex(z), a, float(r), float(abs(z))) for z, r in zip(roots_arr, resid)
    ]
    report.refined_count = len(report.preimages)
    if report.refined_count != report.region_count:
        raise CountMismatch(
            f"refined {report.refined_count} roots but region count is {report.region_count}"
        )
    return report


def solve_in_disk(family: Family, a: complex, radius: float, **kwargs) -> SolveReport:
    """Enumerate solutions over the enclosing square, then keep |z| <= radius."""
    pad = 0.02 * radius
    square = Rect(-radius - pad, radius + pad, -radius - pad, radius + pad)
    report = solve_in_rect(family, a, square, **kwargs)
    report.preimages = [p for p in report.preimages if p.modulus <= radius]
    return report


def find_preimages(family: Family, a: complex, radius: float, **kwargs) -> list[Preimage]:
    """All solutions of f(z) = a with |z| <= radius, sorted by modulus then argument."""
    return solve_in_disk(family, a, radius, **kwargs).preimages


def counting_function(preimages: list[Preimage], radii: list[float]) -> list[CountingSample]:
    """N(r) = number of enumerated points with modulus <= r, per radius."""
    if list(radii) != sorted(radii):
        raise ValueError("radii must be sorted ascending")
    moduli = np.sort(np.array([p.modulus for p in preimages]))
    return [
        CountingSample(float(r), int(np.searchsorted(moduli, r, side="right"))) for r in radii
    ]


def certified_counting_samples(
    family: Family,
    a: complex,
    radii: list[float],
    seed: int = 42,
    **kwargs,
) -> list[CountingSample]:
    """Counting samples from certified counts on nested squares [-r, r]^2.

    Counts over squares instead of disks: the growth exponent of N(r)
    is the same, and no root refinement is needed.
    """
    rng = np.random.default_rng(seed)
    out = []
    for r in radii:
        count, _ = _certified_count(family, a, Rect(-r, r, -r, r), rng, **kwargs)
        out.append(CountingSample(float(r), count))
    return out


def estimate_order_of_growth(samples: list[CountingSample]) -> float:
    """Least-squares slope of log N(r) against log r on the upper half range.

    The upper half of the sample list is the asymptotic regime; samples
    with zero count are skipped.
    """
    if sum(1 for s in samples if s.count >= 1) < 5:
        raise InsufficientData("need at least 5 samples with nonzero count")
    upper = samples[len(samples) // 2 :]
    pts = [(s.radius, s.count) for s in upper if s.count >= 1]
    if len(pts) < 2:
        raise InsufficientData("upper radius range has fewer than 2 nonzero counts")
    r = np.log([p[0] for p in pts])
    n = np.log([p[1] for p in pts])
    if np.allclose(n, n[0]):
        return 0.0
    slope, _ = np.polyfit(r, n, 1)
    return float(slope)

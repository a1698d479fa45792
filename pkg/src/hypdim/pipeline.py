"""End-to-end runs: family -> anchors -> branches -> theta -> verdict.

Wires the solver, IFS, and bound modules behind a RunConfig: builds
the family, derives the disk geometry, enumerates b-points (full-disk
solve for the tangent family, annular patches for lattice families,
whose b-points are far too dense for an exhaustive disk sweep at the
admission cutoff), estimates the growth order from certified counts
on nested squares, and compares the resulting critical exponent with
the closed-form bound.  Also provides the CSV/JSON serialization used
by both the service layer and the CLI.
"""

from __future__ import annotations

import io
import json
import platform
from dataclasses import dataclass

import numpy as np
import pydantic

from . import __version__
from .bounds import CSV_HEADER, BoundInput, BoundReport, compare
from .config import FamilyBlock, RenderBlock, RunConfig, config_hash, parse_complex
from .errors import ConfigError, InsufficientBranches
from .families import (
    EllipticComposePoly,
    ExpElliptic,
    Family,
    Polynomial,
    TanPower,
    WeierstrassP,
)
from .ifs import (
    KOEBE_HALF,
    Branch,
    IfsConfig,
    SeparationReport,
    ThetaEstimate,
    bowen_one_level,
    build_branches,
    estimate_theta,
    separation_check,
)
from .lattice import Lattice
from .preimages import (
    CountingSample,
    Preimage,
    Rect,
    certified_counting_samples,
    estimate_order_of_growth,
    solve_in_disk,
    solve_in_rect,
)
from .render import RenderGrid, RenderResult, boundary_mask, box_counting, render


def make_family(block: FamilyBlock) -> Family:
    lam = parse_complex(block.lam)
    if block.variant == "tan":
        return TanPower(lam, block.m)
    lattice = Lattice(parse_complex(block.omega1), parse_complex(block.omega2))
    if block.variant == "weierstrass":
        return WeierstrassP(lattice)
    if block.variant == "elliptic_poly":
        coeffs = [parse_complex(c) for c in block.poly]
        return EllipticComposePoly(lattice, Polynomial(tuple(coeffs)))
    return ExpElliptic(lam, block.d, lattice)


def family_label(family: Family) -> str:
    """Row label matching the corollary-table convention."""
    if isinstance(family, TanPower):
        return f"tan_power_m{family.m}"
    if isinstance(family, WeierstrassP):
        return "elliptic_q2"
    if isinstance(family, EllipticComposePoly):
        return f"elliptic_poly_d{family.poly.degree}"
    return f"exp_elliptic_d{family.d}"


def theory_input(family: Family) -> BoundInput:
    return BoundInput(
        rho=family.order, alpha1=family.alpha1, q=family.max_pole_multiplicity
    )


def _default_anchor_radius(family: Family, cfg: IfsConfig) -> float:
    if isinstance(family, TanPower):
        return 200.0 * np.pi
    return 9.7 * cfg.min_modulus


def _default_preimage_radius(family: Family) -> float:
    return 200.0 * np.pi if isinstance(family, TanPower) else 6.0


def _counting_window(family: Family) -> tuple[float, float, int]:
    if isinstance(family, TanPower):
        return 8.0, 600.0, 12
    if isinstance(family, WeierstrassP):
        return 3.0, 30.0, 12
    if isinstance(family, EllipticComposePoly):
        return 0.8, 2.4, 10
    return 2.0, 9.0, 10


def _patch_half(family: Family, center: complex) -> float:
    """Half-side of a solver patch holding O(10) b-points near center."""
    if isinstance(family, EllipticComposePoly):
        cell = max(abs(family.lattice.omega1), abs(family.lattice.omega2))
        stretch = max(1.0, abs(complex(family.poly.derivative_at(center))))
        return 1.3 * cell / stretch
    cell = max(abs(family.lattice.omega1), abs(family.lattice.omega2))
    return 1.3 * cell / max(1.0, np.sqrt(family.max_pole_multiplicity / 2.0))


_RING_ANGLES = (2, 3, 3, 4, 4, 3, 3)


def _ring_anchors(
    family: Family, b: complex, cfg: IfsConfig, radius: float, seed: int
) -> list[Preimage]:
    """b-points from solver patches on rings between 3R and radius."""
    lo = 1.08 * cfg.min_modulus
    if radius <= 1.35 * cfg.min_modulus:
        raise ConfigError(
            f"search radius {radius:.1f} must exceed the admission cutoff "
            f"3R = {cfg.min_modulus:.1f} by a safe margin"
        )
    rads = np.geomspace(lo, 0.97 * radius, len(_RING_ANGLES))
    anchors: list[Preimage] = []
    for i, rad in enumerate(rads):
        per = _RING_ANGLES[i]
        for k in range(per):
            ang = 2 * np.pi * (k + 0.31 * i) / per
            center = rad * np.exp(1j * ang)
            half = _patch_half(family, center)
            rect = Rect(
                center.real - half, center.real + half,
                center.imag - half, center.imag + half,
            )
            rep = solve_in_rect(family, b, rect, seed=seed + i)
            anchors.extend(rep.preimages)
    return anchors


def enumerate_anchors(
    family: Family, b: complex, cfg: IfsConfig, radius: float, seed: int
) -> list[Preimage]:
    if isinstance(family, TanPower):
        return solve_in_disk(family, b, radius, seed=seed).preimages
    return _ring_anchors(family, b, cfg, radius, seed)


@dataclass
class NumericRun:
    """All artifacts of one numeric pipeline run."""

    config: RunConfig
    label: str
    family: Family
    ifs_config: IfsConfig
    anchors: list[Preimage]
    branches: list[Branch]
    samples: list[CountingSample]
    rho_hat: float
    theta: ThetaEstimate
    bowen_off: float
    bowen_koebe: float
    separation: SeparationReport
    bound: BoundReport


def build_ifs_config(rc: RunConfig, family: Family) -> IfsConfig:
    cfg = IfsConfig.auto(family, max_branches=rc.pipeline.max_branches)
    if rc.pipeline.outer_radius is not None:
        if rc.pipeline.outer_radius < cfg.outer_radius:
            raise ConfigError(
                f"outer radius override {rc.pipeline.outer_radius} is below "
                f"the derived escape radius {cfg.outer_radius:.3f}"
            )
        cfg = IfsConfig(
            pole=cfg.pole,
            inner_radius=cfg.inner_radius,
            safety_radius=cfg.safety_radius,
            outer_radius=rc.pipeline.outer_radius,
            max_branches=cfg.max_branches,
        )
    return cfg


def run_numeric(rc: RunConfig) -> NumericRun:
    """Full pipeline for the configured family."""
    if rc.family is None:
        raise ConfigError("a family block is required for a numeric run")
    family = make_family(rc.family)
    label = family_label(family)
    pipe = rc.pipeline
    cfg = build_ifs_config(rc, family)
    b = complex(cfg.pole.location)
    radius = pipe.radius if pipe.radius is not None else _default_anchor_radius(family, cfg)
    anchors = enumerate_anchors(family, b, cfg, radius, pipe.seed)
    branches = build_branches(family, cfg, anchors)
    if not branches:
        raise InsufficientBranches(
            f"no anchors beyond the admission cutoff 3R = {cfg.min_modulus:.1f}; "
            "increase the search radius"
        )

    rmin_d, rmax_d, n_d = _counting_window(family)
    rmin = pipe.regression_rmin if pipe.regression_rmin is not None else rmin_d
    rmax = pipe.regression_rmax if pipe.regression_rmax is not None else rmax_d
    n = pipe.regression_samples if pipe.regression_samples is not None else n_d
    if rmax <= rmin:
        raise ConfigError("regression window is empty")
    radii = list(np.geomspace(rmin, rmax, n))
    samples = certified_counting_samples(family, b, radii, seed=pipe.seed)
    rho_hat = estimate_order_of_growth(samples)
    theta = estimate_theta(branches, rho_hat)
    bowen_off = bowen_one_level(branches)
    bowen_koebe = bowen_one_level(branches, distortion_factor=KOEBE_HALF)
    bowen_sel = bowen_koebe if pipe.distortion == "koebe" else bowen_off
    separation = separation_check(branches, cfg)
    bound = compare(label, theory_input(family), theta, bowen_sel)
    return NumericRun(
        config=rc,
        label=label,
        family=family,
        ifs_config=cfg,
        anchors=anchors,
        branches=branches,
        samples=samples,
        rho_hat=rho_hat,
        theta=theta,
        bowen_off=bowen_off,
        bowen_koebe=bowen_koebe,
        separation=separation,
        bound=bound,
    )


def enumerate_preimages(rc: RunConfig) -> tuple[Family, complex, list[Preimage], float]:
    """Preimage enumeration for cmd_preimages: all b-points in a disk.

    The base point is the pole the IFS construction would use, not
    merely the pole nearest the origin: admissibility guarantees b is
    no singular value, so every b-point is a simple root.
    """
    if rc.family is None:
        raise ConfigError("a family block is required to enumerate preimages")
    family = make_family(rc.family)
    b = complex(build_ifs_config(rc, family).pole.location)
    radius = (
        rc.pipeline.radius
        if rc.pipeline.radius is not None
        else _default_preimage_radius(family)
    )
    pts = solve_in_disk(family, b, radius, seed=rc.pipeline.seed).preimages
    return family, b, pts, radius


@dataclass
class RenderRun:
    family: Family
    grid: RenderGrid
    result: RenderResult
    mask: np.ndarray
    box_dimension: float | None
    box_sizes: tuple
    box_counts: tuple
    signal_mask: str  # which mask fed the box count: "boundary" or "undecided"


def run_render(rc: RunConfig, threads: int | None = None) -> RenderRun:
    """Render the configured frame and box-count the Julia proxy mask.

    The proxy is the classification boundary; when the frame is a
    single uniform class (no boundary pixels) the undecided mask is
    counted instead, so the sanity signal stays defined.
    """
    if rc.family is None:
        raise ConfigError("a family block is required to render")
    family = make_family(rc.family)
    rb = rc.render if rc.render is not None else RenderBlock()
    grid = RenderGrid(
        center=parse_complex(rb.center),
        width=rb.width,
        pixels_x=rb.pixels_x,
        pixels_y=rb.pixels_y,
        max_iter=rb.max_iter,
        escape_radius=rb.escape_radius,
        pole_capture_radius=rb.pole_capture_radius,
    )
    result = render(family, grid, threads=threads or rc.pipeline.threads)
    mask = boundary_mask(result)
    signal_mask = "boundary"
    if not mask.any():
        mask = result.status == 0
        signal_mask = "undecided"
    box_dimension = None
    box_sizes: tuple = ()
    box_counts: tuple = ()
    if mask.any():
        try:
            bc = box_counting(mask)
            box_dimension = bc.dimension
            box_sizes = bc.sizes
            box_counts = bc.counts
        except ValueError:
            pass  # frame too small for the default ladder
    return RenderRun(
        family=family,
        grid=grid,
        result=result,
        mask=mask,
        box_dimension=box_dimension,
        box_sizes=box_sizes,
        box_counts=box_counts,
        signal_mask=signal_mask,
    )


# -- serialization ---------------------------------------------------------


def _cplx(z: complex) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def bound_rows_csv(rows: list[BoundReport]) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER) + "\n")
    for row in rows:
        buf.write(",".join(row.csv_row()) + "\n")
    return buf.getvalue()


def preimages_csv(pts: list[Preimage]) -> str:
    buf = io.StringIO()
    buf.write("re,im,modulus,residual\n")
    for p in pts:
        buf.write(
            f"{p.point.real:.15g},{p.point.imag:.15g},{p.modulus:.15g},{p.residual:.6g}\n"
        )
    return buf.getvalue()


def branches_csv(branches: list[Branch]) -> str:
    buf = io.StringIO()
    buf.write("index,z_re,z_im,w_re,w_im,phi_deriv_mag,sheet\n")
    for br in branches:
        buf.write(
            f"{br.index},{br.z_n.real:.15g},{br.z_n.imag:.15g},"
            f"{br.w_n.real:.15g},{br.w_n.imag:.15g},{br.phi_deriv_mag:.15g},{br.sheet}\n"
        )
    return buf.getvalue()


def samples_csv(samples: list[CountingSample]) -> str:
    buf = io.StringIO()
    buf.write("radius,count\n")
    for s in samples:
        buf.write(f"{s.radius:.15g},{s.count}\n")
    return buf.getvalue()


def boxcount_csv(sizes, counts) -> str:
    buf = io.StringIO()
    buf.write("box_size,count\n")
    for s, c in zip(sizes, counts):
        buf.write(f"{s},{c}\n")
    return buf.getvalue()


def bound_report_dict(row: BoundReport) -> dict:
    return {
        "family_label": row.family_label,
        "rho": row.rho,
        "alpha1": row.alpha1,
        "q": row.q,
        "theoretical": row.theoretical,
        "theta_hat": row.theta_hat,
        "bowen_root": row.bowen_root,
        "verdict": row.verdict.value,
        "note": row.note,
    }


def theta_dict(theta: ThetaEstimate) -> dict:
    return {
        "slope_beta": theta.slope_beta,
        "rho_hat": theta.rho_hat,
        "theta_hat": theta.theta_hat,
        "r_squared": theta.r_squared,
        "n_used": theta.n_used,
        "degenerate_fit": theta.degenerate_fit,
    }


def separation_dict(sep: SeparationReport) -> dict:
    return {
        "n0": sep.n0,
        "checked_up_to": sep.checked_up_to,
        "violations": [list(pair) for pair in sep.violations],
    }


def ifs_config_dict(cfg: IfsConfig) -> dict:
    return {
        "pole": _cplx(cfg.pole.location),
        "pole_multiplicity": cfg.pole.multiplicity,
        "inner_radius": cfg.inner_radius,
        "safety_radius": cfg.safety_radius,
        "outer_radius": cfg.outer_radius,
        "min_modulus": cfg.min_modulus,
        "max_branches": cfg.max_branches,
    }


def manifest_dict(rc: RunConfig) -> dict:
    return {
        "config_hash": config_hash(rc),
        "resolved_config": rc.model_dump(),
        "seed": rc.pipeline.seed,
        "versions": {
            "package": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "pydantic": pydantic.version.VERSION,
        },
    }


def report_bundle(run: NumericRun, render_run: RenderRun | None = None) -> dict:
    """Single JSON-ready bundle of all pipeline stages (no timestamps)."""
    bundle = {
        "family_label": run.label,
        "config_hash": config_hash(run.config),
        "family": run.family.describe(),
        "ifs_config": ifs_config_dict(run.ifs_config),
        "n_anchors": len(run.anchors),
        "n_branches": len(run.branches),
        "counting_samples": [
            {"radius": s.radius, "count": s.count} for s in run.samples
        ],
        "rho_hat": run.rho_hat,
        "theta": theta_dict(run.theta),
        "bowen": {
            "off": run.bowen_off,
            "koebe": run.bowen_koebe,
            "selected": run.config.pipeline.distortion,
        },
        "separation": separation_dict(run.separation),
        "bound": bound_report_dict(run.bound),
    }
    if render_run is not None:
        bundle["render"] = {
            "pixels_x": render_run.grid.pixels_x,
            "pixels_y": render_run.grid.pixels_y,
            "max_iter": render_run.grid.max_iter,
            "signal_mask": render_run.signal_mask,
            "box_dimension": render_run.box_dimension,
            "box_sizes": list(render_run.box_sizes),
            "box_counts": list(render_run.box_counts),
        }
    return bundle


def to_json(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"

"""Handlers: one function per endpoint, shared by HTTP app and CLI.

Each handler takes a RunConfig (already validated) and returns a
response model; nothing here touches the filesystem, so the HTTP app
stays stateless and the CLI decides what to write where.
"""

from __future__ import annotations

import base64
import io

import numpy as np

from .. import __version__
from ..bounds import Verdict, corollary_table, theorem1_bound
from ..config import RunConfig
from ..errors import ConfigError, HypdimError
from ..pipeline import (
    enumerate_preimages,
    family_label,
    make_family,
    manifest_dict,
    report_bundle,
    run_numeric,
    run_render,
    theory_input,
)
from ..render import write_p6
from . import models


def health() -> models.Health:
    return models.Health(status="ok", version=__version__)


def corollaries() -> models.CorollaryTable:
    return models.CorollaryTable(
        rows=[models.BoundRow.from_report(r) for r in corollary_table()]
    )


def bound(rc: RunConfig, table_only: bool = False) -> models.BoundResponse:
    """Theory table, with one numeric verdict row when a family is set.

    A numeric failure downgrades the row to NumericsUnavailable with
    the failure note; only an actual estimate can be Inconsistent.
    """
    if table_only or rc.family is None:
        return models.BoundResponse(
            rows=[models.BoundRow.from_report(r) for r in corollary_table()]
        )
    try:
        run = run_numeric(rc)
        row = models.BoundRow.from_report(run.bound)
    except ConfigError:
        raise
    except HypdimError as exc:
        family = make_family(rc.family)
        inp = theory_input(family)
        row = models.BoundRow(
            family_label=family_label(family),
            rho=inp.rho,
            alpha1=inp.alpha1,
            q=inp.q,
            theoretical=theorem1_bound(inp),
            verdict=Verdict.NUMERICS_UNAVAILABLE.value,
            note=f"pipeline failed: {exc}",
        )
    return models.BoundResponse(rows=[row], verdict=row.verdict)


def theta(rc: RunConfig) -> models.ThetaResponse:
    run = run_numeric(rc)
    return models.ThetaResponse.from_estimate(run.label, run.theta)


def preimages(rc: RunConfig) -> models.PreimagesResponse:
    family, b, pts, radius = enumerate_preimages(rc)
    return models.PreimagesResponse(
        family_label=family_label(family),
        pole_re=b.real,
        pole_im=b.imag,
        radius=radius,
        count=len(pts),
        rows=[
            models.PreimageRow(
                re=p.point.real, im=p.point.imag, modulus=p.modulus, residual=p.residual
            )
            for p in pts
        ],
    )


def render_frame(
    rc: RunConfig, include_image: bool = False, run=None
) -> models.RenderResponse:
    rr = run if run is not None else run_render(rc)
    p6 = None
    if include_image:
        buf = io.BytesIO()
        write_p6(buf, rr.result)
        p6 = base64.b64encode(buf.getvalue()).decode()
    undecided = float(np.mean(rr.result.status == 0))
    return models.RenderResponse(
        family_label=family_label(rr.family),
        pixels_x=rr.grid.pixels_x,
        pixels_y=rr.grid.pixels_y,
        max_iter=rr.grid.max_iter,
        undecided_fraction=undecided,
        boundary_pixels=int(rr.mask.sum()) if rr.signal_mask == "boundary" else 0,
        signal_mask=rr.signal_mask,
        box_dimension=rr.box_dimension,
        box_sizes=list(rr.box_sizes),
        box_counts=list(rr.box_counts),
        p6_base64=p6,
    )


def report(rc: RunConfig) -> models.ReportResponse:
    run = run_numeric(rc)
    render_run = run_render(rc) if rc.render is not None else None
    return models.ReportResponse(
        report=report_bundle(run, render_run),
        manifest=manifest_dict(rc),
    )

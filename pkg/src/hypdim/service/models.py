"""Response models of the service layer.

Requests are RunConfig bodies (see hypdim.config); responses mirror
the pipeline dataclasses as plain-data models so the HTTP app and the
CLI share one contract.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel

from ..bounds import BoundReport
from ..ifs import SeparationReport, ThetaEstimate


class Health(BaseModel):
    status: str
    version: str


class BoundRow(BaseModel):
    family_label: str
    rho: float
    alpha1: float
    q: int
    theoretical: float
    theta_hat: Optional[float] = None
    bowen_root: Optional[float] = None
    verdict: str
    note: str = ""

    @classmethod
    def from_report(cls, report: BoundReport) -> "BoundRow":
        return cls(
            family_label=report.family_label,
            rho=report.rho,
            alpha1=report.alpha1,
            q=report.q,
            theoretical=report.theoretical,
            theta_hat=report.theta_hat,
            bowen_root=report.bowen_root,
            verdict=report.verdict.value,
            note=report.note,
        )


class CorollaryTable(BaseModel):
    rows: list[BoundRow]


class BoundResponse(BaseModel):
    rows: list[BoundRow]
    verdict: Optional[str] = None  # verdict of the numeric row, if any


class ThetaResponse(BaseModel):
    family_label: str
    slope_beta: float
    rho_hat: float
    theta_hat: float
    r_squared: float
    n_used: int
    degenerate_fit: bool

    @classmethod
    def from_estimate(cls, label: str, theta: ThetaEstimate) -> "ThetaResponse":
        return cls(
            family_label=label,
            slope_beta=theta.slope_beta,
            rho_hat=theta.rho_hat,
            theta_hat=theta.theta_hat,
            r_squared=theta.r_squared,
            n_used=theta.n_used,
            degenerate_fit=theta.degenerate_fit,
        )


class PreimageRow(BaseModel):
    re: float
    im: float
    modulus: float
    residual: float


class PreimagesResponse(BaseModel):
    family_label: str
    pole_re: float
    pole_im: float
    radius: float
    count: int
    rows: list[PreimageRow]


class SeparationModel(BaseModel):
    n0: int
    checked_up_to: int
    violations: list[list[int]]

    @classmethod
    def from_report(cls, sep: SeparationReport) -> "SeparationModel":
        return cls(
            n0=sep.n0,
            checked_up_to=sep.checked_up_to,
            violations=[list(p) for p in sep.violations],
        )


class RenderResponse(BaseModel):
    family_label: str
    pixels_x: int
    pixels_y: int
    max_iter: int
    undecided_fraction: float
    boundary_pixels: int
    signal_mask: str
    box_dimension: Optional[float] = None
    box_sizes: list[int] = []
    box_counts: list[int] = []
    p6_base64: Optional[str] = None


class ReportResponse(BaseModel):
    report: dict
    manifest: dict

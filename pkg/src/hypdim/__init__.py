"""Lower bounds for the hyperbolic dimension of meromorphic Julia sets.

Builds conformal iterated function systems over the poles of
finite-order meromorphic functions (tangent powers, Weierstrass
elliptic functions, their polynomial and exponential compositions),
estimates the critical exponent of the associated series, and checks
it against the closed-form bound rho / (alpha1 + 1 + 1/q).
"""

from .bounds import (
    CSV_HEADER,
    BoundInput,
    BoundReport,
    Verdict,
    compare,
    corollary_table,
    theorem1_bound,
)
from .errors import (
    AtPoleError,
    BoundaryCollision,
    ConfigError,
    CountMismatch,
    DegenerateMask,
    HypdimError,
    HypothesisViolated,
    InsufficientBranches,
    InsufficientData,
    NewtonDiverged,
    NotContracting,
    QuadratureNotConverged,
    SeriesNotConverged,
)
from .families import (
    AtPole,
    EllipticComposePoly,
    ExpElliptic,
    Family,
    PoleData,
    Polynomial,
    TanPower,
    WeierstrassP,
    near_pole_scaling_exponent,
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
    koebe_distortion_factor,
    poincare_sum,
    separation_check,
)
from .lattice import Lattice
from .preimages import (
    CountingSample,
    Preimage,
    Rect,
    SolveReport,
    certified_counting_samples,
    count_zeros_in_rectangle,
    counting_function,
    estimate_order_of_growth,
    find_preimages,
    solve_in_disk,
    solve_in_rect,
)
from .render import (
    BoxCountResult,
    RenderGrid,
    RenderResult,
    boundary_mask,
    box_counting,
    render,
    write_p4,
    write_p6,
)

__version__ = "0.1.0"

__all__ = [
    "AtPole",
    "AtPoleError",
    "BoundInput",
    "BoundReport",
    "BoundaryCollision",
    "BoxCountResult",
    "Branch",
    "CSV_HEADER",
    "ConfigError",
    "CountMismatch",
    "CountingSample",
    "DegenerateMask",
    "EllipticComposePoly",
    "ExpElliptic",
    "Family",
    "HypdimError",
    "HypothesisViolated",
    "IfsConfig",
    "InsufficientBranches",
    "InsufficientData",
    "KOEBE_HALF",
    "Lattice",
    "NewtonDiverged",
    "NotContracting",
    "PoleData",
    "Polynomial",
    "Preimage",
    "QuadratureNotConverged",
    "Rect",
    "RenderGrid",
    "RenderResult",
    "SeparationReport",
    "SeriesNotConverged",
    "SolveReport",
    "TanPower",
    "ThetaEstimate",
    "Verdict",
    "WeierstrassP",
    "boundary_mask",
    "bowen_one_level",
    "box_counting",
    "build_branches",
    "certified_counting_samples",
    "compare",
    "corollary_table",
    "count_zeros_in_rectangle",
    "counting_function",
    "estimate_order_of_growth",
    "estimate_theta",
    "find_preimages",
    "koebe_distortion_factor",
    "near_pole_scaling_exponent",
    "poincare_sum",
    "render",
    "separation_check",
    "solve_in_disk",
    "solve_in_rect",
    "theorem1_bound",
    "write_p4",
    "write_p6",
]

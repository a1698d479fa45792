"""Exception hierarchy shared across the package."""

from __future__ import annotations


class HypdimError(Exception):
    """Base class for all package errors."""


class SeriesNotConverged(HypdimError):
    """An internal series truncation could not meet its tolerance."""


class AtPoleError(HypdimError):
    """Evaluation point collided with a catalogued pole."""

    def __init__(self, point: complex, pole: complex):
        self.point = point
        self.pole = pole
        super().__init__(f"point {point} is within the exclusion radius of pole {pole}")


class BoundaryCollision(HypdimError):
    """A root or pole sits too close to an integration contour."""


class QuadratureNotConverged(HypdimError):
    """Contour quadrature failed to certify an integer winding number."""


class NewtonDiverged(HypdimError):
    """Newton refinement left the search region or stalled."""


class CountMismatch(HypdimError):
    """Leaf-cell root counts disagree with the enclosing-region count."""


class InsufficientData(HypdimError):
    """Not enough samples for a meaningful regression."""


class InsufficientBranches(HypdimError):
    """Too few contraction branches for exponent estimation."""


class NotContracting(HypdimError):
    """A selected branch has contraction ratio >= 1."""


class HypothesisViolated(HypdimError):
    """Closed-form bound requested outside its validity range."""


class DegenerateMask(HypdimError):
    """Box counting on an empty mask has no defined slope."""


class ConfigError(HypdimError):
    """Run configuration failed to parse or validate."""

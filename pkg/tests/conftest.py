"""Shared fixtures: families and full pipeline runs reused across test modules.

Pipeline runs are session-scoped; every consumer sees the same immutable
NumericRun, so assertions in different files stay consistent with each other.
"""

from __future__ import annotations

import numpy as np
import pytest

from hypdim import Lattice, TanPower, WeierstrassP
from hypdim.config import FamilyBlock, RunConfig
from hypdim.pipeline import run_numeric


@pytest.fixture(scope="session")
def square_lattice() -> Lattice:
    return Lattice(1.0, 1.0j)


@pytest.fixture(scope="session")
def tan_family() -> TanPower:
    return TanPower()


@pytest.fixture(scope="session")
def wp_family(square_lattice) -> WeierstrassP:
    return WeierstrassP(square_lattice)


@pytest.fixture(scope="session")
def tan_run():
    """Full numeric pipeline for tan at default scale (radius 200*pi)."""
    return run_numeric(RunConfig(family=FamilyBlock(variant="tan")))


@pytest.fixture(scope="session")
def wp_run():
    """Full numeric pipeline for wp on the square lattice."""
    return run_numeric(RunConfig(family=FamilyBlock(variant="weierstrass")))


@pytest.fixture(scope="session")
def rng() -> np.random.Generator:
    return np.random.default_rng(20260815)

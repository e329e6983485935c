"""Fixtures for the solver and indicator benchmarks."""

from __future__ import annotations

import pytest

from pconduct.dnmap import DnOracle
from pconduct.geometry import Disk, DomainSpec, build_mesh, paint_scene
from pconduct.psolver import SolverConfig
from pconduct.wolff import integrate_wolff

RESOLUTION = 32


@pytest.fixture(scope="session")
def bench_mesh():
    return build_mesh(DomainSpec.unit_square(), RESOLUTION)


@pytest.fixture(scope="session")
def bench_wolff():
    return integrate_wolff(2.0)


def make_oracles(mesh, p: float = 2.0, *, cache: bool = True):
    """(Lambda_sigma, Lambda_1) for a sigma = 2 disk at the centre of ``mesh``."""
    scene = paint_scene(mesh, [(Disk((0.5, 0.5), 0.2), 2.0)], p=p)
    config = SolverConfig(p)
    return DnOracle.from_scene(scene, config, cache=cache), DnOracle.reference(mesh, config)

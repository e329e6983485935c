"""Shared fixtures: small meshes, painted scenes and their oracles.

Meshes are coarse so the whole suite runs in seconds; the 64-grid scenes
live in ``acceptance/`` behind the ``slow`` marker.
"""

from pathlib import Path

import pytest

from pconduct.dnmap import DnOracle
from pconduct.geometry import Disk, DomainSpec, build_mesh, paint_scene
from pconduct.psolver import SolverConfig
from pconduct.wolff import integrate_wolff

SCENES = Path(__file__).resolve().parents[2] / "scenes"


@pytest.fixture(scope="session")
def scenes_dir():
    return SCENES


@pytest.fixture(scope="session")
def square_mesh():
    return build_mesh(DomainSpec.unit_square(), 16)


@pytest.fixture(scope="session")
def fine_square_mesh():
    return build_mesh(DomainSpec.unit_square(), 24)


@pytest.fixture(scope="session")
def disk_mesh():
    return build_mesh(DomainSpec.disk(), 20)


@pytest.fixture(scope="session")
def wolff2():
    return integrate_wolff(2.0)


@pytest.fixture(scope="session")
def wolff3():
    return integrate_wolff(3.0)


def _disk_scene(mesh, sigma: float, p: float = 2.0):
    return paint_scene(mesh, [(Disk((0.5, 0.5), 0.2), sigma)], p=p)


def _oracles(scene):
    config = SolverConfig(scene.p)
    return DnOracle.from_scene(scene, config), DnOracle.reference(scene.mesh, config)


@pytest.fixture
def make_disk_scene():
    """Factory: a disk of radius 0.2 at the centre of the unit square."""
    return _disk_scene


@pytest.fixture
def make_oracles():
    """Factory: (Lambda_sigma, Lambda_1) oracles for a scene."""
    return _oracles


@pytest.fixture
def high_disk(square_mesh):
    """sigma = 2 on the disk."""
    return _disk_scene(square_mesh, 2.0)


@pytest.fixture
def low_disk(square_mesh):
    """sigma = 0.5 on the disk."""
    return _disk_scene(square_mesh, 0.5)


@pytest.fixture
def homogeneous(square_mesh):
    return paint_scene(square_mesh, [], p=2.0)


@pytest.fixture
def write_scene(tmp_path):
    """Write a scene file into tmp_path and return its path."""

    def write(text: str, name: str = "scene.toml") -> Path:
        path = tmp_path / name
        path.write_text(text)
        return path

    return write

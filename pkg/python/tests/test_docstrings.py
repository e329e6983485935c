"""Examples in docstrings stay runnable."""

import doctest
import importlib
from pathlib import Path

import pytest

from pconduct.geometry import Disk, DomainSpec, build_mesh, paint_scene
from pconduct.psolver import BoundaryTrace

ROOT = Path(__file__).resolve().parents[2]

MODULES = [
    "pconduct.boundary",
    "pconduct.config.scene",
    "pconduct.dnmap",
    "pconduct.enclosure",
    "pconduct.geometry.hull",
    "pconduct.geometry.mesh",
    "pconduct.geometry.scene",
    "pconduct.monotonicity",
    "pconduct.psolver",
    "pconduct.reports.svg",
    "pconduct.wolff",
]


def _globs():
    mesh = build_mesh(DomainSpec.unit_square(), 8)
    return {
        "build_mesh": build_mesh,
        "DomainSpec": DomainSpec,
        "Disk": Disk,
        "mesh": mesh,
        "scene": paint_scene(mesh, [(Disk((0.5, 0.5), 0.2), 2.0)]),
        "f": BoundaryTrace.from_function(mesh, lambda x: x[:, 0]),
    }


@pytest.mark.parametrize("name", MODULES)
def test_docstring_examples(name, monkeypatch):
    # scene paths in examples are relative to the repository root
    monkeypatch.chdir(ROOT)
    module = importlib.import_module(name)
    result = doctest.testmod(module, extraglobs=_globs(), optionflags=doctest.NORMALIZE_WHITESPACE)
    assert result.attempted > 0
    assert result.failed == 0

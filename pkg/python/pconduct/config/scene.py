"""Turn a scene file into a mesh, a painted conductivity and solver settings."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import NamedTuple

from pconduct.config.loader import load
from pconduct.config.schema import SceneFile
from pconduct.errors import ConfigError
from pconduct.geometry.domains import DomainSpec
from pconduct.geometry.mesh import build_mesh
from pconduct.geometry.scene import ConductivityScene, paint_scene, scene_from_function
from pconduct.psolver import SolverConfig

__all__ = ["LoadedScene", "build_scene", "load_scene"]

logger = logging.getLogger(__name__)


class LoadedScene(NamedTuple):
    domain: DomainSpec
    scene: ConductivityScene
    solver: SolverConfig


def build_scene(spec: SceneFile) -> LoadedScene:
    domain = spec.domain.to_domain()
    mesh = build_mesh(domain, spec.resolution)
    if spec.profile is not None:
        scene = scene_from_function(mesh, spec.profile, spec.p)
    else:
        if spec.background != 1.0 and spec.inclusions:
            raise ConfigError(
                f"Inclusions are painted on the background sigma = 1, got background = {spec.background}.\n\n"
                "  Drop the background key or describe a constant scene without inclusions."
            )
        shapes = [(inc.to_shape(), inc.sigma) for inc in spec.inclusions]
        scene = paint_scene(mesh, shapes, p=spec.p, background=spec.background)
    solver = SolverConfig(
        spec.p,
        epsilon=spec.solver.epsilon,
        max_iterations=spec.solver.max_iterations,
        tolerance=spec.solver.tolerance,
    )
    logger.info(
        "scene: %s domain, %d cells, p=%g, sign class %s",
        domain.kind, mesh.n_cells, spec.p, scene.sign_class.value,
    )
    return LoadedScene(domain, scene, solver)


def load_scene(path: str | Path) -> LoadedScene:
    """Load a scene file (.toml, .json, .yaml) and build everything it describes.

    Example:
        >>> domain, scene, solver = load_scene("scenes/disk.toml")
        >>> scene.sign_class
        <SignClass.GEQ1: 'geq1'>
    """
    return build_scene(load(path, SceneFile))

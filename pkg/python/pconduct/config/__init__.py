"""Loading scene files, run configurations and project defaults."""

from pconduct.config.defaults import find_pyproject, resolve_defaults
from pconduct.config.loader import Loader, deep_merge, load
from pconduct.config.parsers import PARSERS, parse_file
from pconduct.config.scene import LoadedScene, build_scene, load_scene
from pconduct.config.schema import (
    Defaults,
    DiskInclusion,
    DomainTable,
    InclusionSpec,
    PolygonInclusion,
    RadialProfile,
    RectangleInclusion,
    RunConfig,
    SceneFile,
    SolverTable,
)

__all__ = [
    # Loading
    "load",
    "Loader",
    "deep_merge",
    "parse_file",
    "PARSERS",
    # Scenes
    "load_scene",
    "build_scene",
    "LoadedScene",
    "SceneFile",
    "DomainTable",
    "InclusionSpec",
    "DiskInclusion",
    "RectangleInclusion",
    "PolygonInclusion",
    "RadialProfile",
    "SolverTable",
    # Runs
    "RunConfig",
    "Defaults",
    "resolve_defaults",
    "find_pyproject",
]

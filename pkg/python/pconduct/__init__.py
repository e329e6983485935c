"""Inclusion detection and boundary recovery for the p-conductivity equation.

Public API exports:
- Scenes, meshes and hulls (from pconduct.geometry)
- Forward solver and Dirichlet-to-Neumann pairings (from pconduct.psolver, pconduct.dnmap)
- Wolff solutions (from pconduct.wolff)
- Reconstruction methods (from pconduct.enclosure, pconduct.monotonicity, pconduct.boundary)
- Scene and run files (from pconduct.config)
"""

# Errors
from pconduct.errors import (
    ConfigError,
    GeometryError,
    InconclusiveError,
    PConductError,
    SolverError,
)

# Geometry
from pconduct.geometry import (
    ConductivityScene,
    DomainSpec,
    HullPolygon,
    SignClass,
    TriMesh,
    build_mesh,
    paint_scene,
    scene_from_function,
)

# Forward problem and boundary measurements
from pconduct.psolver import BoundaryTrace, SolverConfig, solve_dirichlet, dn_pairing
from pconduct.dnmap import DnOracle, preorder_test
from pconduct.wolff import WolffSolution, integrate_wolff

# Reconstruction
from pconduct.enclosure import indicator, estimate_support, reconstruct_hull
from pconduct.monotonicity import ball_grid, scan
from pconduct.boundary import recover_boundary, recover_boundary_value

# Files and runs
from pconduct.config import RunConfig, load, load_scene
from pconduct.run import RunReport, run

__all__ = [
    # Errors
    "PConductError",
    "ConfigError",
    "GeometryError",
    "SolverError",
    "InconclusiveError",
    # Geometry
    "DomainSpec",
    "TriMesh",
    "build_mesh",
    "ConductivityScene",
    "SignClass",
    "paint_scene",
    "scene_from_function",
    "HullPolygon",
    # Forward problem
    "BoundaryTrace",
    "SolverConfig",
    "solve_dirichlet",
    "dn_pairing",
    "DnOracle",
    "preorder_test",
    "WolffSolution",
    "integrate_wolff",
    # Reconstruction
    "indicator",
    "estimate_support",
    "reconstruct_hull",
    "ball_grid",
    "scan",
    "recover_boundary",
    "recover_boundary_value",
    # Files and runs
    "load",
    "load_scene",
    "RunConfig",
    "RunReport",
    "run",
]

"""Domains, meshes, conductivity scenes and convex hulls."""

from pconduct.geometry.domains import DomainKind, DomainSpec
from pconduct.geometry.hull import (
    HalfSpace,
    HullPolygon,
    convex_hull_of_cells,
    convex_hull_of_points,
    direction_grid,
    halfspace_intersection,
    hausdorff_distance,
    support_value,
)
from pconduct.geometry.mesh import TriMesh, build_mesh
from pconduct.geometry.scene import (
    ConductivityScene,
    Disk,
    Polygon,
    Rectangle,
    Shape,
    SignClass,
    discrete_support_set,
    infer_sign_class,
    paint_scene,
    scene_from_function,
)

__all__ = [
    # Domains and meshes
    "DomainKind",
    "DomainSpec",
    "TriMesh",
    "build_mesh",
    # Scenes
    "SignClass",
    "Shape",
    "Disk",
    "Rectangle",
    "Polygon",
    "ConductivityScene",
    "paint_scene",
    "scene_from_function",
    "infer_sign_class",
    "discrete_support_set",
    # Hulls
    "HalfSpace",
    "HullPolygon",
    "direction_grid",
    "support_value",
    "convex_hull_of_points",
    "convex_hull_of_cells",
    "halfspace_intersection",
    "hausdorff_distance",
]

"""Convex hulls kept in two synchronized forms: a vertex list and a support map.

The vertex list is authoritative. The support map records, per probed
direction, the offset ``h`` of the supporting half-space; it is what the
reconstruction methods produce and what the CSV reports carry.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from pconduct.errors import GeometryError
from pconduct.geometry.mesh import TriMesh

__all__ = [
    "HalfSpace",
    "HullPolygon",
    "direction_grid",
    "support_value",
    "convex_hull_of_points",
    "convex_hull_of_cells",
    "halfspace_intersection",
    "hausdorff_distance",
]

UNIT_TOL = 1e-12


def _unit(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=float).reshape(2)
    norm = float(np.hypot(*rho))
    if abs(norm - 1.0) > 1e-9:
        raise GeometryError(
            f"Direction must be a unit vector, got {tuple(rho)} with length {norm:.12g}.\n\n"
            "  Normalize it first, e.g.:\n    rho = rho / np.linalg.norm(rho)"
        )
    return rho


def _key(rho: np.ndarray) -> tuple[float, float]:
    return float(rho[0]), float(rho[1])


@dataclass(frozen=True)
class HalfSpace:
    """The closed half-plane {x : x·rho <= t}."""

    rho: tuple[float, float]
    t: float

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho, dtype=float).reshape(2)
        if abs(float(np.hypot(*rho)) - 1.0) > UNIT_TOL:
            raise GeometryError(
                f"Half-space normal must have unit length, got {tuple(rho)}. "
                "Build it with HalfSpace.from_direction to normalize."
            )
        object.__setattr__(self, "rho", _key(rho))
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def from_direction(cls, rho, t: float) -> HalfSpace:
        rho = np.asarray(rho, dtype=float).reshape(2)
        return cls(_key(rho / np.hypot(*rho)), t)

    def contains(self, points, tol: float = 1e-12) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts @ np.asarray(self.rho) <= self.t + tol


@dataclass(frozen=True, eq=False)
class HullPolygon:
    """A convex polygon with its support values on a direction grid.

    ``vertices`` runs counterclockwise. An empty hull has no vertices and an
    empty support map; it is the answer for a homogeneous scene.
    """

    vertices: np.ndarray
    support: dict[tuple[float, float], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        verts = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        verts.setflags(write=False)
        object.__setattr__(self, "vertices", verts)

    @classmethod
    def empty(cls) -> HullPolygon:
        return cls(np.empty((0, 2)))

    @property
    def is_empty(self) -> bool:
        return len(self.vertices) == 0

    @property
    def area(self) -> float:
        if len(self.vertices) < 3:
            return 0.0
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def directions(self) -> np.ndarray:
        return np.array(list(self.support), dtype=float).reshape(-1, 2)

    def support_value(self, rho) -> float:
        return support_value(self, rho)

    def with_support(self, directions: Iterable) -> HullPolygon:
        """Copy of this hull whose support map covers ``directions``."""
        support = {}
        for rho in directions:
            rho = _unit(rho)
            support[_key(rho)] = support_value(self, rho)
        return HullPolygon(self.vertices, support)

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.is_empty:
            return np.zeros(len(pts), dtype=bool)
        return self.distance(pts) <= tol

    def distance(self, points) -> np.ndarray:
        """Euclidean distance from each point to the filled polygon."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.is_empty:
            return np.full(len(pts), np.inf)
        a = self.vertices
        b = np.roll(a, -1, axis=0)
        edge = b - a
        rel = pts[:, None, :] - a[None, :, :]
        length2 = np.maximum(np.einsum("ij,ij->i", edge, edge), 1e-300)
        s = np.clip(np.einsum("nij,ij->ni", rel, edge) / length2, 0.0, 1.0)
        nearest = a[None] + s[..., None] * edge[None]
        dist = np.linalg.norm(pts[:, None, :] - nearest, axis=2).min(axis=1)
        if len(a) >= 3:
            cross = edge[None, :, 0] * rel[:, :, 1] - edge[None, :, 1] * rel[:, :, 0]
            dist[np.all(cross >= 0.0, axis=1)] = 0.0
        return dist


def direction_grid(count: int = 32, offset: float = 0.0) -> np.ndarray:
    """``count`` equispaced unit vectors starting at angle ``offset``."""
    if count < 1:
        raise GeometryError(f"Direction count must be positive, got {count}.")
    angles = offset + 2.0 * np.pi * np.arange(count) / count
    return np.column_stack([np.cos(angles), np.sin(angles)])


def support_value(hull: HullPolygon, rho) -> float:
    """max over hull vertices of v·rho.

    Example:
        >>> square = convex_hull_of_points([[0, 0], [1, 0], [1, 1], [0, 1]])
        >>> support_value(square, (1.0, 0.0))
        1.0
    """
    rho = _unit(rho)
    if hull.is_empty:
        raise GeometryError(
            "An empty hull has no support value. Check hull.is_empty before querying."
        )
    return float(np.max(hull.vertices @ rho))


def convex_hull_of_points(points, directions: Sequence | np.ndarray | None = None) -> HullPolygon:
    pts = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    if len(pts) < 3:
        raise GeometryError(
            f"A convex hull needs at least three distinct points, got {len(pts)}."
        )
    try:
        qhull = ConvexHull(pts)
    except QhullError as exc:
        raise GeometryError(f"Points are degenerate (all collinear?): {exc}") from exc
    # scipy lists 2-D hull vertices counterclockwise
    hull = HullPolygon(pts[qhull.vertices])
    if directions is None:
        directions = direction_grid()
    return hull.with_support(directions)


def convex_hull_of_cells(
    mesh: TriMesh,
    cells,
    directions: Sequence | np.ndarray | None = None,
) -> HullPolygon:
    """Hull of all vertices of the listed triangles.

    This is the discrete essential convex hull of a cell set, the ground
    truth the reconstruction methods are scored against.
    """
    cells = np.asarray(cells, dtype=np.int64).ravel()
    if cells.size == 0:
        raise GeometryError(
            "Cannot take the convex hull of an empty cell set: no inclusion.\n\n"
            "  A homogeneous scene has no hull; check scene.is_homogeneous first."
        )
    if cells.min() < 0 or cells.max() >= mesh.n_cells:
        raise GeometryError(
            f"Cell indices must lie in [0, {mesh.n_cells}), got range "
            f"[{cells.min()}, {cells.max()}]."
        )
    corners = mesh.vertices[np.unique(mesh.triangles[cells])]
    return convex_hull_of_points(corners, directions)


def halfspace_intersection(halfspaces: Sequence[HalfSpace]) -> HullPolygon:
    """Intersect closed half-planes into a polygon.

    Returns an empty hull when the half-planes have no common interior.

    Raises:
        GeometryError: when the normals leave a gap of half a turn or more,
            so the intersection is unbounded.
    """
    halfspaces = list(halfspaces)
    if len(halfspaces) < 3:
        raise GeometryError(
            f"Need at least three half-spaces to bound a polygon, got {len(halfspaces)}."
        )
    normals = np.array([h.rho for h in halfspaces], dtype=float)
    offsets = np.array([h.t for h in halfspaces], dtype=float)

    angles = np.sort(np.mod(np.arctan2(normals[:, 1], normals[:, 0]), 2.0 * np.pi))
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2.0 * np.pi]]))
    if gaps.max() >= np.pi - 1e-12:
        raise GeometryError(
            "Half-space normals must span the full circle; the intersection is unbounded.\n\n"
            f"  Largest angular gap between normals:\n    {np.degrees(gaps.max()):.1f} degrees\n\n"
            "  Add directions so that no gap reaches 180 degrees, e.g. use direction_grid(8)."
        )

    support: dict[tuple[float, float], float] = {}
    for h in halfspaces:
        support[h.rho] = min(h.t, support.get(h.rho, np.inf))

    # Chebyshev center: maximize r subject to rho·x + r <= t
    res = linprog(
        c=[0.0, 0.0, -1.0],
        A_ub=np.column_stack([normals, np.ones(len(normals))]),
        b_ub=offsets,
        bounds=[(None, None), (None, None), (0.0, None)],
        method="highs",
    )
    if res.status == 2 or (res.status == 0 and res.x[2] <= 1e-12):
        return HullPolygon(np.empty((0, 2)), support)
    if res.status != 0:
        raise GeometryError(f"Half-space interior point search failed: {res.message}")

    center = res.x[:2]
    qhull = HalfspaceIntersection(np.column_stack([normals, -offsets]), center)
    corners = qhull.intersections[np.all(np.isfinite(qhull.intersections), axis=1)]
    hull = convex_hull_of_points(corners, directions=())
    return HullPolygon(hull.vertices, support)


def hausdorff_distance(a: HullPolygon, b: HullPolygon) -> float:
    """Hausdorff distance between two filled convex polygons.

    The distance from a convex polygon to a convex set is maximized at a
    vertex, so checking vertices of each side is exact.
    """
    if a.is_empty and b.is_empty:
        return 0.0
    if a.is_empty or b.is_empty:
        return float("inf")
    return float(max(b.distance(a.vertices).max(), a.distance(b.vertices).max()))

"""Convex hulls, support maps and half-space intersections."""

import math

import numpy as np
import pytest

from pconduct.errors import GeometryError
from pconduct.geometry import (
    HalfSpace,
    HullPolygon,
    convex_hull_of_cells,
    convex_hull_of_points,
    direction_grid,
    halfspace_intersection,
    hausdorff_distance,
    support_value,
)

UNIT_SQUARE = [[0, 0], [1, 0], [1, 1], [0, 1]]


def test_hull_of_points_drops_interior_points():
    hull = convex_hull_of_points(UNIT_SQUARE + [[0.5, 0.5], [0.2, 0.7]])
    assert len(hull.vertices) == 4
    assert hull.area == pytest.approx(1.0)


def test_hull_carries_support_map_on_direction_grid():
    hull = convex_hull_of_points(UNIT_SQUARE, direction_grid(8))
    assert len(hull.support) == 8
    assert hull.support[(1.0, 0.0)] == pytest.approx(1.0)
    diagonal = (math.sqrt(0.5), math.sqrt(0.5))
    assert hull.support_value(diagonal) == pytest.approx(math.sqrt(2.0))


def test_support_value_requires_unit_direction():
    hull = convex_hull_of_points(UNIT_SQUARE)
    with pytest.raises(GeometryError, match="unit vector"):
        support_value(hull, (2.0, 0.0))


def test_empty_hull_has_no_support_value():
    with pytest.raises(GeometryError, match="empty hull"):
        support_value(HullPolygon.empty(), (1.0, 0.0))


def test_collinear_points_are_degenerate():
    with pytest.raises(GeometryError):
        convex_hull_of_points([[0, 0], [1, 1], [2, 2]])


def test_hull_of_cells_covers_their_vertices(square_mesh):
    cells = np.arange(10)
    hull = convex_hull_of_cells(square_mesh, cells)
    corners = square_mesh.vertices[np.unique(square_mesh.triangles[cells])]
    assert np.all(hull.contains(corners))


def test_hull_of_no_cells_is_an_error(square_mesh):
    with pytest.raises(GeometryError, match="no inclusion"):
        convex_hull_of_cells(square_mesh, [])


# ==========================================
# Half-space intersections
# ==========================================
def test_octagon_around_a_disk():
    r = 0.3
    halfspaces = [HalfSpace.from_direction(rho, r) for rho in direction_grid(8)]
    hull = halfspace_intersection(halfspaces)
    assert len(hull.vertices) == 8
    assert hull.area == pytest.approx(8.0 * r**2 * math.tan(math.pi / 8.0))
    assert hull.support[(1.0, 0.0)] == pytest.approx(r)


def test_intersection_of_disjoint_half_planes_is_empty():
    halfspaces = [
        HalfSpace((1.0, 0.0), -0.5),
        HalfSpace((-1.0, 0.0), -0.5),
        HalfSpace((0.0, 1.0), 1.0),
        HalfSpace((0.0, -1.0), 1.0),
    ]
    assert halfspace_intersection(halfspaces).is_empty


def test_half_circle_of_normals_is_unbounded():
    halfspaces = [HalfSpace.from_direction(rho, 1.0) for rho in direction_grid(16)[:8]]
    with pytest.raises(GeometryError, match="unbounded"):
        halfspace_intersection(halfspaces)


def test_half_space_requires_unit_normal():
    with pytest.raises(GeometryError, match="unit length"):
        HalfSpace((1.0, 1.0), 0.0)


# ==========================================
# Distances
# ==========================================
def test_hausdorff_distance_of_shifted_squares():
    a = convex_hull_of_points(UNIT_SQUARE)
    b = convex_hull_of_points(np.asarray(UNIT_SQUARE, dtype=float) + [0.1, 0.0])
    assert hausdorff_distance(a, b) == pytest.approx(0.1)
    assert hausdorff_distance(a, a) == 0.0


def test_hausdorff_distance_with_empty_hulls():
    square = convex_hull_of_points(UNIT_SQUARE)
    assert hausdorff_distance(HullPolygon.empty(), HullPolygon.empty()) == 0.0
    assert hausdorff_distance(square, HullPolygon.empty()) == math.inf


def test_distance_is_zero_inside_and_positive_outside():
    square = convex_hull_of_points(UNIT_SQUARE)
    d = square.distance([[0.5, 0.5], [2.0, 0.5], [2.0, 2.0]])
    assert d[0] == 0.0
    assert d[1] == pytest.approx(1.0)
    assert d[2] == pytest.approx(math.sqrt(2.0))

"""Domains and structured meshes."""

import math

import numpy as np
import pytest

from pconduct.errors import GeometryError
from pconduct.geometry import DomainSpec, build_mesh


# ==========================================
# Domains
# ==========================================
def test_unit_square_support_and_extent():
    square = DomainSpec.unit_square()
    assert square.support((1.0, 0.0)) == 1.0
    assert square.support((-1.0, 0.0)) == 0.0
    assert square.extent((0.0, 1.0)) == 1.0
    assert square.diameter == pytest.approx(math.sqrt(2.0))
    assert np.allclose(square.centroid, [0.5, 0.5])


def test_disk_support_is_radius_in_every_direction():
    disk = DomainSpec.disk((1.0, -1.0), 2.0)
    for angle in np.linspace(0.0, 2.0 * math.pi, 7):
        rho = np.array([math.cos(angle), math.sin(angle)])
        assert disk.support(rho) == pytest.approx(rho @ [1.0, -1.0] + 2.0)
    assert disk.bounding_box() == (-1.0, -3.0, 3.0, 1.0)


def test_polygon_contains_closed_set():
    triangle = DomainSpec.polygon([(0, 0), (1, 0), (0, 1)])
    inside = triangle.contains([[0.2, 0.2], [0.5, 0.5], [0.6, 0.6]])
    assert inside.tolist() == [True, True, False]


@pytest.mark.parametrize(
    "vertices",
    [
        [(0, 0), (0, 1), (1, 0)],  # clockwise
        [(0, 0), (0.5, 0), (1, 0), (0, 1)],  # collinear corner
        [(0, 0), (1, 0)],  # too few
        [(math.cos(a), math.sin(a)) for a in math.pi / 2 + 4 * math.pi * np.arange(5) / 5],  # pentagram
    ],
)
def test_polygon_rejects_invalid_outlines(vertices):
    with pytest.raises(GeometryError):
        DomainSpec.polygon(vertices)


def test_self_intersecting_outline_is_named():
    star = [(math.cos(a), math.sin(a)) for a in math.pi / 2 + 4 * math.pi * np.arange(5) / 5]
    with pytest.raises(GeometryError, match="turns 2 times around"):
        DomainSpec.polygon(star)


def test_disk_rejects_nonpositive_radius():
    with pytest.raises(GeometryError, match="radius must be positive"):
        DomainSpec.disk(radius=0.0)


# ==========================================
# Meshes
# ==========================================
@pytest.mark.parametrize(
    "domain",
    [
        DomainSpec.unit_square(),
        DomainSpec.disk((0.0, 0.0), 1.0),
        DomainSpec.polygon([(0, 0), (2, 0), (2.5, 1), (0.5, 1.5)]),
    ],
    ids=["square", "disk", "quad"],
)
def test_mesh_is_a_conforming_triangulation(domain):
    mesh = build_mesh(domain, 12)
    assert np.all(mesh.areas > 0)
    # Euler's formula for a triangulated disk
    assert mesh.n_cells == 2 * mesh.n_vertices - len(mesh.boundary_vertices) - 2
    assert mesh.polygon_area() == pytest.approx(mesh.areas.sum())
    assert np.all(domain.contains(mesh.vertices, tol=1e-9))


def test_square_mesh_counts():
    mesh = build_mesh(DomainSpec.unit_square(), 4)
    assert mesh.n_vertices == 25
    assert mesh.n_cells == 32
    assert len(mesh.boundary_vertices) == 16
    assert mesh.areas.sum() == pytest.approx(1.0)
    assert mesh.cell_width == pytest.approx(0.25)


def test_boundary_loop_runs_counterclockwise(disk_mesh):
    assert disk_mesh.polygon_area() > 0
    assert sorted(disk_mesh.boundary_loop) == list(disk_mesh.boundary_vertices)
    radii = np.linalg.norm(disk_mesh.boundary_points(), axis=1)
    assert np.allclose(radii, 1.0)


def test_gradients_are_exact_for_linear_fields(square_mesh):
    u = 3.0 * square_mesh.vertices[:, 0] - 2.0 * square_mesh.vertices[:, 1] + 1.0
    grads = square_mesh.cell_gradients(u)
    assert np.allclose(grads, [3.0, -2.0])


def test_mesh_is_deterministic():
    a = build_mesh(DomainSpec.disk(), 10)
    b = build_mesh(DomainSpec.disk(), 10)
    assert a.mesh_id == b.mesh_id
    assert a.mesh_id != build_mesh(DomainSpec.disk(), 12).mesh_id


@pytest.mark.parametrize("resolution", [1, 0, 2.5])
def test_mesh_rejects_bad_resolution(resolution):
    with pytest.raises(GeometryError, match="resolution"):
        build_mesh(DomainSpec.unit_square(), resolution)

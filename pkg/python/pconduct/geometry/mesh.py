"""Structured triangulations of the supported domains.

The square is split into a grid with two triangles per cell. Disks and
convex polygons are meshed with homothetic rings around the centre that are
stitched together by merging the two rings in angular order.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from pconduct.errors import GeometryError
from pconduct.geometry.domains import DomainSpec

__all__ = ["TriMesh", "build_mesh"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TriMesh:
    """A conforming triangle mesh with piecewise-linear vertex fields.

    ``boundary_loop`` lists the boundary vertices counterclockwise.
    Boundary traces are stored in ``boundary_vertices`` order, which is the
    sorted index order, not the loop order.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray
    boundary_loop: np.ndarray
    domain: DomainSpec
    resolution: int

    @cached_property
    def areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def gradients(self) -> np.ndarray:
        """(m, 2, 3) operator mapping vertex values of a cell to its gradient."""
        p = self.vertices[self.triangles]
        x, y = p[..., 0], p[..., 1]
        twice_area = 2.0 * self.areas
        gx = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
        gy = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
        return np.stack([gx, gy], axis=1) / twice_area[:, None, None]

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        return np.flatnonzero(self.boundary)

    @cached_property
    def interior_vertices(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    @cached_property
    def cell_diameters(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d01 = np.linalg.norm(p[:, 0] - p[:, 1], axis=1)
        d12 = np.linalg.norm(p[:, 1] - p[:, 2], axis=1)
        d20 = np.linalg.norm(p[:, 2] - p[:, 0], axis=1)
        return np.maximum(np.maximum(d01, d12), d20)

    @property
    def h_max(self) -> float:
        return float(self.cell_diameters.max())

    @property
    def cell_width(self) -> float:
        """Nominal grid spacing, the unit for resolution tolerances."""
        return self.domain.diameter / self.resolution if self.domain.is_disk else (
            float(np.ptp(self.domain.outline(), axis=0).max()) / self.resolution
        )

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_cells(self) -> int:
        return len(self.triangles)

    @cached_property
    def mesh_id(self) -> str:
        digest = hashlib.sha1()
        digest.update(np.ascontiguousarray(self.vertices, dtype=np.float64).tobytes())
        digest.update(np.ascontiguousarray(self.triangles, dtype=np.int64).tobytes())
        return digest.hexdigest()[:16]

    def polygon_area(self) -> float:
        """Shoelace area of the boundary loop."""
        loop = self.vertices[self.boundary_loop]
        x, y = loop[:, 0], loop[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def boundary_points(self) -> np.ndarray:
        return self.vertices[self.boundary_vertices]

    def cell_gradients(self, values: np.ndarray) -> np.ndarray:
        """Constant gradient of the linear interpolant on every cell, (m, 2)."""
        return np.einsum("mij,mj->mi", self.gradients, values[self.triangles])


def build_mesh(domain: DomainSpec, resolution: int) -> TriMesh:
    """Triangulate ``domain`` with ``resolution`` cells per side.

    The result is deterministic for fixed inputs.

    Example:
        >>> mesh = build_mesh(DomainSpec.unit_square(), 2)
        >>> mesh.n_cells
        8
    """
    if int(resolution) != resolution or resolution < 2:
        raise GeometryError(
            f"Mesh resolution must be an integer of at least 2.\n\n"
            f"  You wrote:\n    resolution = {resolution}\n\n"
            "  Use a finer grid, e.g.:\n    resolution = 32"
        )
    resolution = int(resolution)

    if domain.kind == "unit-square":
        vertices, triangles, loop = _square_grid(resolution)
    elif domain.kind == "disk":
        vertices, triangles, loop = _disk_rings(domain, resolution)
    else:
        vertices, triangles, loop = _polygon_rings(domain, resolution)

    boundary = np.zeros(len(vertices), dtype=bool)
    boundary[loop] = True
    mesh = TriMesh(
        vertices=vertices,
        triangles=triangles,
        boundary=boundary,
        boundary_loop=loop,
        domain=domain,
        resolution=resolution,
    )
    if np.any(mesh.areas <= 0):
        raise GeometryError(
            f"Meshing {domain.kind} produced degenerate cells. "
            "Check that the polygon is strictly convex and not too thin."
        )
    logger.debug(
        "built %s mesh: %d vertices, %d cells, h_max=%.4g",
        domain.kind,
        mesh.n_vertices,
        mesh.n_cells,
        mesh.h_max,
    )
    return mesh


def _square_grid(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    ticks = np.linspace(0.0, 1.0, n + 1)
    xx, yy = np.meshgrid(ticks, ticks)
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    idx = np.arange((n + 1) ** 2).reshape(n + 1, n + 1)
    v00 = idx[:-1, :-1].ravel()
    v10 = idx[:-1, 1:].ravel()
    v01 = idx[1:, :-1].ravel()
    v11 = idx[1:, 1:].ravel()
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    triangles = np.stack([lower, upper], axis=1).reshape(-1, 3)

    loop = np.concatenate(
        [
            idx[0, :-1],
            idx[:-1, -1],
            idx[-1, :0:-1],
            idx[:0:-1, 0],
        ]
    )
    return vertices, triangles, loop


def _disk_rings(domain: DomainSpec, resolution: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rings = max(1, resolution // 2)
    center = np.asarray(domain.center, dtype=float)
    points = [center[None, :]]
    params: list[np.ndarray] = [np.zeros(1)]
    for k in range(1, rings + 1):
        count = 6 * k
        frac = np.arange(count) / count
        angle = 2.0 * np.pi * frac
        radius = domain.radius * k / rings
        ring = center + radius * np.column_stack([np.cos(angle), np.sin(angle)])
        points.append(ring)
        params.append(frac)
    return _stitch(points, params)


def _polygon_rings(domain: DomainSpec, resolution: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rings = max(1, resolution // 2)
    outline = domain.outline()
    center = domain.centroid
    edges = np.roll(outline, -1, axis=0) - outline
    lengths = np.linalg.norm(edges, axis=1)
    segments_outer = np.maximum(1, np.ceil(lengths * resolution / domain.diameter)).astype(int)

    points = [center[None, :]]
    params: list[np.ndarray] = [np.zeros(1)]
    perimeter = lengths.sum()
    start = np.concatenate([[0.0], np.cumsum(lengths)[:-1]]) / perimeter
    for k in range(1, rings + 1):
        ring_pts = []
        ring_frac = []
        for e in range(len(outline)):
            count = max(1, int(np.ceil(segments_outer[e] * k / rings)))
            s = np.arange(count) / count
            ring_pts.append(outline[e] + s[:, None] * edges[e])
            ring_frac.append(start[e] + s * lengths[e] / perimeter)
        ring = np.concatenate(ring_pts)
        points.append(center + (k / rings) * (ring - center))
        params.append(np.concatenate(ring_frac))
    return _stitch(points, params)


def _stitch(points: list[np.ndarray], params: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Merge consecutive rings into triangles.

    ``params`` holds, per ring, the increasing fraction of a full turn at
    which each point sits. Rings share the starting direction.
    """
    offsets = np.cumsum([0] + [len(p) for p in points])
    triangles: list[tuple[int, int, int]] = []

    for k in range(1, len(points)):
        inner = np.arange(offsets[k - 1], offsets[k])
        outer = np.arange(offsets[k], offsets[k + 1])
        a_frac = params[k - 1]
        b_frac = params[k]
        a, b = len(inner), len(outer)

        if a == 1:
            for j in range(b):
                triangles.append((inner[0], outer[j], outer[(j + 1) % b]))
            continue

        i = j = 0
        while i < a or j < b:
            next_a = a_frac[i + 1] if i + 1 < a else 1.0
            next_b = b_frac[j + 1] if j + 1 < b else 1.0
            if j < b and (i >= a or next_b <= next_a):
                triangles.append((inner[i % a], outer[j], outer[(j + 1) % b]))
                j += 1
            else:
                triangles.append((inner[i % a], outer[j % b], inner[(i + 1) % a]))
                i += 1

    vertices = np.concatenate(points)
    loop = np.arange(offsets[-2], offsets[-1])
    return vertices, np.asarray(triangles, dtype=np.int64), loop

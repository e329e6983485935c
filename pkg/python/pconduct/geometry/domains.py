"""Bounded convex domains in the plane."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from pconduct.errors import GeometryError

__all__ = ["DomainSpec", "DomainKind"]

DomainKind = Literal["unit-square", "disk", "convex-polygon"]

_UNIT_SQUARE = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))


@dataclass(frozen=True)
class DomainSpec:
    """The region being probed.

    Build one with :meth:`unit_square`, :meth:`disk` or :meth:`polygon`
    rather than calling the constructor directly.
    """

    kind: DomainKind
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0
    vertices: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind == "unit-square":
            object.__setattr__(self, "vertices", _UNIT_SQUARE)
        elif self.kind == "disk":
            if not self.radius > 0:
                raise GeometryError(
                    f"Disk radius must be positive.\n\n  You wrote:\n    radius = {self.radius}\n\n"
                    "  Use a positive radius, e.g.:\n    radius = 1.0"
                )
        elif self.kind == "convex-polygon":
            _check_convex_ccw(self.vertices)
        else:
            raise GeometryError(
                f"Unknown domain kind {self.kind!r}. "
                "Use one of: 'unit-square', 'disk', 'convex-polygon'."
            )

    @classmethod
    def unit_square(cls) -> DomainSpec:
        return cls("unit-square")

    @classmethod
    def disk(cls, center: tuple[float, float] = (0.0, 0.0), radius: float = 1.0) -> DomainSpec:
        return cls("disk", center=(float(center[0]), float(center[1])), radius=float(radius))

    @classmethod
    def polygon(cls, vertices) -> DomainSpec:
        verts = tuple((float(x), float(y)) for x, y in vertices)
        return cls("convex-polygon", vertices=verts)

    @property
    def is_disk(self) -> bool:
        return self.kind == "disk"

    def outline(self) -> np.ndarray:
        """Corner vertices, counterclockwise. Empty for a disk."""
        return np.asarray(self.vertices, dtype=float).reshape(-1, 2)

    def support(self, rho) -> float:
        """max over the closed domain of x·rho."""
        rho = np.asarray(rho, dtype=float)
        if self.is_disk:
            return float(np.dot(self.center, rho) + self.radius * np.linalg.norm(rho))
        return float(np.max(self.outline() @ rho))

    def extent(self, rho) -> float:
        """Width of the domain measured along rho."""
        rho = np.asarray(rho, dtype=float)
        return self.support(rho) + self.support(-rho)

    def bounding_box(self) -> tuple[float, float, float, float]:
        if self.is_disk:
            cx, cy = self.center
            r = self.radius
            return cx - r, cy - r, cx + r, cy + r
        pts = self.outline()
        return (*pts.min(axis=0), *pts.max(axis=0))

    @property
    def diameter(self) -> float:
        if self.is_disk:
            return 2.0 * self.radius
        pts = self.outline()
        diffs = pts[:, None, :] - pts[None, :, :]
        return float(np.sqrt((diffs**2).sum(axis=-1)).max())

    @property
    def centroid(self) -> np.ndarray:
        if self.is_disk:
            return np.asarray(self.center, dtype=float)
        pts = self.outline()
        x, y = pts[:, 0], pts[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        cross = x * yn - xn * y
        area = cross.sum() / 2.0
        cx = ((x + xn) * cross).sum() / (6.0 * area)
        cy = ((y + yn) * cross).sum() / (6.0 * area)
        return np.array([cx, cy])

    def contains(self, points, tol: float = 1e-12) -> np.ndarray:
        """Closed-domain membership test for an (n, 2) array of points."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.is_disk:
            d = np.linalg.norm(pts - np.asarray(self.center), axis=1)
            return d <= self.radius + tol
        outline = self.outline()
        edges = np.roll(outline, -1, axis=0) - outline
        rel = pts[:, None, :] - outline[None, :, :]
        cross = edges[None, :, 0] * rel[:, :, 1] - edges[None, :, 1] * rel[:, :, 0]
        return np.all(cross >= -tol, axis=1)


def _check_convex_ccw(vertices) -> None:
    pts = np.asarray(vertices, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise GeometryError(
            "A convex polygon needs at least three (x, y) vertices.\n\n"
            f"  You wrote:\n    vertices = {list(map(tuple, np.atleast_2d(pts)))}\n\n"
            "  List the corners counterclockwise, e.g.:\n"
            "    vertices = [[0, 0], [1, 0], [0.5, 1]]"
        )
    edges = np.roll(pts, -1, axis=0) - pts
    nxt = np.roll(edges, -1, axis=0)
    cross = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
    scale = float(np.abs(edges).max()) ** 2
    if np.any(cross <= 1e-12 * scale):
        raise GeometryError(
            "Polygon vertices must be strictly convex and counterclockwise.\n\n"
            f"  You wrote:\n    vertices = {[tuple(v) for v in pts]}\n\n"
            "  Remove collinear or reflex corners, or reverse the vertex order "
            "if it runs clockwise."
        )
    turning = float(np.arctan2(cross, np.einsum("ij,ij->i", edges, nxt)).sum())
    if abs(turning - 2.0 * np.pi) > 1e-9:
        raise GeometryError(
            f"Polygon outline turns {turning / (2.0 * np.pi):.0f} times around; "
            "a convex outline turns once.\n\n"
            f"  You wrote:\n    vertices = {[tuple(v) for v in pts]}\n\n"
            "  List the corners in order around the boundary, without crossing edges."
        )

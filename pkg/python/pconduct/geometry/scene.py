"""Cellwise conductivities painted onto a mesh."""

from __future__ import annotations

from collections.abc import Callable, Iterable
from dataclasses import dataclass
from enum import Enum
from typing import Protocol

import numpy as np

from pconduct.errors import ConfigError
from pconduct.geometry.mesh import TriMesh

__all__ = [
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
]


class SignClass(str, Enum):
    GEQ1 = "geq1"
    LEQ1 = "leq1"
    HOMOGENEOUS = "homogeneous"


class Shape(Protocol):
    """An inclusion shape. ``contains`` takes an (n, 2) array of points."""

    def contains(self, points: np.ndarray) -> np.ndarray: ...

    def support(self, rho) -> float: ...


@dataclass(frozen=True)
class Disk:
    center: tuple[float, float]
    radius: float

    def contains(self, points: np.ndarray) -> np.ndarray:
        return np.linalg.norm(points - np.asarray(self.center), axis=1) <= self.radius

    def support(self, rho) -> float:
        rho = np.asarray(rho, dtype=float)
        return float(np.dot(self.center, rho) + self.radius)


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle from ``lower`` to ``upper`` corner."""

    lower: tuple[float, float]
    upper: tuple[float, float]

    def contains(self, points: np.ndarray) -> np.ndarray:
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        return np.all((points >= lo) & (points <= hi), axis=1)

    def corners(self) -> np.ndarray:
        (x0, y0), (x1, y1) = self.lower, self.upper
        return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)

    def support(self, rho) -> float:
        return float(np.max(self.corners() @ np.asarray(rho, dtype=float)))


@dataclass(frozen=True)
class Polygon:
    """Convex polygon, vertices counterclockwise."""

    vertices: tuple[tuple[float, float], ...]

    def contains(self, points: np.ndarray) -> np.ndarray:
        outline = np.asarray(self.vertices, dtype=float)
        edges = np.roll(outline, -1, axis=0) - outline
        rel = points[:, None, :] - outline[None, :, :]
        cross = edges[None, :, 0] * rel[:, :, 1] - edges[None, :, 1] * rel[:, :, 0]
        return np.all(cross >= 0.0, axis=1)

    def support(self, rho) -> float:
        return float(np.max(np.asarray(self.vertices, dtype=float) @ np.asarray(rho, dtype=float)))


@dataclass(frozen=True, eq=False)
class ConductivityScene:
    """Ground truth: a positive conductivity per cell and the exponent p.

    ``sign_class`` is validated against ``sigma`` on construction.
    """

    mesh: TriMesh
    sigma: np.ndarray
    p: float
    sign_class: SignClass

    def __post_init__(self) -> None:
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.shape != (self.mesh.n_cells,):
            raise ConfigError(
                f"Conductivity needs one value per cell: expected {self.mesh.n_cells}, "
                f"got {sigma.shape}."
            )
        if not np.all(np.isfinite(sigma)) or sigma.min() <= 0:
            raise ConfigError(
                "Conductivity must be finite and strictly positive on every cell.\n\n"
                f"  Smallest value found:\n    {sigma.min()!r}\n\n"
                "  Give every inclusion a sigma greater than 0."
            )
        if not 1 < self.p < np.inf:
            raise ConfigError(f"Exponent p must lie in (1, inf), got p = {self.p}.")
        sign_class = SignClass(self.sign_class)
        ok = {
            SignClass.GEQ1: bool(np.all(sigma >= 1.0)),
            SignClass.LEQ1: bool(np.all(sigma <= 1.0)),
            SignClass.HOMOGENEOUS: bool(np.all(sigma == 1.0)),
        }[sign_class]
        if not ok:
            raise ConfigError(
                f"Declared sign class {sign_class.value!r} does not match sigma "
                f"(min {sigma.min():g}, max {sigma.max():g}). "
                "Let paint_scene infer the sign class instead."
            )
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "sign_class", sign_class)

    @property
    def is_homogeneous(self) -> bool:
        return self.sign_class is SignClass.HOMOGENEOUS


def infer_sign_class(sigma: np.ndarray) -> SignClass:
    """Classify sigma relative to the background value 1.

    Raises ConfigError when cells lie on both sides of 1.
    """
    sigma = np.asarray(sigma, dtype=float)
    above = bool(np.any(sigma > 1.0))
    below = bool(np.any(sigma < 1.0))
    if above and below:
        raise ConfigError(
            "Conductivity must stay on one side of the background value 1.\n\n"
            f"  Found cells with sigma = {sigma.min():g} and sigma = {sigma.max():g}.\n\n"
            "  Make every inclusion either more conductive (sigma >= 1) "
            "or less conductive (sigma <= 1)."
        )
    if above:
        return SignClass.GEQ1
    if below:
        return SignClass.LEQ1
    return SignClass.HOMOGENEOUS


def paint_scene(
    mesh: TriMesh,
    inclusions: Iterable[tuple[Shape, float]] = (),
    p: float = 2.0,
    background: float = 1.0,
) -> ConductivityScene:
    """Assign sigma per cell by centroid membership.

    Later inclusions overwrite earlier ones where they overlap.

    Example:
        >>> scene = paint_scene(mesh, [(Disk((0.5, 0.5), 0.2), 2.0)], p=3)
        >>> scene.sign_class
        <SignClass.GEQ1: 'geq1'>
    """
    sigma = np.full(mesh.n_cells, float(background))
    centroids = mesh.centroids
    for shape, value in inclusions:
        if not value > 0:
            raise ConfigError(
                f"Inclusion conductivity must be positive, got sigma = {value}."
            )
        sigma[shape.contains(centroids)] = float(value)
    return ConductivityScene(mesh, sigma, float(p), infer_sign_class(sigma))


def scene_from_function(
    mesh: TriMesh,
    sigma_fn: Callable[[np.ndarray], np.ndarray],
    p: float,
) -> ConductivityScene:
    """Sample a conductivity function at cell centroids."""
    sigma = np.asarray(sigma_fn(mesh.centroids), dtype=float)
    if sigma.ndim == 0:
        sigma = np.full(mesh.n_cells, float(sigma))
    return ConductivityScene(mesh, sigma, float(p), infer_sign_class(sigma))


def discrete_support_set(scene: ConductivityScene, threshold: float = 1e-9) -> np.ndarray:
    """Indices of cells with |sigma - 1| > threshold, sorted."""
    if threshold < 0:
        raise ConfigError(f"Support threshold must be non-negative, got {threshold}.")
    return np.flatnonzero(np.abs(scene.sigma - 1.0) > threshold)

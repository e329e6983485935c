"""Typed structure of scene files, run configurations and project defaults."""

from __future__ import annotations

from typing import Literal

import msgspec
import numpy as np

from pconduct.errors import ConfigError
from pconduct.geometry.domains import DomainSpec
from pconduct.geometry.scene import Disk, Polygon, Rectangle

__all__ = [
    "DomainTable",
    "DiskInclusion",
    "RectangleInclusion",
    "PolygonInclusion",
    "InclusionSpec",
    "RadialProfile",
    "SolverTable",
    "SceneFile",
    "Defaults",
    "RunConfig",
    "Method",
]

Point = tuple[float, float]
Method = Literal["solve", "wolff", "enclosure", "monotonicity", "boundary", "compare"]


class DomainTable(msgspec.Struct, frozen=True, forbid_unknown_fields=True):
    kind: Literal["unit-square", "disk", "convex-polygon"] = "unit-square"
    center: Point = (0.0, 0.0)
    radius: float = 1.0
    vertices: tuple[Point, ...] = ()

    def to_domain(self) -> DomainSpec:
        if self.kind == "disk":
            return DomainSpec.disk(self.center, self.radius)
        if self.kind == "convex-polygon":
            return DomainSpec.polygon(self.vertices)
        return DomainSpec.unit_square()


# ==========================================
# Inclusions (tagged on `shape`)
# ==========================================
class DiskInclusion(msgspec.Struct, frozen=True, tag="disk", tag_field="shape", forbid_unknown_fields=True):
    center: Point
    radius: float
    sigma: float

    def to_shape(self) -> Disk:
        if not self.radius > 0:
            raise ConfigError(
                f"Disk inclusion radius must be positive.\n\n  You wrote:\n    radius = {self.radius}"
            )
        return Disk(self.center, self.radius)


class RectangleInclusion(
    msgspec.Struct, frozen=True, tag="rectangle", tag_field="shape", forbid_unknown_fields=True
):
    lower: Point
    upper: Point
    sigma: float

    def to_shape(self) -> Rectangle:
        if not (self.lower[0] < self.upper[0] and self.lower[1] < self.upper[1]):
            raise ConfigError(
                "Rectangle inclusion needs lower < upper in both coordinates.\n\n"
                f"  You wrote:\n    lower = {list(self.lower)}\n    upper = {list(self.upper)}"
            )
        return Rectangle(self.lower, self.upper)


class PolygonInclusion(
    msgspec.Struct, frozen=True, tag="polygon", tag_field="shape", forbid_unknown_fields=True
):
    vertices: tuple[Point, ...]
    sigma: float

    def to_shape(self) -> Polygon:
        if len(self.vertices) < 3:
            raise ConfigError(
                f"Polygon inclusion needs at least three vertices, got {len(self.vertices)}."
            )
        return Polygon(self.vertices)


InclusionSpec = DiskInclusion | RectangleInclusion | PolygonInclusion


class RadialProfile(msgspec.Struct, frozen=True, forbid_unknown_fields=True):
    """sigma(x) = base + slope * |x - center|^2."""

    base: float = 1.0
    slope: float = 0.5
    center: Point = (0.0, 0.0)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        offset = np.asarray(points, dtype=float) - np.asarray(self.center)
        return self.base + self.slope * np.einsum("ij,ij->i", offset, offset)


class SolverTable(msgspec.Struct, frozen=True, forbid_unknown_fields=True, rename="kebab"):
    epsilon: float | None = None
    max_iterations: int = 500
    tolerance: float = 1e-10


class SceneFile(msgspec.Struct, frozen=True, forbid_unknown_fields=True):
    """A scene: domain, mesh resolution, exponent and conductivity.

    Either ``inclusions`` (piecewise constant on a background) or
    ``profile`` (continuous) describes sigma, not both. An optional
    ``[defaults]`` table overrides project defaults for runs on this scene.
    """

    domain: DomainTable = msgspec.field(default_factory=DomainTable)
    resolution: int = 32
    p: float = 2.0
    background: float = 1.0
    inclusions: tuple[InclusionSpec, ...] = ()
    profile: RadialProfile | None = None
    solver: SolverTable = msgspec.field(default_factory=SolverTable)
    defaults: Defaults | None = None

    def __post_init__(self) -> None:
        if self.inclusions and self.profile is not None:
            raise ConfigError(
                "A scene uses either [[inclusions]] or [profile], not both.\n\n"
                "  Remove one of the two tables."
            )
        if not self.p > 1:
            raise ConfigError(f"Exponent p must exceed 1.\n\n  You wrote:\n    p = {self.p}")


# ==========================================
# Runs
# ==========================================
class Defaults(msgspec.Struct, frozen=True, kw_only=True, forbid_unknown_fields=True, rename="kebab"):
    """Project-level defaults from ``[tool.pconduct]`` in pyproject.toml."""

    out: str = "out"
    seed: int = 0
    directions: int = 16
    tau_schedule: tuple[float, ...] | None = None
    alpha_schedule: tuple[float, ...] = (0.125, 0.25, 0.5, 1.0)
    tolerance: float | None = None
    ball_stride: int = 2
    ball_radius: float = 2.0
    gamma_bracket: tuple[float, float] = (0.25, 4.0)
    workers: int | None = None
    svg: bool = False


class RunConfig(msgspec.Struct, frozen=True, kw_only=True, forbid_unknown_fields=True, rename="kebab"):
    """One pipeline run.

    ``tau_schedule`` holds multipliers of 1/extent(rho); ``ball_radius`` is
    in cell widths. ``points`` are boundary points for the boundary method.
    ``trace_file`` replaces the affine ``trace`` of the solve method with a
    boundary trace CSV (columns vertex, value and optionally log_scale).
    """

    method: Method
    scene: str | None = None
    out: str = "out"
    seed: int = 0
    p: float | None = None
    trace: Literal["x", "y", "xy"] = "x"
    trace_file: str | None = None
    directions: int = 16
    tau_schedule: tuple[float, ...] | None = None
    alpha_schedule: tuple[float, ...] = (0.125, 0.25, 0.5, 1.0)
    sign: Literal["plus", "minus", "auto"] = "auto"
    tolerance: float | None = None
    ball_stride: int = 2
    ball_radius: float = 2.0
    points: tuple[Point, ...] = ()
    gamma_bracket: tuple[float, float] = (0.25, 4.0)
    workers: int | None = None
    svg: bool = False

    def __post_init__(self) -> None:
        if self.method != "wolff" and self.scene is None:
            raise ConfigError(
                f"The {self.method!r} method needs a scene file.\n\n"
                "  Pass one, e.g.:\n    --scene scenes/disk.toml"
            )
        if self.method == "wolff" and self.scene is None and self.p is None:
            raise ConfigError("The 'wolff' method needs either --scene or --p.")
        if self.trace_file is not None and self.method != "solve":
            raise ConfigError(
                f"Only the 'solve' method reads a trace file, not {self.method!r}.\n\n"
                f"  You wrote:\n    trace-file = {self.trace_file!r}"
            )
        if self.tolerance is not None and not self.tolerance > 0:
            raise ConfigError(f"Tolerance must be positive.\n\n  You wrote:\n    tolerance = {self.tolerance}")
        if self.directions < 8:
            raise ConfigError(f"Use at least 8 directions, got {self.directions}.")
        if self.method == "boundary" and not self.points:
            raise ConfigError(
                "The 'boundary' method needs boundary points.\n\n"
                "  Pass some, e.g.:\n    --point 1 0 --point 0 1"
            )
        if any(not a > 0 for a in self.alpha_schedule):
            raise ConfigError(f"alpha-schedule entries must be positive, got {list(self.alpha_schedule)}.")
        if self.tau_schedule is not None and any(not t > 0 for t in self.tau_schedule):
            raise ConfigError(f"tau-schedule entries must be positive, got {list(self.tau_schedule)}.")

"""Inclusion detection by comparing DN operators against test regions.

A region B is *marked* when the measured operator dominates the background
plus a multiple of the region operator (or, for less conductive inclusions,
is dominated by the background minus one). Marked regions lie inside the
convex hull of the inclusion up to resolution effects; the hull of their
union is the reconstruction.

Comparisons only ever use self-pairings of dictionary traces. Those are
computed once per trace; every region then reads the same table.
"""

from __future__ import annotations

import logging
import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.sparse as sp

from pconduct.dnmap import MARGIN, DnOracle, Operator, RegionOperator, preorder_test, trace_id
from pconduct.errors import ConfigError
from pconduct.geometry.hull import HullPolygon, convex_hull_of_cells
from pconduct.geometry.mesh import TriMesh
from pconduct.geometry.scene import SignClass
from pconduct.psolver import BoundaryTrace

__all__ = [
    "TestRegion",
    "MonotonicityVerdict",
    "ScanResult",
    "GapTable",
    "DEFAULT_ALPHAS",
    "MARGIN",
    "alpha_tilde",
    "ball_region",
    "ball_grid",
    "test_region_plus",
    "test_region_minus",
    "scan",
]

logger = logging.getLogger(__name__)

DEFAULT_ALPHAS = (0.125, 0.25, 0.5, 1.0)

Direction = Literal["plus", "minus"]


def alpha_tilde(p: float, alpha: float) -> float:
    """(p - 1)(1 - (1 + alpha)^(-1/(p - 1))), always in (0, p - 1).

    Example:
        >>> alpha_tilde(2.0, 1.0)
        0.5
    """
    if not alpha > 0:
        raise ConfigError(f"Contrast alpha must be positive, got {alpha}.")
    if not p > 1:
        raise ConfigError(f"Exponent p must exceed 1, got {p}.")
    return (p - 1.0) * -math.expm1(-math.log1p(alpha) / (p - 1.0))


@dataclass(frozen=True, eq=False)
class TestRegion:
    """A set of cells B, usually a ball of cells around ``center``."""

    __test__ = False  # not a pytest class

    cells: np.ndarray
    center: tuple[float, float] = (math.nan, math.nan)
    radius: float = math.nan
    label: str = ""

    def __post_init__(self) -> None:
        cells = np.unique(np.asarray(self.cells, dtype=np.int64).ravel())
        if cells.size == 0:
            raise ConfigError(f"Test region {self.label or '<unnamed>'!r} contains no cells.")
        if cells[0] < 0:
            raise ConfigError(f"Test region {self.label!r} has negative cell indices.")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)


@dataclass(frozen=True)
class MonotonicityVerdict:
    region: TestRegion
    alpha: float
    direction: Direction
    marked: bool
    gap: float
    witness: str | None = None
    tied: bool = False

    def __post_init__(self) -> None:
        if not self.marked and self.witness is None:
            raise ConfigError("A rejected region must name its witness trace.")

    @property
    def result(self) -> str:
        return "marked" if self.marked else "rejected"


@dataclass(frozen=True)
class ScanResult:
    verdicts: tuple[MonotonicityVerdict, ...]
    hull: HullPolygon
    sign_class: SignClass
    direction: Direction | None
    marked_cells: np.ndarray = field(repr=False)

    @property
    def marked(self) -> list[MonotonicityVerdict]:
        return [v for v in self.verdicts if v.marked]


# ==========================================
# Test regions
# ==========================================
def ball_region(mesh: TriMesh, center, radius: float, label: str = "") -> TestRegion:
    """Cells whose centroid lies within ``radius`` of ``center``."""
    center = np.asarray(center, dtype=float)
    inside = np.linalg.norm(mesh.centroids - center, axis=1) <= radius
    return TestRegion(np.flatnonzero(inside), (float(center[0]), float(center[1])), float(radius), label)


def ball_grid(mesh: TriMesh, stride: int = 2, radius: float | None = None) -> list[TestRegion]:
    """Balls on a lattice with spacing ``stride`` cell widths, clipped to the domain.

    ``radius`` defaults to two cell widths.
    """
    if stride < 1:
        raise ConfigError(f"Ball-grid stride must be at least 1, got {stride}.")
    width = mesh.cell_width
    radius = 2.0 * width if radius is None else float(radius)
    if not radius > 0:
        raise ConfigError(f"Ball radius must be positive, got {radius}.")
    x0, y0, x1, y1 = mesh.domain.bounding_box()
    spacing = stride * width
    xs = np.arange(x0 + 0.5 * spacing, x1, spacing)
    ys = np.arange(y0 + 0.5 * spacing, y1, spacing)
    centers = np.array([(x, y) for y in ys for x in xs])
    centers = centers[mesh.domain.contains(centers)]

    regions = []
    for i, c in enumerate(centers):
        inside = np.linalg.norm(mesh.centroids - c, axis=1) <= radius
        if inside.any():
            regions.append(TestRegion(np.flatnonzero(inside), (float(c[0]), float(c[1])), radius, f"ball-{i:04d}"))
    logger.debug("ball grid: %d balls of radius %.4g", len(regions), radius)
    return regions


# ==========================================
# Single-region tests
# ==========================================
def _verdict(region, alpha, direction, result, margin) -> MonotonicityVerdict:
    return MonotonicityVerdict(
        region=region,
        alpha=float(alpha),
        direction=direction,
        marked=result.consistent,
        gap=result.gap,
        witness=result.witness,
        tied=result.consistent and abs(result.gap) <= margin,
    )


def test_region_plus(
    oracle_sigma: Operator,
    oracle_one: DnOracle,
    region: TestRegion,
    alpha: float,
    dictionary: Sequence[BoundaryTrace],
    margin: float = MARGIN,
) -> MonotonicityVerdict:
    """Mark B when Lambda_sigma >= Lambda_1 + alpha_tilde * Lambda_B over the dictionary."""
    coeff = alpha_tilde(oracle_one.p, alpha)
    rhs = oracle_one + coeff * RegionOperator(oracle_one, region.cells)
    result = preorder_test(oracle_sigma, rhs, dictionary, margin, reference=oracle_one)
    return _verdict(region, alpha, "plus", result, margin)


def test_region_minus(
    oracle_sigma: Operator,
    oracle_one: DnOracle,
    region: TestRegion,
    alpha: float,
    dictionary: Sequence[BoundaryTrace],
    margin: float = MARGIN,
) -> MonotonicityVerdict:
    """Mark B when Lambda_1 - alpha * Lambda_B >= Lambda_sigma over the dictionary."""
    if not alpha > 0:
        raise ConfigError(f"Contrast alpha must be positive, got {alpha}.")
    rhs = oracle_sigma + float(alpha) * RegionOperator(oracle_one, region.cells)
    result = preorder_test(oracle_one, rhs, dictionary, margin, reference=oracle_one)
    return _verdict(region, alpha, "minus", result, margin)


test_region_plus.__test__ = test_region_minus.__test__ = False  # type: ignore[attr-defined]


# ==========================================
# Scanning
# ==========================================
class GapTable:
    """Relative deficits and region-operator values for a whole dictionary.

    Rows are distinct traces (by fingerprint), normalized by the background
    self-pairing. ``region_values`` returns <Lambda_B f, f> / scale(f) for a
    batch of regions as one sparse product.
    """

    def __init__(self, oracle_sigma: Operator, oracle_one: DnOracle, dictionary: Sequence[BoundaryTrace]):
        if not dictionary:
            raise ConfigError("The trace dictionary is empty; build one with default_dictionary().")
        seen: dict[str, BoundaryTrace] = {}
        for f in dictionary:
            seen.setdefault(f.fingerprint, f)
        self.traces = list(seen.values())
        self.mesh = oracle_one.mesh
        self.p = oracle_one.p

        scale = np.array([abs(oracle_one.pair(f).value) for f in self.traces])
        diff = np.array([oracle_sigma.pair(f).value for f in self.traces]) - np.array(
            [oracle_one.pair(f).value for f in self.traces]
        )
        scale = np.where(scale > 0, scale, 1.0)
        self.ids = [trace_id(f) for f in self.traces]
        self.deficit = diff / scale
        self.density = np.vstack([oracle_one.cell_density(f) for f in self.traces]) / scale[:, None]

    def region_values(self, regions: Sequence[TestRegion]) -> np.ndarray:
        """(n_traces, n_regions) matrix of relative Lambda_B self-pairings."""
        rows = np.concatenate([r.cells for r in regions])
        cols = np.repeat(np.arange(len(regions)), [len(r.cells) for r in regions])
        indicator = sp.csc_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(self.mesh.n_cells, len(regions))
        )
        return np.asarray((indicator.T @ self.density.T).T)

    def gaps(self, region_values: np.ndarray, alpha: float, direction: Direction) -> np.ndarray:
        if direction == "plus":
            return self.deficit[:, None] - alpha_tilde(self.p, alpha) * region_values
        return -self.deficit[:, None] - alpha * region_values


def scan(
    oracle_sigma: Operator,
    oracle_one: DnOracle,
    regions: Sequence[TestRegion],
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    dictionary: Sequence[BoundaryTrace] = (),
    sign: Literal["plus", "minus", "auto"] = "auto",
    margin: float = MARGIN,
) -> ScanResult:
    """Test every region for every alpha and hull the union of marked regions.

    A region is marked when any alpha marks it; its verdict records the
    smallest such alpha, or the smallest alpha's rejection witness. With
    ``sign="auto"`` the plus tests run first and the minus tests only if
    nothing was marked; the direction that marked something decides the
    sign class.
    """
    if not regions:
        raise ConfigError("The region grid is empty; build one with ball_grid().")
    if not alphas:
        raise ConfigError("The alpha-schedule is empty; e.g. use 0.125, 0.25, 0.5, 1.")
    if sign not in ("plus", "minus", "auto"):
        raise ConfigError(f"sign must be 'plus', 'minus' or 'auto', got {sign!r}.")
    alphas = sorted(float(a) for a in alphas)
    table = GapTable(oracle_sigma, oracle_one, dictionary)
    values = table.region_values(regions)

    def run(direction: Direction) -> list[MonotonicityVerdict]:
        verdicts: list[MonotonicityVerdict | None] = [None] * len(regions)
        for alpha in reversed(alphas):
            gaps = table.gaps(values, alpha, direction)
            worst = gaps.argmin(axis=0)
            for j, region in enumerate(regions):
                gap = float(gaps[worst[j], j])
                marked = gap >= -margin
                if marked or verdicts[j] is None or not verdicts[j].marked:
                    verdicts[j] = MonotonicityVerdict(
                        region=region,
                        alpha=alpha,
                        direction=direction,
                        marked=marked,
                        gap=gap,
                        witness=None if marked else table.ids[worst[j]],
                        tied=marked and abs(gap) <= margin,
                    )
        return verdicts

    directions: list[Direction] = ["plus", "minus"] if sign == "auto" else [sign]
    verdicts: list[MonotonicityVerdict] = []
    chosen: Direction | None = None
    for direction in directions:
        verdicts = run(direction)
        if any(v.marked for v in verdicts):
            chosen = direction
            break

    marked = [v for v in verdicts if v.marked]
    logger.info("scan: %d of %d regions marked (%s)", len(marked), len(regions), chosen or "none")
    ties = sum(v.tied for v in marked)
    if ties:
        warnings.warn(
            f"{ties} marked regions sit within the margin of the decision boundary; "
            "they are resolution-limited and may straddle the inclusion hull.",
            stacklevel=2,
        )
    if not marked:
        return ScanResult(tuple(verdicts), HullPolygon.empty(), SignClass.HOMOGENEOUS, None, np.empty(0, np.int64))

    cells = np.unique(np.concatenate([v.region.cells for v in marked]))
    hull = convex_hull_of_cells(oracle_one.mesh, cells)
    sign_class = SignClass.GEQ1 if chosen == "plus" else SignClass.LEQ1
    return ScanResult(tuple(verdicts), hull, sign_class, chosen, cells)

"""Boundary values of sigma on convex domains.

At a boundary point x0 with supporting direction rho, a Wolff probe
concentrates in the cap {x.rho > t} next to x0. Compared against a constant
conductivity gamma, the indicator blows up with the sign of sigma(x0) - gamma,
so bisection on gamma recovers sigma(x0).

The probe traces depend on (rho, tau) only: every gamma reuses the same
forward solves.
"""

from __future__ import annotations

import logging
import warnings
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from pconduct.dnmap import DnOracle, Operator
from pconduct.enclosure import (
    DEFAULT_TAU_MULTIPLIERS,
    NOISE_FLOOR,
    SLOPE_THRESHOLD,
    TAU_POWER,
    Classification,
    IndicatorCurve,
    IndicatorQuery,
    IndicatorValue,
    classify_curve,
    fit_slope,
    indicator,
    indicator_curve,
    tau_schedule,
)
from pconduct.errors import ConfigError, GeometryError, InconclusiveError
from pconduct.geometry.domains import DomainSpec
from pconduct.geometry.mesh import TriMesh
from pconduct.wolff import WolffSolution

__all__ = [
    "BoundaryQuery",
    "GammaStep",
    "BoundaryEstimate",
    "DEFAULT_GAMMA_BRACKET",
    "PROBE_OFFSET",
    "supporting_direction",
    "boundary_query",
    "indicator_gamma",
    "classify_gamma",
    "recover_boundary_value",
    "recover_boundary",
]

logger = logging.getLogger(__name__)

DEFAULT_GAMMA_BRACKET = (0.25, 4.0)
PROBE_OFFSET = 0.05  # fraction of the domain diameter
MAX_WIDENINGS = 10
_ON_BOUNDARY = 1e-9


def supporting_direction(domain: DomainSpec, x0) -> np.ndarray:
    """Outward unit direction rho with rho.x0 = max over the domain of rho.x.

    For a polygon, ``x0`` must be a corner; rho bisects the two adjacent
    edge normals.

    Example:
        >>> supporting_direction(DomainSpec.disk(), (1.0, 0.0))
        array([1., 0.])
    """
    x0 = np.asarray(x0, dtype=float).reshape(2)
    if domain.is_disk:
        offset = x0 - np.asarray(domain.center)
        r = float(np.hypot(*offset))
        if abs(r - domain.radius) > _ON_BOUNDARY * domain.radius:
            raise GeometryError(
                f"Point ({x0[0]:g}, {x0[1]:g}) is not on the disk boundary "
                f"(distance {r:.6g} from the center, radius {domain.radius:g}).\n\n"
                "  Pick a point at exactly one radius from the center."
            )
        return offset / r

    outline = domain.outline()
    scale = domain.diameter
    corner = np.flatnonzero(np.linalg.norm(outline - x0, axis=1) <= _ON_BOUNDARY * scale)
    if corner.size:
        i = int(corner[0])
        before = outline[i] - outline[i - 1]
        after = outline[(i + 1) % len(outline)] - outline[i]
        # outward normals of a counterclockwise polygon
        normals = np.array([[before[1], -before[0]], [after[1], -after[0]]])
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        rho = normals.sum(axis=0)
        return rho / np.linalg.norm(rho)

    edges = np.roll(outline, -1, axis=0) - outline
    rel = x0 - outline
    cross = edges[:, 0] * rel[:, 1] - edges[:, 1] * rel[:, 0]
    along = np.einsum("ij,ij->i", rel, edges) / np.einsum("ij,ij->i", edges, edges)
    on_edge = (np.abs(cross) <= _ON_BOUNDARY * scale**2) & (along > 0) & (along < 1)
    if on_edge.any():
        raise GeometryError(
            f"Point ({x0[0]:g}, {x0[1]:g}) lies inside a polygon edge, where the boundary "
            "is flat rather than strictly convex.\n\n"
            "  Query a polygon corner instead, or use a disk domain."
        )
    raise GeometryError(f"Point ({x0[0]:g}, {x0[1]:g}) is not on the domain boundary.")


@dataclass(frozen=True)
class BoundaryQuery:
    x0: tuple[float, float]
    rho: tuple[float, float]
    t0: float
    t: float
    gamma_bracket: tuple[float, float] = DEFAULT_GAMMA_BRACKET

    def __post_init__(self) -> None:
        if not self.t < self.t0:
            raise ConfigError(f"Probe offset t = {self.t} must lie below the support offset t0 = {self.t0}.")
        low, high = self.gamma_bracket
        if not 0 < low < high:
            raise ConfigError(
                f"gamma-bracket must satisfy 0 < low < high.\n\n"
                f"  You wrote:\n    gamma_bracket = ({low}, {high})\n\n"
                "  Use e.g.:\n    gamma_bracket = (0.25, 4.0)"
            )


def boundary_query(
    mesh: TriMesh,
    x0,
    offset: float | None = None,
    gamma_bracket: tuple[float, float] = DEFAULT_GAMMA_BRACKET,
) -> BoundaryQuery:
    """Build a query at ``x0``, snapped to the nearest boundary vertex of ``mesh``.

    ``offset`` is the depth t0 - t of the probe cap; it defaults to 5% of the
    domain diameter.
    """
    x0 = np.asarray(x0, dtype=float).reshape(2)
    boundary = mesh.boundary_points()
    nearest = boundary[int(np.argmin(np.linalg.norm(boundary - x0, axis=1)))]
    if np.linalg.norm(nearest - x0) > _ON_BOUNDARY * mesh.domain.diameter:
        warnings.warn(
            f"Boundary point ({x0[0]:g}, {x0[1]:g}) is not a mesh vertex; "
            f"using the nearest one ({nearest[0]:.6g}, {nearest[1]:.6g}).",
            stacklevel=2,
        )
    rho = supporting_direction(mesh.domain, nearest)
    t0 = float(nearest @ rho)
    top = float(np.max(mesh.vertices @ rho))
    if top - t0 > _ON_BOUNDARY * (1.0 + abs(t0)):
        raise GeometryError(
            f"The mesh reaches beyond the supporting line at ({nearest[0]:.6g}, {nearest[1]:.6g}) "
            f"by {top - t0:.3g}; the domain is not convex there."
        )
    depth = PROBE_OFFSET * mesh.domain.diameter if offset is None else float(offset)
    if not depth > 0:
        raise ConfigError(f"Probe offset must be positive, got {depth}.")
    return BoundaryQuery(
        (float(nearest[0]), float(nearest[1])),
        (float(rho[0]), float(rho[1])),
        t0,
        t0 - depth,
        (float(gamma_bracket[0]), float(gamma_bracket[1])),
    )


@dataclass(frozen=True)
class GammaStep:
    gamma: float
    classification: Classification
    slope: float
    curve: IndicatorCurve = field(repr=False)


@dataclass(frozen=True)
class BoundaryEstimate:
    """Recovered sigma(x0).

    ``status`` is "ok" when the gamma-bracket shrank to the tolerance and
    "flat" when a midpoint showed neither blow-up, which is read as
    gamma = sigma(x0).
    """

    query: BoundaryQuery
    value: float
    iterations: int
    bracket: tuple[float, float]
    status: str
    trace: tuple[GammaStep, ...] = field(default=(), repr=False)

    @property
    def bracket_width(self) -> float:
        return self.bracket[1] - self.bracket[0]


def indicator_gamma(
    oracle_sigma: Operator,
    oracle_one: DnOracle,
    gamma: float,
    wolff: WolffSolution,
    q: BoundaryQuery,
    tau: float,
    noise_floor: float = NOISE_FLOOR,
) -> IndicatorValue:
    """tau^-p <(Lambda_sigma - gamma Lambda_1) f_tau, f_tau> at the query's probe offset."""
    return indicator(
        oracle_sigma,
        oracle_one.scaled(gamma),
        wolff,
        IndicatorQuery(q.rho, q.t, float(tau)),
        noise_floor,
    )


def classify_gamma(
    oracle_sigma: Operator,
    oracle_one: DnOracle,
    gamma: float,
    wolff: WolffSolution,
    q: BoundaryQuery,
    taus: Sequence[float],
    *,
    slope_threshold: float = SLOPE_THRESHOLD,
    tau_power: float = TAU_POWER,
    noise_floor: float = NOISE_FLOOR,
) -> GammaStep:
    curve = indicator_curve(oracle_sigma, oracle_one.scaled(gamma), wolff, q.rho, q.t, taus, noise_floor)
    verdict = classify_curve(curve, slope_threshold, tau_power)
    slope = fit_slope(curve, tau_power)
    return GammaStep(float(gamma), verdict, slope, curve)


def recover_boundary_value(
    oracle_sigma: Operator,
    oracle_one: DnOracle,
    wolff: WolffSolution,
    q: BoundaryQuery,
    tolerance: float = 5e-3,
    taus: Sequence[float] | None = None,
    *,
    tau_multipliers: Sequence[float] = DEFAULT_TAU_MULTIPLIERS,
    **options,
) -> BoundaryEstimate:
    """Bisect on gamma until the bracket is narrower than ``tolerance``.

    Bracket ends that do not blow up with the expected sign are widened by
    a factor of 2, at most 10 times in total.

    Raises:
        InconclusiveError: if the bracket never straddles sigma(x0).
    """
    if not tolerance > 0:
        raise ConfigError(f"Boundary tolerance must be positive, got {tolerance}.")
    if taus is None:
        taus = tau_schedule(oracle_one.mesh, q.rho, tau_multipliers)

    def step(gamma: float) -> GammaStep:
        result = classify_gamma(oracle_sigma, oracle_one, gamma, wolff, q, taus, **options)
        logger.debug("x0=(%.4f, %.4f) gamma=%.6g -> %s", *q.x0, gamma, result.classification.value)
        return result

    low, high = q.gamma_bracket
    trace: list[GammaStep] = []
    widenings = 0
    low_step, high_step = step(low), step(high)
    trace += [low_step, high_step]
    while not (
        low_step.classification is Classification.BLOWUP_POS
        and high_step.classification is Classification.BLOWUP_NEG
    ):
        if widenings == MAX_WIDENINGS:
            raise InconclusiveError(
                f"x0 value outside probe range: at ({q.x0[0]:.4g}, {q.x0[1]:.4g}) the gamma-bracket "
                f"({low:.4g}, {high:.4g}) classifies as ({low_step.classification.value}, "
                f"{high_step.classification.value}) after {widenings} widenings.\n\n"
                "  Start from a bracket around the expected value, e.g.:\n"
                "    --gamma-bracket 0.01 100",
                trace=tuple(trace),
            )
        widenings += 1
        if low_step.classification is not Classification.BLOWUP_POS:
            low /= 2.0
            low_step = step(low)
            trace.append(low_step)
        if high_step.classification is not Classification.BLOWUP_NEG:
            high *= 2.0
            high_step = step(high)
            trace.append(high_step)
    if widenings:
        warnings.warn(
            f"gamma-bracket widened {widenings} times to ({low:.4g}, {high:.4g}) at "
            f"({q.x0[0]:.4g}, {q.x0[1]:.4g}).",
            stacklevel=2,
        )

    iterations = 0
    while high - low > tolerance:
        kappa = 0.5 * (low + high)
        result = step(kappa)
        trace.append(result)
        iterations += 1
        if result.classification is Classification.BLOWUP_POS:
            low = kappa
        elif result.classification is Classification.BLOWUP_NEG:
            high = kappa
        else:
            # neither side dominates: kappa is the boundary value
            return BoundaryEstimate(q, kappa, iterations, (low, high), "flat", tuple(trace))

    return BoundaryEstimate(q, 0.5 * (low + high), iterations, (low, high), "ok", tuple(trace))


def recover_boundary(
    oracle_sigma: Operator,
    oracle_one: DnOracle,
    wolff: WolffSolution,
    points: Sequence,
    tolerance: float = 5e-3,
    *,
    offset: float | None = None,
    gamma_bracket: tuple[float, float] = DEFAULT_GAMMA_BRACKET,
    workers: int | None = None,
    **options,
) -> list[BoundaryEstimate]:
    """Recover sigma at several boundary points, one thread per point."""
    mesh = oracle_one.mesh
    queries = [boundary_query(mesh, x0, offset, gamma_bracket) for x0 in points]

    def run(q: BoundaryQuery) -> BoundaryEstimate:
        estimate = recover_boundary_value(oracle_sigma, oracle_one, wolff, q, tolerance, **options)
        logger.info(
            "x0=(%.4f, %.4f): sigma=%.6g after %d steps (%s)",
            *q.x0, estimate.value, estimate.iterations, estimate.status,
        )
        return estimate

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, queries))

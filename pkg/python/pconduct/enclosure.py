"""Support-function reconstruction from exponentially growing probes.

For a direction rho and offset t, the indicator

    I(t, tau) = tau^-p <(Lambda_sigma - Lambda_1) f_tau, f_tau>

built from the Wolff trace f_tau blows up as tau grows when the half-plane
{x.rho > t} cuts the inclusion, and decays when it misses it. Bisection on t
then locates the support value h(rho); intersecting the half-planes over many
directions gives the convex hull.

All traces are sup-normalized. Their stored values depend on (rho, tau)
only, so every bisection step after the first is answered from the oracle
caches and only the log-scale moves.
"""

from __future__ import annotations

import logging
import math
import warnings
from collections import Counter
from collections.abc import Sequence
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from pconduct.dnmap import Operator, deficit
from pconduct.errors import ConfigError, InconclusiveError, SolverError
from pconduct.geometry.hull import HalfSpace, HullPolygon, direction_grid, halfspace_intersection
from pconduct.geometry.mesh import TriMesh
from pconduct.geometry.scene import SignClass
from pconduct.wolff import WolffField, WolffSolution, boundary_trace

__all__ = [
    "Classification",
    "IndicatorQuery",
    "IndicatorValue",
    "IndicatorCurve",
    "BisectionStep",
    "SupportEstimate",
    "HullReconstruction",
    "DEFAULT_TAU_MULTIPLIERS",
    "tau_schedule",
    "indicator",
    "indicator_curve",
    "fit_slope",
    "classify_curve",
    "estimate_support",
    "sign_of_inclusion",
    "reconstruct_hull",
    "translation_gap",
]

logger = logging.getLogger(__name__)

DEFAULT_TAU_MULTIPLIERS = (4.0, 8.0, 12.0, 16.0, 20.0, 24.0)
SLOPE_THRESHOLD = 0.02
NOISE_FLOOR = 1e-13
TAU_POWER = 1.5


class Classification(str, Enum):
    DECAY = "decay"
    BLOWUP_POS = "blowup_pos"
    BLOWUP_NEG = "blowup_neg"
    UNDECIDED = "undecided"

    @property
    def is_blowup(self) -> bool:
        return self in (Classification.BLOWUP_POS, Classification.BLOWUP_NEG)


@dataclass(frozen=True)
class IndicatorQuery:
    rho: tuple[float, float]
    t: float
    tau: float

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho, dtype=float).reshape(2)
        if abs(float(np.hypot(*rho)) - 1.0) > 1e-12:
            raise ConfigError(f"Query direction must be a unit vector, got {tuple(rho)}.")
        if not self.tau > 0:
            raise ConfigError(f"Query frequency tau must be positive, got {self.tau}.")
        object.__setattr__(self, "rho", (float(rho[0]), float(rho[1])))


@dataclass(frozen=True)
class IndicatorValue:
    """Sign and log|I| of one indicator sample.

    ``sign`` is 0 when the deficit sits below the noise floor; ``log_abs``
    then holds the log of the floor itself, an upper bound.
    """

    query: IndicatorQuery
    sign: int
    log_abs: float


@dataclass(frozen=True)
class IndicatorCurve:
    """Indicator samples over a strictly increasing tau-schedule."""

    rho: tuple[float, float]
    t: float
    taus: tuple[float, ...]
    signs: tuple[int, ...]
    log_abs: tuple[float, ...]
    length_scale: float = 1.0

    def __post_init__(self) -> None:
        taus = np.asarray(self.taus, dtype=float)
        if taus.size and np.any(np.diff(taus) <= 0):
            raise ConfigError(f"tau-schedule must be strictly increasing, got {list(taus)}.")
        if not np.all(np.isfinite(self.log_abs)):
            raise ConfigError("Indicator log-magnitudes must be finite.")

    @classmethod
    def from_values(cls, values: Sequence[IndicatorValue], length_scale: float = 1.0) -> IndicatorCurve:
        q0 = values[0].query
        return cls(
            rho=q0.rho,
            t=q0.t,
            taus=tuple(v.query.tau for v in values),
            signs=tuple(v.sign for v in values),
            log_abs=tuple(v.log_abs for v in values),
            length_scale=length_scale,
        )

    @property
    def below_floor(self) -> bool:
        return all(s == 0 for s in self.signs)


@dataclass(frozen=True)
class BisectionStep:
    t: float
    classification: Classification
    slope: float
    curve: IndicatorCurve = field(repr=False)


@dataclass(frozen=True)
class SupportEstimate:
    """Bisection result for one direction.

    ``status`` is "ok" when the bracket shrank to the tolerance, "undecided"
    when bisection stopped early, "no-inclusion" when the deficit never
    cleared the noise floor (``h_est`` is NaN), and "inconclusive" when the
    very first midpoint could not be classified.
    """

    rho: tuple[float, float]
    h_est: float
    bracket: tuple[float, float]
    status: str
    trace: tuple[BisectionStep, ...] = field(default=(), repr=False)

    @property
    def blowup_signs(self) -> list[int]:
        return [
            1 if step.classification is Classification.BLOWUP_POS else -1
            for step in self.trace
            if step.classification.is_blowup
        ]


@dataclass(frozen=True)
class HullReconstruction:
    hull: HullPolygon
    sign_class: SignClass
    estimates: tuple[SupportEstimate, ...]
    sign_counts: dict[str, int]

    @property
    def statuses(self) -> dict[str, int]:
        return dict(Counter(e.status for e in self.estimates))


# ==========================================
# Indicator samples
# ==========================================
def tau_schedule(
    mesh: TriMesh,
    rho,
    multipliers: Sequence[float] = DEFAULT_TAU_MULTIPLIERS,
) -> np.ndarray:
    """multiplier / extent(rho), shrunk as a whole so that tau * h_max <= 1/2."""
    taus = np.asarray(sorted(multipliers), dtype=float) / mesh.domain.extent(np.asarray(rho, dtype=float))
    cap = 0.5 / mesh.h_max
    if taus[-1] > cap:
        warnings.warn(
            f"tau-schedule capped at {cap:.4g} (was up to {taus[-1]:.4g}) so the mesh "
            f"resolves the probe oscillation; refine the mesh to probe higher frequencies.",
            stacklevel=2,
        )
        taus = taus * (cap / taus[-1])
    return taus


def indicator(
    oracle_sigma: Operator,
    oracle_one: Operator,
    wolff: WolffSolution,
    q: IndicatorQuery,
    noise_floor: float = NOISE_FLOOR,
) -> IndicatorValue:
    """One indicator sample, reconstructed in log space from normalized pairings."""
    try:
        f = boundary_trace(WolffField(wolff, q.rho, q.t, q.tau), oracle_one.mesh)
        diff = deficit(oracle_sigma, oracle_one, f)
        scale = abs(oracle_one.pair(f).value)
    except SolverError as exc:
        raise SolverError(
            f"Indicator query rho=({q.rho[0]:.4g}, {q.rho[1]:.4g}), t={q.t:.6g}, tau={q.tau:.4g} failed: {exc}",
            best=exc.best,
            residual=exc.residual,
        ) from exc
    floor = noise_floor * scale
    p = oracle_one.p
    if abs(diff.value) <= floor:
        magnitude, sign = max(floor, np.finfo(float).tiny), 0
    else:
        magnitude, sign = abs(diff.value), int(np.sign(diff.value))
    log_abs = -p * math.log(q.tau) + math.log(magnitude) + diff.log_scale
    return IndicatorValue(q, sign, log_abs)


def indicator_curve(
    oracle_sigma: Operator,
    oracle_one: Operator,
    wolff: WolffSolution,
    rho,
    t: float,
    taus: Sequence[float],
    noise_floor: float = NOISE_FLOOR,
    executor: Executor | None = None,
) -> IndicatorCurve:
    queries = [IndicatorQuery(tuple(rho), float(t), float(tau)) for tau in taus]

    def sample(q: IndicatorQuery) -> IndicatorValue:
        return indicator(oracle_sigma, oracle_one, wolff, q, noise_floor)

    values = list(executor.map(sample, queries)) if executor else [sample(q) for q in queries]
    return IndicatorCurve.from_values(values, oracle_one.mesh.domain.diameter)


# ==========================================
# Classification
# ==========================================
def fit_slope(curve: IndicatorCurve, tau_power: float = TAU_POWER) -> float:
    """Least-squares slope of the corrected log|I| + tau_power * log(tau) against tau * length_scale.

    This is not the plain slope of log|I|: a curve decaying like tau**-tau_power
    fits to 0. The ``log_abs`` column of indicator.csv is uncorrected; pass
    ``tau_power=0`` for its plain slope. Uses the top half of the schedule.
    """
    taus = np.asarray(curve.taus)
    half = len(taus) // 2
    x = taus[half:] * curve.length_scale
    y = np.asarray(curve.log_abs)[half:] + tau_power * np.log(taus[half:])
    return float(np.polyfit(x, y, 1)[0])


def classify_curve(
    curve: IndicatorCurve,
    slope_threshold: float = SLOPE_THRESHOLD,
    tau_power: float = TAU_POWER,
) -> Classification:
    """Read growth or decay off the top half of an indicator curve.

    Example:
        >>> taus = tuple(float(k) for k in range(1, 9))
        >>> curve = IndicatorCurve((1.0, 0.0), 0.0, taus, (1,) * 8, tuple(-t for t in taus))
        >>> classify_curve(curve)
        <Classification.DECAY: 'decay'>
    """
    if len(curve.taus) < 4:
        raise ConfigError(f"Classification needs at least 4 tau-samples, got {len(curve.taus)}.")
    if curve.below_floor or curve.signs[-1] == 0:
        return Classification.DECAY
    top = {s for s in curve.signs[len(curve.signs) // 2 :] if s != 0}
    if len(top) > 1:
        return Classification.UNDECIDED
    slope = fit_slope(curve, tau_power)
    if slope > slope_threshold:
        return Classification.BLOWUP_POS if curve.signs[-1] > 0 else Classification.BLOWUP_NEG
    if slope < -slope_threshold:
        return Classification.DECAY
    return Classification.UNDECIDED


# ==========================================
# Support estimation
# ==========================================
def estimate_support(
    oracle_sigma: Operator,
    oracle_one: Operator,
    wolff: WolffSolution,
    rho,
    bracket: tuple[float, float] | None = None,
    tolerance: float | None = None,
    taus: Sequence[float] | None = None,
    *,
    tau_multipliers: Sequence[float] = DEFAULT_TAU_MULTIPLIERS,
    slope_threshold: float = SLOPE_THRESHOLD,
    tau_power: float = TAU_POWER,
    noise_floor: float = NOISE_FLOOR,
    executor: Executor | None = None,
) -> SupportEstimate:
    """Bisect on t for the support value h(rho).

    The default bracket is the domain's own extent along rho, which always
    contains the inclusion. The default tolerance is a quarter cell width.
    Without explicit ``taus`` the schedule is ``tau_multipliers`` / extent(rho).

    Raises:
        InconclusiveError: if the first midpoint cannot be classified.
    """
    mesh = oracle_one.mesh
    rho = tuple(float(c) for c in np.asarray(rho, dtype=float).reshape(2))
    if bracket is None:
        bracket = (-mesh.domain.support(-np.asarray(rho)), mesh.domain.support(np.asarray(rho)))
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ConfigError(f"Support bracket must satisfy t_low < t_high, got ({lo}, {hi}).")
    tolerance = mesh.cell_width / 4.0 if tolerance is None else float(tolerance)
    if not tolerance > 0:
        raise ConfigError(f"Bisection tolerance must be positive, got {tolerance}.")
    if taus is None:
        taus = tau_schedule(mesh, rho, tau_multipliers)

    steps: list[BisectionStep] = []
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        curve = indicator_curve(oracle_sigma, oracle_one, wolff, rho, mid, taus, noise_floor, executor)
        verdict = classify_curve(curve, slope_threshold, tau_power)
        slope = fit_slope(curve, tau_power)
        steps.append(BisectionStep(mid, verdict, slope, curve))
        logger.debug("rho=(%.4f, %.4f) t=%.6f -> %s (slope %.4f)", *rho, mid, verdict.value, slope)

        if curve.below_floor:
            # stored traces do not depend on t, so no other offset can do better
            return SupportEstimate(rho, math.nan, (lo, hi), "no-inclusion", tuple(steps))
        if verdict is Classification.UNDECIDED:
            if len(steps) == 1:
                raise InconclusiveError(
                    f"indicator inconclusive in direction ({rho[0]:.4g}, {rho[1]:.4g}): "
                    f"slope {slope:.4g} is within +/-{slope_threshold:g} at t = {mid:.6g}.\n\n"
                    "  Refine the mesh, extend the tau-schedule, or lower the slope threshold.",
                    trace=tuple(steps),
                )
            return SupportEstimate(rho, mid, (lo, hi), "undecided", tuple(steps))
        if verdict.is_blowup:
            lo = mid
        else:
            hi = mid

    return SupportEstimate(rho, 0.5 * (lo + hi), (lo, hi), "ok", tuple(steps))


def sign_of_inclusion(estimates: Sequence[SupportEstimate]) -> tuple[SignClass, dict[str, int]]:
    """Majority sign over every blow-up seen during bisection."""
    signs = [s for e in estimates for s in e.blowup_signs]
    counts = {"positive": signs.count(1), "negative": signs.count(-1)}
    if not signs:
        return SignClass.HOMOGENEOUS, counts
    if counts["positive"] >= counts["negative"]:
        return SignClass.GEQ1, counts
    return SignClass.LEQ1, counts


def reconstruct_hull(
    oracle_sigma: Operator,
    oracle_one: Operator,
    wolff: WolffSolution,
    directions: int | np.ndarray = 16,
    tolerance: float | None = None,
    *,
    workers: int | None = None,
    **options,
) -> HullReconstruction:
    """Estimate h(rho) on every direction and intersect the half-planes.

    Directions run in parallel on a thread pool. A direction whose first
    midpoint is inconclusive is reported with status "inconclusive" and left
    out of the intersection.
    """
    if isinstance(directions, (int, np.integer)):
        directions = direction_grid(int(directions))
    directions = np.asarray(directions, dtype=float).reshape(-1, 2)
    if len(directions) < 8:
        raise ConfigError(
            f"Hull reconstruction needs at least 8 directions, got {len(directions)}.\n\n"
            "  Use e.g.:\n    --directions 16"
        )
    mesh = oracle_one.mesh

    def run(rho: np.ndarray) -> SupportEstimate:
        try:
            estimate = estimate_support(oracle_sigma, oracle_one, wolff, rho, tolerance=tolerance, **options)
        except InconclusiveError as exc:
            lo, hi = -mesh.domain.support(-rho), mesh.domain.support(rho)
            estimate = SupportEstimate(tuple(rho), math.nan, (lo, hi), "inconclusive", exc.trace or ())
        logger.info("direction (%.4f, %.4f): %s h=%.6g", rho[0], rho[1], estimate.status, estimate.h_est)
        return estimate

    with ThreadPoolExecutor(max_workers=workers) as pool:
        estimates = tuple(pool.map(run, directions))

    sign_class, counts = sign_of_inclusion(estimates)
    if all(e.status == "no-inclusion" for e in estimates):
        return HullReconstruction(HullPolygon.empty(), SignClass.HOMOGENEOUS, estimates, counts)

    usable = [e for e in estimates if math.isfinite(e.h_est)]
    if len(usable) < 3:
        raise InconclusiveError(
            f"Only {len(usable)} of {len(estimates)} directions produced a support value; "
            "cannot bound a hull.",
            trace=estimates,
        )
    hull = halfspace_intersection([HalfSpace(e.rho, e.h_est) for e in usable])
    return HullReconstruction(hull, sign_class, estimates, counts)


def translation_gap(curve_t: IndicatorCurve, curve_shifted: IndicatorCurve, delta: float, p: float) -> float:
    """Largest relative deviation from log|I(t - delta)| - log|I(t)| = p tau delta.

    ``curve_shifted`` must be sampled at ``curve_t.t - delta`` on the same schedule.
    """
    taus = np.asarray(curve_t.taus)
    if curve_shifted.taus != curve_t.taus:
        raise ConfigError("Both curves must share one tau-schedule.")
    observed = np.asarray(curve_shifted.log_abs) - np.asarray(curve_t.log_abs)
    expected = p * taus * delta
    return float(np.max(np.abs(observed - expected) / np.maximum(np.abs(expected), 1e-300)))

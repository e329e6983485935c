"""Periodic profiles of exponential p-harmonic functions.

A Wolff field is

    u(x) = exp(tau * (x.rho - t)) * w(tau * x.rho_perp)

where ``w`` solves ``w'' + V(w, w') w = 0`` and is periodic. The profile is
integrated once per exponent and interpolated with cubic Hermite pieces on a
uniform grid, so ``u`` and its gradient stay consistent.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import minimize_scalar

from pconduct.errors import ConfigError, SolverError
from pconduct.geometry.mesh import TriMesh
from pconduct.psolver import BoundaryTrace

__all__ = [
    "WolffSolution",
    "WolffField",
    "v_coefficient",
    "period_guess",
    "integrate_wolff",
    "field_value",
    "boundary_trace",
    "MAX_EXPONENT",
]

logger = logging.getLogger(__name__)

MAX_EXPONENT = 300.0
HORIZON_PERIODS = 110


def v_coefficient(p: float, w, dw):
    """((2p - 3) w'^2 + (p - 1) w^2) / ((p - 1) w'^2 + w^2).

    Works elementwise on arrays.
    """
    w = np.asarray(w, dtype=float)
    dw = np.asarray(dw, dtype=float)
    denominator = (p - 1.0) * dw**2 + w**2
    if np.any(denominator == 0.0):
        raise ConfigError(
            "V(w, w') is undefined at the origin (w, w') = (0, 0). "
            "Start the profile from a nonzero state such as (1, 0)."
        )
    value = ((2.0 * p - 3.0) * dw**2 + (p - 1.0) * w**2) / denominator
    return float(value) if value.ndim == 0 else value


def period_guess(p: float) -> float:
    """Period of the linear oscillator at the largest value V can take.

    V is a weighted mean of p - 1 and (2p - 3)/(p - 1), so the true period
    is at least this guess.
    """
    v_max = max(p - 1.0, (2.0 * p - 3.0) / (p - 1.0))
    return 2.0 * math.pi / math.sqrt(max(v_max, 1e-12))


@dataclass(frozen=True, eq=False)
class WolffSolution:
    """One period of the profile, sampled on ``len(s)`` uniform points.

    ``s`` excludes the endpoint ``lambda_p``; ``closure_error`` records how far
    the integrated state at ``lambda_p`` landed from the initial state.
    """

    p: float
    s: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    lambda_p: float
    c_emp: float
    C_emp: float
    a0: float
    b0: float
    tolerance: float
    closure_error: float

    @property
    def samples(self) -> np.ndarray:
        """(n, 3) array of (s, w, w')."""
        return np.column_stack([self.s, self.w, self.dw])

    @property
    def mean(self) -> float:
        """Average of w over one period (periodic trapezoid rule)."""
        return float(np.mean(self.w))

    @cached_property
    def _spline(self) -> CubicHermiteSpline:
        knots = np.append(self.s, self.lambda_p)
        second = -v_coefficient(self.p, self.w, self.dw) * self.w
        return CubicHermiteSpline(
            knots,
            np.column_stack([np.append(self.w, self.w[0]), np.append(self.dw, self.dw[0])]),
            np.column_stack([np.append(self.dw, self.dw[0]), np.append(second, second[0])]),
        )

    def profile(self, s) -> tuple[np.ndarray, np.ndarray]:
        """Interpolated (w, w') at arbitrary ``s``, extended periodically."""
        values = self._spline(np.mod(np.asarray(s, dtype=float), self.lambda_p))
        return values[..., 0], values[..., 1]


def integrate_wolff(
    p: float,
    a0: float = 1.0,
    b0: float = 0.0,
    tolerance: float = 1e-11,
    samples: int = 1024,
) -> WolffSolution:
    """Integrate the profile ODE and detect its period.

    The period is the first oriented return to the ray through (a0, b0),
    located as a terminal event of DOP853.

    Example:
        >>> sol = integrate_wolff(2.0)
        >>> round(sol.lambda_p, 8) == round(2 * math.pi, 8)
        True

    Raises:
        ConfigError: for p outside (1, inf) or a zero initial state.
        SolverError: when no return happens within the horizon or the
            integrator cannot reach ``tolerance``.
    """
    if not 1.0 < p < math.inf:
        raise ConfigError(f"Exponent p must lie in (1, inf), got p = {p}.")
    if a0 == 0.0 and b0 == 0.0:
        raise ConfigError(
            "Initial state (a0, b0) = (0, 0) gives the zero solution.\n\n"
            "  Use a nonzero pair, e.g.:\n    a0 = 1.0, b0 = 0.0"
        )
    if samples < 512:
        raise ConfigError(f"Use at least 512 samples per period, got {samples}.")

    def rhs(_s, y):
        return [y[1], -v_coefficient(p, y[0], y[1]) * y[0]]

    def section(_s, y):
        return a0 * y[1] - b0 * y[0]

    # Leaving the ray the state always turns clockwise, so the return
    # crosses the section from positive to negative.
    section.terminal = True
    section.direction = -1

    guess = period_guess(p)
    opts = dict(method="DOP853", rtol=tolerance, atol=tolerance)
    start = [a0, b0]

    # step off the section before arming the event
    quarter = solve_ivp(rhs, (0.0, guess / 4.0), start, **opts)
    if not quarter.success:
        raise SolverError(f"Profile integration failed for p = {p}: {quarter.message}")
    tail = solve_ivp(
        rhs,
        (guess / 4.0, HORIZON_PERIODS * guess),
        quarter.y[:, -1],
        events=section,
        **opts,
    )
    if not tail.success:
        raise SolverError(f"Profile integration failed for p = {p}: {tail.message}")
    if tail.t_events[0].size == 0:
        raise SolverError(
            f"period detection failed for p = {p}: no return to the initial ray "
            f"within {HORIZON_PERIODS} guessed periods ({HORIZON_PERIODS * guess:.4g})."
        )
    lambda_p = float(tail.t_events[0][0])
    returned = tail.y_events[0][0]
    radius = math.hypot(a0, b0)
    closure = float(abs(returned[0] - a0) + abs(returned[1] - b0))
    if closure > max(1e-6, 1e4 * tolerance) * radius:
        raise SolverError(
            f"period detection failed for p = {p}: the orbit returned to the ray at "
            f"({returned[0]:.6g}, {returned[1]:.6g}) instead of ({a0:g}, {b0:g}).\n\n"
            "  Tighten the integration tolerance."
        )

    grid = lambda_p * np.arange(samples) / samples
    period = solve_ivp(rhs, (0.0, lambda_p), start, t_eval=grid, dense_output=True, **opts)
    if not period.success:
        raise SolverError(f"Profile resampling failed for p = {p}: {period.message}")
    w, dw = period.y

    c_emp, C_emp = _refine_bounds(period.sol, grid, w**2 + dw**2, lambda_p)
    if not 0.0 < c_emp <= C_emp < math.inf:
        raise SolverError(f"Profile bounds degenerate for p = {p}: c = {c_emp}, C = {C_emp}.")

    logger.debug(
        "wolff p=%g: lambda=%.12g c=%.6g C=%.6g closure=%.2e",
        p, lambda_p, c_emp, C_emp, closure,
    )
    return WolffSolution(
        p=float(p),
        s=grid,
        w=w,
        dw=dw,
        lambda_p=lambda_p,
        c_emp=c_emp,
        C_emp=C_emp,
        a0=float(a0),
        b0=float(b0),
        tolerance=float(tolerance),
        closure_error=closure,
    )


def _refine_bounds(dense, grid: np.ndarray, radius2: np.ndarray, lambda_p: float) -> tuple[float, float]:
    """Polish the sampled extrema of w^2 + w'^2 on the dense output."""
    step = grid[1] - grid[0]

    def radius_at(s: float) -> float:
        y = dense(float(np.clip(s, 0.0, lambda_p)))
        return float(y[0] ** 2 + y[1] ** 2)

    def polish(index: int, sign: float) -> float:
        centre = grid[index]
        res = minimize_scalar(
            lambda s: sign * radius_at(s),
            bounds=(centre - step, centre + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        return sign * float(res.fun)

    low = min(radius2.min(), polish(int(np.argmin(radius2)), 1.0))
    high = max(radius2.max(), polish(int(np.argmax(radius2)), -1.0))
    return float(low), float(high)


# ==========================================
# Fields
# ==========================================
@dataclass(frozen=True, eq=False)
class WolffField:
    """An exponential field in direction ``rho`` probing the half-plane x.rho <= t."""

    solution: WolffSolution
    rho: tuple[float, float]
    t: float
    tau: float
    log_scale: float = 0.0

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho, dtype=float).reshape(2)
        if abs(float(np.hypot(*rho)) - 1.0) > 1e-12:
            raise ConfigError(f"rho must be a unit vector, got {tuple(rho)}.")
        if not self.tau > 0:
            raise ConfigError(f"tau must be positive, got {self.tau}.")
        object.__setattr__(self, "rho", (float(rho[0]), float(rho[1])))

    @property
    def rho_perp(self) -> tuple[float, float]:
        return -self.rho[1], self.rho[0]


def field_value(field: WolffField, x) -> tuple[np.ndarray, np.ndarray]:
    """u and grad u at ``x`` (one point or an (n, 2) array).

    Raises:
        SolverError: if the exponent exceeds MAX_EXPONENT; use
            :func:`boundary_trace`, which normalizes in log space.
    """
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    rho = np.asarray(field.rho)
    perp = np.asarray(field.rho_perp)
    exponent = field.tau * (pts @ rho - field.t) + field.log_scale
    if exponent.max() > MAX_EXPONENT:
        raise SolverError(
            f"Wolff field overflows: exponent {exponent.max():.1f} exceeds {MAX_EXPONENT:g}.\n\n"
            "  Renormalize: lower tau, raise t, or sample the boundary with boundary_trace."
        )
    w, dw = field.solution.profile(field.tau * (pts @ perp))
    scale = np.exp(exponent)
    u = scale * w
    grad = (field.tau * scale)[:, None] * (w[:, None] * rho + dw[:, None] * perp)
    if single:
        return u[0], grad[0]
    return u, grad


def boundary_trace(field: WolffField, mesh: TriMesh) -> BoundaryTrace:
    """Boundary values of ``field`` scaled to sup-norm 1.

    The stored values depend on (rho, tau) only; ``t`` and the field's own
    ``log_scale`` move into the trace's ``log_scale``.
    """
    pts = mesh.boundary_points()
    rho = np.asarray(field.rho)
    along = pts @ rho
    top = float(along.max())
    w, _ = field.solution.profile(field.tau * (pts @ np.asarray(field.rho_perp)))
    values = np.exp(field.tau * (along - top)) * w
    peak = float(np.abs(values).max())
    if peak == 0.0:
        raise SolverError("Wolff trace vanishes on the whole boundary; change rho or tau.")
    log_scale = field.tau * (top - field.t) + field.log_scale + math.log(peak)
    label = f"wolff(rho=({field.rho[0]:.6g},{field.rho[1]:.6g}),tau={field.tau:.6g})"
    return BoundaryTrace(values / peak, mesh.mesh_id, log_scale, label)

"""Forward solver for the weighted p-Laplace Dirichlet problem.

Fields are piecewise linear on a :class:`~pconduct.geometry.TriMesh` and the
conductivity is constant per cell, so every integral below is an exact sum
over cells. The solver minimizes the regularized energy

    E(u) = sum over cells of area * sigma * (|grad u|^2 + eps^2)^(p/2)

over the interior vertex values, starting from the linear (p = 2) solution
and running damped Newton with an Armijo backtracking line search.
"""

from __future__ import annotations

import hashlib
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from pconduct.errors import ConfigError, SolverError
from pconduct.geometry.mesh import TriMesh

__all__ = [
    "BoundaryTrace",
    "DiscreteSolution",
    "SolverConfig",
    "Pairing",
    "MonotonicityBounds",
    "energy",
    "energy_density",
    "flux_density",
    "solve_linear",
    "solve_dirichlet",
    "dn_pairing",
    "pairing_from_solutions",
    "lambda_b_pairing",
    "monotonicity_bounds",
]

logger = logging.getLogger(__name__)

_TINY = np.finfo(float).tiny


# ==========================================
# Traces and configuration
# ==========================================
@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    """Dirichlet data: one value per boundary vertex, in ``mesh.boundary_vertices`` order.

    The physical trace is ``exp(log_scale) * values``. Keeping the scale
    apart lets exponentially large Wolff traces live in floating point.
    """

    values: np.ndarray
    mesh_id: str
    log_scale: float = 0.0
    label: str = ""

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(values)):
            raise ConfigError(
                f"Boundary trace {self.label or '<unnamed>'!r} contains non-finite values. "
                "Normalize the trace and carry the magnitude in log_scale."
            )
        if not math.isfinite(self.log_scale):
            raise ConfigError(f"Trace log_scale must be finite, got {self.log_scale}.")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "log_scale", float(self.log_scale))

    @classmethod
    def from_function(
        cls, mesh: TriMesh, fn: Callable[[np.ndarray], np.ndarray], label: str = ""
    ) -> BoundaryTrace:
        """Sample ``fn`` at the boundary vertices. ``fn`` takes an (n, 2) array."""
        values = np.asarray(fn(mesh.boundary_points()), dtype=float)
        values = np.broadcast_to(values, (len(mesh.boundary_vertices),))
        return cls(values, mesh.mesh_id, 0.0, label)

    @classmethod
    def from_values(cls, mesh: TriMesh, values, label: str = "") -> BoundaryTrace:
        trace = cls(values, mesh.mesh_id, 0.0, label)
        trace.check(mesh)
        return trace

    @cached_property
    def fingerprint(self) -> str:
        digest = hashlib.sha1(self.values.tobytes())
        digest.update(self.mesh_id.encode())
        return digest.hexdigest()

    @property
    def sup_norm(self) -> float:
        return float(np.abs(self.values).max()) if self.values.size else 0.0

    def normalized(self) -> BoundaryTrace:
        """Same physical trace with values rescaled to sup-norm 1."""
        peak = self.sup_norm
        if peak == 0.0 or peak == 1.0:
            return self
        return BoundaryTrace(self.values / peak, self.mesh_id, self.log_scale + math.log(peak), self.label)

    def scaled(self, factor: float) -> BoundaryTrace:
        """The trace multiplied by ``factor`` (folded into the values)."""
        return BoundaryTrace(self.values * factor, self.mesh_id, self.log_scale, self.label)

    def check(self, mesh: TriMesh) -> None:
        if self.mesh_id != mesh.mesh_id or len(self.values) != len(mesh.boundary_vertices):
            raise ConfigError(
                f"Boundary trace {self.label or '<unnamed>'!r} does not belong to this mesh.\n\n"
                f"  Trace has {len(self.values)} values for mesh {self.mesh_id}; "
                f"mesh {mesh.mesh_id} has {len(mesh.boundary_vertices)} boundary vertices.\n\n"
                "  Rebuild the trace on the mesh you are solving on."
            )


@dataclass(frozen=True)
class SolverConfig:
    """Numerical settings for :func:`solve_dirichlet`.

    ``epsilon`` defaults to 1e-8 for p >= 2 and 1e-5 below, where the
    energy Hessian degenerates at vanishing gradients.
    """

    p: float
    epsilon: float | None = None
    max_iterations: int = 500
    tolerance: float = 1e-10
    armijo: float = 1e-4
    backtrack: float = 0.5
    min_step: float = 1e-12

    def __post_init__(self) -> None:
        if not 1.0 < self.p < math.inf:
            raise ConfigError(f"Exponent p must lie in (1, inf), got p = {self.p}.")
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", 1e-8 if self.p >= 2.0 else 1e-5)
        if self.epsilon < 0:
            raise ConfigError(f"Regularization epsilon must be >= 0, got {self.epsilon}.")
        if self.tolerance <= 0 or self.max_iterations < 1:
            raise ConfigError(
                "Solver tolerance must be positive and max_iterations at least 1.\n\n"
                f"  You wrote:\n    tolerance = {self.tolerance}\n    max_iterations = {self.max_iterations}"
            )
        if not (0.0 < self.armijo < 1.0 and 0.0 < self.backtrack < 1.0):
            raise ConfigError("Line-search parameters armijo and backtrack must lie in (0, 1).")

    def with_p(self, p: float) -> SolverConfig:
        return replace(self, p=float(p), epsilon=None)


@dataclass(frozen=True, eq=False)
class DiscreteSolution:
    values: np.ndarray
    energy: float
    iterations: int
    residual: float
    energies: tuple[float, ...] = field(default=(), repr=False)


class Pairing(NamedTuple):
    """A DN pairing computed on stored trace values.

    The pairing of the physical traces is ``value * exp(log_scale)``, which
    may overflow; compare pairings through ``log_magnitude`` instead.
    """

    value: float
    log_scale: float = 0.0

    @property
    def sign(self) -> int:
        return int(np.sign(self.value))

    @property
    def log_magnitude(self) -> float:
        return math.log(abs(self.value)) + self.log_scale if self.value else -math.inf

    @property
    def true_value(self) -> float:
        if self.log_scale > 700:
            return math.copysign(math.inf, self.value) if self.value else 0.0
        return self.value * math.exp(self.log_scale)

    def __float__(self) -> float:
        return self.true_value


class MonotonicityBounds(NamedTuple):
    lower: float
    middle: float
    upper: float

    def slack(self) -> float:
        """Smallest margin of the sandwich; negative means it is violated."""
        return min(self.middle - self.lower, self.upper - self.middle)


# ==========================================
# Per-cell quantities
# ==========================================
def _sigma_array(mesh: TriMesh, sigma) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim == 0:
        return np.full(mesh.n_cells, float(sigma))
    if sigma.shape != (mesh.n_cells,):
        raise ConfigError(f"sigma needs one value per cell ({mesh.n_cells}), got shape {sigma.shape}.")
    return sigma


def energy_density(mesh: TriMesh, u: np.ndarray, p: float, epsilon: float = 0.0) -> np.ndarray:
    """(|grad u|^2 + eps^2)^(p/2) on every cell."""
    g = mesh.cell_gradients(np.asarray(u, dtype=float))
    return (np.einsum("mi,mi->m", g, g) + epsilon**2) ** (0.5 * p)


def flux_density(
    mesh: TriMesh, u: np.ndarray, v: np.ndarray, p: float, epsilon: float = 0.0
) -> np.ndarray:
    """(|grad u|^2 + eps^2)^((p-2)/2) grad u . grad v on every cell."""
    gu = mesh.cell_gradients(np.asarray(u, dtype=float))
    gv = gu if v is u else mesh.cell_gradients(np.asarray(v, dtype=float))
    s = np.maximum(np.einsum("mi,mi->m", gu, gu) + epsilon**2, _TINY)
    return s ** (0.5 * p - 1.0) * np.einsum("mi,mi->m", gu, gv)


def energy(mesh: TriMesh, sigma, u: np.ndarray, p: float, epsilon: float = 0.0) -> float:
    """Exact discrete p-Dirichlet energy of ``u``.

    Example:
        >>> mesh = build_mesh(DomainSpec.unit_square(), 4)
        >>> round(energy(mesh, 1.0, mesh.vertices[:, 0], p=3), 12)
        1.0
    """
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise SolverError("Cannot evaluate the energy of a field with NaN or inf values.")
    weights = mesh.areas * _sigma_array(mesh, sigma)
    return float(weights @ energy_density(mesh, u, p, epsilon))


# ==========================================
# Assembly
# ==========================================
class _Assembler:
    """Sparsity pattern and gradient operators of one mesh, restricted to the interior."""

    def __init__(self, mesh: TriMesh):
        self.mesh = mesh
        self.interior = mesh.interior_vertices
        self.boundary = mesh.boundary_vertices
        local = np.full(mesh.n_vertices, -1, dtype=np.int64)
        local[self.interior] = np.arange(len(self.interior))
        tri_local = local[mesh.triangles]
        rows = np.repeat(tri_local, 3, axis=1)
        cols = np.tile(tri_local, (1, 3))
        self.keep = ((rows >= 0) & (cols >= 0)).ravel()
        self.rows = rows.ravel()[self.keep]
        self.cols = cols.ravel()[self.keep]
        self.n = len(self.interior)
        self.gtg = np.einsum("mki,mkj->mij", mesh.gradients, mesh.gradients)

    def stiffness(self, weights: np.ndarray) -> sp.csr_matrix:
        """Full n_vertices square matrix of sum weights * G^T G."""
        mesh = self.mesh
        rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
        cols = np.tile(mesh.triangles, (1, 3)).ravel()
        data = (weights[:, None, None] * self.gtg).ravel()
        return sp.coo_matrix((data, (rows, cols)), shape=(mesh.n_vertices,) * 2).tocsr()

    def evaluate(
        self, u: np.ndarray, weights: np.ndarray, p: float, eps: float, hessian: bool
    ) -> tuple[float, np.ndarray, sp.csc_matrix | None]:
        mesh = self.mesh
        g = mesh.cell_gradients(u)
        s = np.einsum("mi,mi->m", g, g) + eps**2
        value = float(weights @ s ** (0.5 * p))
        s_safe = np.maximum(s, _TINY)
        c1 = weights * p * s_safe ** (0.5 * p - 1.0)
        gtg_dot = np.einsum("mij,mi->mj", mesh.gradients, g)
        local_grad = c1[:, None] * gtg_dot
        full = np.bincount(mesh.triangles.ravel(), local_grad.ravel(), minlength=mesh.n_vertices)
        grad = full[self.interior]
        if not hessian:
            return value, grad, None
        c2 = weights * p * (p - 2.0) * s_safe ** (0.5 * p - 2.0)
        local_h = c1[:, None, None] * self.gtg + c2[:, None, None] * gtg_dot[:, :, None] * gtg_dot[:, None, :]
        data = local_h.ravel()[self.keep]
        hess = sp.coo_matrix((data, (self.rows, self.cols)), shape=(self.n, self.n)).tocsc()
        return value, grad, hess


@lru_cache(maxsize=16)
def _assembler(mesh: TriMesh) -> _Assembler:
    return _Assembler(mesh)


def _lift(mesh: TriMesh, trace: BoundaryTrace) -> np.ndarray:
    trace.check(mesh)
    u = np.zeros(mesh.n_vertices)
    u[mesh.boundary_vertices] = trace.values
    return u


# ==========================================
# Solvers
# ==========================================
def solve_linear(mesh: TriMesh, sigma, trace: BoundaryTrace) -> np.ndarray:
    """Vertex values of the p = 2 solution by one sparse direct solve."""
    asm = _assembler(mesh)
    u = _lift(mesh, trace)
    if asm.n == 0:
        return u
    weights = mesh.areas * _sigma_array(mesh, sigma)
    k = asm.stiffness(weights)
    k_ii = k[asm.interior][:, asm.interior].tocsc()
    k_ib = k[asm.interior][:, asm.boundary]
    u[asm.interior] = splu(k_ii).solve(-(k_ib @ trace.values))
    return u


def solve_dirichlet(
    mesh: TriMesh, sigma, f: BoundaryTrace, config: SolverConfig
) -> DiscreteSolution:
    """Minimize the regularized p-energy with boundary values ``f``.

    Newton steps fall back to Barzilai-Borwein gradient steps whenever the
    Hessian solve fails or does not give a descent direction.

    Raises:
        SolverError: on NaN, on line-search stagnation away from a minimizer,
            or when ``config.max_iterations`` is exhausted. The error carries
            the best iterate and its residual.
    """
    p, eps = config.p, float(config.epsilon)
    weights = mesh.areas * _sigma_array(mesh, sigma)
    asm = _assembler(mesh)

    u = solve_linear(mesh, sigma, f)
    value, grad, hess = asm.evaluate(u, weights, p, eps, hessian=True)
    if not math.isfinite(value):
        raise SolverError("Energy of the initial guess is not finite; check sigma and the trace.")
    history = [value]
    if asm.n == 0:
        return DiscreteSolution(u, value, 0, 0.0, tuple(history))

    bb_step: float | None = None

    for iteration in range(config.max_iterations + 1):
        residual = float(np.abs(grad).max())
        target = config.tolerance * (1.0 + abs(value))

        direction = None
        try:
            direction = splu(hess).solve(-grad)
        except RuntimeError:
            logger.debug("singular Hessian at iteration %d, taking a gradient step", iteration)
        if direction is None or not np.all(np.isfinite(direction)) or grad @ direction >= 0:
            if bb_step is None:
                bb_step = 1.0 / max(float(hess.diagonal().max()), _TINY)
            direction = -bb_step * grad
        slope = float(grad @ direction)

        if residual <= target and -slope <= 1e-15 * (1.0 + abs(value)):
            return DiscreteSolution(u, value, iteration, residual, tuple(history))
        if iteration == config.max_iterations:
            break

        step = 1.0
        interior = u[asm.interior]
        while True:
            trial = u.copy()
            trial[asm.interior] = interior + step * direction
            trial_value, _, _ = asm.evaluate(trial, weights, p, eps, hessian=False)
            if math.isfinite(trial_value) and trial_value <= value + config.armijo * step * slope:
                break
            step *= config.backtrack
            if step < config.min_step:
                if residual <= target:
                    return DiscreteSolution(u, value, iteration, residual, tuple(history))
                raise SolverError(
                    "Line search stalled before the energy gradient met the tolerance.\n\n"
                    f"  Residual {residual:.3e} > target {target:.3e} at iteration {iteration}.\n\n"
                    "  Raise epsilon (p < 2) or loosen the solver tolerance.",
                    best=u,
                    residual=residual,
                )

        new_value, new_grad, new_hess = asm.evaluate(trial, weights, p, eps, hessian=True)
        ds = trial[asm.interior] - interior
        curvature = float(ds @ (new_grad - grad))
        if curvature > 0:
            bb_step = float(ds @ ds) / curvature

        if not np.all(np.isfinite(new_grad)):
            raise SolverError("NaN encountered in the energy gradient.", best=u, residual=residual)
        u, value, grad, hess = trial, new_value, new_grad, new_hess
        history.append(value)
        logger.debug("newton %d: energy=%.16g residual=%.3e step=%g", iteration + 1, value, residual, step)

    raise SolverError(
        f"Forward solve did not converge in {config.max_iterations} iterations.\n\n"
        f"  Final residual:\n    {residual:.3e}\n\n"
        "  Raise max_iterations or epsilon, or coarsen the mesh.",
        best=u,
        residual=residual,
    )


# ==========================================
# Pairings
# ==========================================
def pairing_from_solutions(
    mesh: TriMesh, sigma, u: np.ndarray, v: np.ndarray, p: float, epsilon: float
) -> float:
    """Weak-form pairing sum of area * sigma * |grad u|^(p-2) grad u . grad v."""
    weights = mesh.areas * _sigma_array(mesh, sigma)
    return float(weights @ flux_density(mesh, u, v, p, epsilon))


def dn_pairing(
    mesh: TriMesh,
    sigma,
    f: BoundaryTrace,
    g: BoundaryTrace,
    config: SolverConfig,
) -> Pairing:
    """<Lambda_sigma(f), g> with ``v`` the sigma = 1 p-harmonic extension of ``g``.

    When ``g`` is ``f`` the solution itself is the extension.
    """
    f.check(mesh)
    g.check(mesh)
    u = solve_dirichlet(mesh, sigma, f, config).values
    if g is f or g.fingerprint == f.fingerprint:
        v = u
    else:
        v = solve_dirichlet(mesh, 1.0, g, config).values
    value = pairing_from_solutions(mesh, sigma, u, v, config.p, config.epsilon)
    return Pairing(value, (config.p - 1.0) * f.log_scale + g.log_scale)


def lambda_b_pairing(
    mesh: TriMesh,
    cells,
    f: BoundaryTrace,
    g: BoundaryTrace,
    config: SolverConfig,
) -> Pairing:
    """Background flux of f against g integrated over the cell set ``cells`` only."""
    cells = np.asarray(cells, dtype=np.int64).ravel()
    if cells.size == 0:
        raise ConfigError("Test region B must contain at least one cell.")
    u = solve_dirichlet(mesh, 1.0, f, config).values
    v = u if (g is f or g.fingerprint == f.fingerprint) else solve_dirichlet(mesh, 1.0, g, config).values
    density = flux_density(mesh, u, v, config.p, config.epsilon)
    value = float(mesh.areas[cells] @ density[cells])
    return Pairing(value, (config.p - 1.0) * f.log_scale + g.log_scale)


def monotonicity_bounds(
    mesh: TriMesh,
    sigma0,
    sigma1,
    f: BoundaryTrace,
    config: SolverConfig,
    slack: float = 1e-6,
) -> MonotonicityBounds:
    """Lower and upper estimates of <(Lambda_1 - Lambda_0) f, f> from u0 alone.

    Returns values on the stored trace (no log_scale applied).

    Raises:
        SolverError: if lower <= middle <= upper fails by more than
            ``slack * max(1, |middle|)``, which points at an inaccurate solve.
    """
    p, eps = config.p, float(config.epsilon)
    s0 = _sigma_array(mesh, sigma0)
    s1 = _sigma_array(mesh, sigma1)
    sol0 = solve_dirichlet(mesh, s0, f, config)
    sol1 = solve_dirichlet(mesh, s1, f, config)
    density = mesh.areas * energy_density(mesh, sol0.values, p, eps)

    root0 = s0 ** (1.0 / (p - 1.0))
    root1 = s1 ** (1.0 / (p - 1.0))
    lower = (p - 1.0) * float(density @ (s0 / root1 * (root1 - root0)))
    upper = float(density @ (s1 - s0))
    middle = sol1.energy - sol0.energy

    bounds = MonotonicityBounds(lower, middle, upper)
    if bounds.slack() < -slack * max(1.0, abs(middle)):
        raise SolverError(
            "Monotonicity sandwich violated; the forward solves are not accurate enough.\n\n"
            f"  lower = {lower!r}\n  middle = {middle!r}\n  upper = {upper!r}\n\n"
            "  Tighten the solver tolerance or reduce epsilon.",
            residual=max(sol0.residual, sol1.residual),
        )
    return bounds

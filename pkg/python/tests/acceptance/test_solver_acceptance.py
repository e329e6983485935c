"""Forward-solver properties checked on many random instances.

Deselected by default like the reconstruction runs:

    uv run pytest -m slow python/tests/acceptance/test_solver_acceptance.py
"""

import numpy as np
import pytest
from scipy.optimize import minimize

from pconduct.geometry import DomainSpec, build_mesh
from pconduct.psolver import BoundaryTrace, SolverConfig, dn_pairing, energy, monotonicity_bounds, solve_dirichlet

pytestmark = pytest.mark.slow


def _random_trace(mesh, rng, label="random"):
    pts = mesh.boundary_points() - 0.5
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    orders = np.arange(1, 5)
    a, b = rng.standard_normal((2, len(orders)))
    values = (a * np.cos(np.outer(theta, orders)) + b * np.sin(np.outer(theta, orders))) / orders
    return BoundaryTrace.from_values(mesh, values.sum(axis=1), label)


def _random_sigma(mesh, rng):
    center = rng.uniform(0.25, 0.75, 2)
    radius = rng.uniform(0.1, 0.3)
    inside = np.linalg.norm(mesh.centroids - center, axis=1) < radius
    return np.where(inside, rng.uniform(0.3, 3.0), 1.0)


# ==========================================
# Direct minimization on a tiny grid
# ==========================================
def _brute_force_energy(mesh, sigma, f, p, epsilon, rng, restarts=10):
    interior = mesh.interior_vertices
    weights = mesh.areas * sigma
    u = np.zeros(mesh.n_vertices)
    u[mesh.boundary_vertices] = f.values

    def objective(x):
        u[interior] = x
        g = mesh.cell_gradients(u)
        s = np.einsum("mi,mi->m", g, g) + epsilon**2
        value = float(weights @ s ** (p / 2))
        coeff = p * weights * s ** (p / 2 - 1)
        local = np.einsum("m,mi,mij->mj", coeff, g, mesh.gradients)
        full = np.zeros(mesh.n_vertices)
        np.add.at(full, mesh.triangles, local)
        return value, full[interior]

    best = np.inf
    for _ in range(restarts):
        start = rng.uniform(f.values.min(), f.values.max(), len(interior))
        result = minimize(objective, start, jac=True, method="BFGS", options={"gtol": 1e-13, "maxiter": 5000})
        best = min(best, result.fun)
    return best


@pytest.mark.parametrize("p", [1.5, 3.0])
@pytest.mark.parametrize("seed", range(3))
def test_solver_matches_direct_minimization(p, seed):
    mesh = build_mesh(DomainSpec.unit_square(), 4)
    rng = np.random.default_rng(seed)
    sigma = rng.uniform(0.5, 2.0, mesh.n_cells)
    f = _random_trace(mesh, rng)
    config = SolverConfig(p)
    sol = solve_dirichlet(mesh, sigma, f, config)
    direct = _brute_force_energy(mesh, sigma, f, p, config.epsilon, rng)
    assert sol.energy == pytest.approx(energy(mesh, sigma, sol.values, p, config.epsilon), rel=1e-12)
    assert sol.energy == pytest.approx(direct, rel=1e-8)


# ==========================================
# Homogeneity
# ==========================================
@pytest.fixture(scope="module")
def mesh12():
    return build_mesh(DomainSpec.unit_square(), 12)


@pytest.mark.parametrize("p", [1.5, 3.0])
@pytest.mark.parametrize("seed", range(10))
def test_self_pairing_is_p_homogeneous(mesh12, p, seed):
    rng = np.random.default_rng(100 + seed)
    sigma = _random_sigma(mesh12, rng)
    f = _random_trace(mesh12, rng)
    config = SolverConfig(p)
    base = dn_pairing(mesh12, sigma, f, f, config).value
    for factor in (0.5, 2.0, -1.0):
        g = f.scaled(factor)
        scaled = dn_pairing(mesh12, sigma, g, g, config).value
        assert scaled == pytest.approx(abs(factor) ** p * base, rel=1e-8)


# ==========================================
# Monotonicity sandwich
# ==========================================
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("seed", range(20))
def test_sandwich_holds_on_random_pairs(square_mesh, p, seed):
    rng = np.random.default_rng(1000 + seed)
    sigma0 = rng.uniform(0.5, 2.0) * _random_sigma(square_mesh, rng)
    sigma1 = sigma0 * np.where(rng.random(square_mesh.n_cells) < 0.3, rng.uniform(1.0, 3.0), 1.0)
    f = _random_trace(square_mesh, rng)
    bounds = monotonicity_bounds(square_mesh, sigma0, sigma1, f, SolverConfig(p))
    tol = 1e-6 * max(1.0, abs(bounds.middle))
    assert bounds.lower - bounds.middle <= tol
    assert bounds.middle - bounds.upper <= tol
    assert bounds.middle >= -tol

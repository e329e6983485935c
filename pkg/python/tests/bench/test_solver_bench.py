"""Forward solves: the cost every oracle query pays on a cache miss.

    pytest python/tests/bench/test_solver_bench.py --benchmark-save=baseline
    # change the assembler or the Newton loop, then:
    pytest python/tests/bench/test_solver_bench.py --benchmark-compare=baseline
"""

from __future__ import annotations

import pytest

from pconduct.psolver import BoundaryTrace, SolverConfig, solve_dirichlet, solve_linear

from .conftest import make_oracles


def _trace(mesh):
    return BoundaryTrace.from_function(mesh, lambda x: x[:, 0] + 0.5 * x[:, 1] ** 2, "bench")


def test_linear_solve(benchmark, bench_mesh):
    f = _trace(bench_mesh)
    u = benchmark(lambda: solve_linear(bench_mesh, 1.0, f))
    assert u.shape == (bench_mesh.n_vertices,)


@pytest.mark.parametrize("p", [2.0, 3.0, 4.0])
def test_newton_solve(benchmark, bench_mesh, p):
    f = _trace(bench_mesh)
    config = SolverConfig(p)
    solution = benchmark(lambda: solve_dirichlet(bench_mesh, 1.0, f, config))
    assert solution.residual <= config.tolerance * (1.0 + abs(solution.energy))


def test_uncached_pairing(benchmark, bench_mesh):
    """Every call re-solves; compare with the cached oracle below."""
    oracle, _ = make_oracles(bench_mesh, cache=False)
    f = _trace(bench_mesh)
    benchmark(lambda: oracle.pair(f))


def test_cached_pairing(benchmark, bench_mesh):
    oracle, _ = make_oracles(bench_mesh)
    f = _trace(bench_mesh)
    oracle.pair(f)
    benchmark(lambda: oracle.pair(f))
    assert oracle.solves == 1

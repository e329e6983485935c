"""Periodic Wolff profiles and the exponential fields built from them."""

import math

import numpy as np
import pytest

from pconduct.errors import ConfigError, SolverError
from pconduct.geometry import DomainSpec, build_mesh
from pconduct.psolver import SolverConfig, solve_dirichlet
from pconduct.wolff import (
    WolffField,
    boundary_trace,
    field_value,
    integrate_wolff,
    period_guess,
    v_coefficient,
)


def test_linear_case_is_a_cosine(wolff2):
    assert wolff2.lambda_p == pytest.approx(2.0 * math.pi, abs=1e-8)
    assert wolff2.c_emp == pytest.approx(1.0, abs=1e-8)
    assert wolff2.C_emp == pytest.approx(1.0, abs=1e-8)
    assert np.allclose(wolff2.w, np.cos(wolff2.s), atol=1e-8)
    assert abs(wolff2.mean) < 1e-8


@pytest.mark.parametrize("p", [1.5, 3.0, 4.0, 8.0])
def test_profile_closes_after_one_period(p):
    sol = integrate_wolff(p)
    assert sol.closure_error < 1e-6
    assert sol.lambda_p >= period_guess(p) * (1.0 - 1e-9)
    assert 0.0 < sol.c_emp <= sol.C_emp
    # the sampled orbit stays in the annulus c <= w^2 + w'^2 <= C
    radius2 = sol.w**2 + sol.dw**2
    assert radius2.min() >= sol.c_emp * (1.0 - 1e-9)
    assert radius2.max() <= sol.C_emp * (1.0 + 1e-9)


def test_profile_interpolation_is_periodic(wolff3):
    s = np.linspace(0.0, wolff3.lambda_p, 17)
    w0, dw0 = wolff3.profile(s)
    w1, dw1 = wolff3.profile(s + 3.0 * wolff3.lambda_p)
    assert np.allclose(w0, w1, atol=1e-9)
    assert np.allclose(dw0, dw1, atol=1e-9)


def test_profile_matches_samples(wolff3):
    w, dw = wolff3.profile(wolff3.s)
    assert np.allclose(w, wolff3.w, atol=1e-12)
    assert np.allclose(dw, wolff3.dw, atol=1e-12)


def test_v_coefficient_is_one_for_p2():
    assert v_coefficient(2.0, 0.3, -0.7) == pytest.approx(1.0)
    assert np.allclose(v_coefficient(2.0, np.array([1.0, 0.2]), np.array([0.0, 2.0])), 1.0)


def test_v_coefficient_undefined_at_origin():
    with pytest.raises(ConfigError, match="undefined at the origin"):
        v_coefficient(3.0, 0.0, 0.0)


@pytest.mark.parametrize(
    ("kwargs", "message"),
    [
        ({"p": 1.0}, "Exponent"),
        ({"p": 3.0, "a0": 0.0, "b0": 0.0}, "zero solution"),
        ({"p": 3.0, "samples": 100}, "512 samples"),
    ],
)
def test_integrate_rejects_bad_input(kwargs, message):
    with pytest.raises(ConfigError, match=message):
        integrate_wolff(**kwargs)


# ==========================================
# Fields
# ==========================================
def test_boundary_trace_is_normalized_field(wolff3):
    mesh = build_mesh(DomainSpec.unit_square(), 12)
    field = WolffField(wolff3, (0.6, 0.8), 0.3, 2.0)
    trace = boundary_trace(field, mesh)
    u, _ = field_value(field, mesh.boundary_points())
    assert trace.sup_norm == pytest.approx(1.0)
    assert np.allclose(trace.values * math.exp(trace.log_scale), u, rtol=1e-9, atol=1e-12)


def test_trace_values_do_not_depend_on_offset(wolff3):
    mesh = build_mesh(DomainSpec.unit_square(), 12)
    a = boundary_trace(WolffField(wolff3, (1.0, 0.0), 0.2, 5.0), mesh)
    b = boundary_trace(WolffField(wolff3, (1.0, 0.0), 0.9, 5.0), mesh)
    assert a.fingerprint == b.fingerprint
    assert a.log_scale - b.log_scale == pytest.approx(5.0 * 0.7)


def test_field_gradient_matches_finite_differences(wolff3):
    field = WolffField(wolff3, (0.0, 1.0), 0.0, 1.7)
    x = np.array([0.3, 0.4])
    _, grad = field_value(field, x)
    h = 1e-6
    numeric = [
        (field_value(field, x + h * e)[0] - field_value(field, x - h * e)[0]) / (2.0 * h)
        for e in np.eye(2)
    ]
    assert np.allclose(grad, numeric, rtol=1e-4, atol=1e-6)


def test_field_overflow_is_reported(wolff2):
    field = WolffField(wolff2, (1.0, 0.0), 0.0, 400.0)
    with pytest.raises(SolverError, match="overflows"):
        field_value(field, [1.0, 0.0])


def test_field_rejects_non_unit_direction(wolff2):
    with pytest.raises(ConfigError, match="unit vector"):
        WolffField(wolff2, (1.0, 1.0), 0.0, 1.0)


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_field_is_discretely_p_harmonic(p):
    """The forward solve with Wolff boundary data reproduces the field inside."""
    mesh = build_mesh(DomainSpec.unit_square(), 24)
    field = WolffField(integrate_wolff(p), (1.0, 0.0), 1.0, 1.5)
    trace = boundary_trace(field, mesh)
    sol = solve_dirichlet(mesh, 1.0, trace, SolverConfig(p))
    exact, _ = field_value(field, mesh.vertices)
    approx = sol.values * math.exp(trace.log_scale)
    assert np.max(np.abs(approx - exact)) <= 0.03 * np.max(np.abs(exact))

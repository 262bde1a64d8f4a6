"""Tests for the finite-difference operators, quadrature and Green's identity."""

import numpy as np
import pytest

from pybiharmonic.fields import from_function
from pybiharmonic.grid import build_grid
from pybiharmonic.models.coefficients import CoefficientSet, FieldTraces
from pybiharmonic.models.fields import ScalarField, VectorField
from pybiharmonic.operators import (
    apply_L,
    apply_L_adjoint,
    bilaplacian,
    greens_identity_residual,
    laplacian,
    newton_cotes_weights,
    solve_poisson_dirichlet,
    tensor_weights,
    traced,
)

# Test constants
GREEN_N = 31


def _constant(grid, value):
    return ScalarField(grid=grid, values=np.full(grid.shape, value, dtype=complex))


def test_laplacian_exact_on_cubics(grid):
    """Test Δ(x1³ + x2²) = 6x1 + 2, boundary layer included."""
    f = from_function(grid, lambda x, y, z: x**3 + y**2)
    expected = from_function(grid, lambda x, y, z: 6 * x + 2 + 0 * y)
    assert np.allclose(laplacian(f).values, expected.values, atol=1e-8)


def test_laplacian_uses_boundary_trace(grid):
    """Test that a given trace replaces the extrapolated boundary layer."""
    f = from_function(grid, lambda x, y, z: x**2)
    trace = _constant(grid, 7.0)
    lap = laplacian(f, trace)
    assert lap.values[0, 4, 4] == 7.0
    assert lap.values[3, 4, 4] == pytest.approx(2.0)


def test_bilaplacian_of_quadratic_vanishes(grid):
    """Test Δ²|x|² = 0 with the exact trace Δ|x|² = 6."""
    f = from_function(grid, lambda x, y, z: x**2 + y**2 + z**2)
    assert np.allclose(bilaplacian(f, _constant(grid, 6.0)).values, 0.0, atol=1e-7)


def test_apply_L_first_and_zeroth_order(grid):
    """Test 𝓛u = A·Du + qu for u = x1² with constant A and q."""
    u = from_function(grid, lambda x, y, z: x**2)
    A = VectorField.from_arrays(
        grid, (np.full(grid.shape, 0.5), np.zeros(grid.shape), np.zeros(grid.shape))
    )
    coeffs = CoefficientSet(A=A, q=_constant(grid, 3.0))
    result = apply_L(coeffs, u, _constant(grid, 2.0))
    expected = -1j * 0.5 * 2.0 * u.grid.mesh()[0] + 3.0 * u.values
    assert np.allclose(result.values, expected, atol=1e-7)


def test_adjoint_coefficients(grid):
    """Test that the adjoint of a real potential with A = 0 is itself."""
    q = from_function(grid, lambda x, y, z: x * y)
    coeffs = CoefficientSet(A=VectorField.zeros(grid), q=q)
    u = from_function(grid, lambda x, y, z: z**2)
    assert np.allclose(
        apply_L_adjoint(coeffs, u).values, apply_L(coeffs, u).values
    )
    assert not coeffs.has_first_order


def test_newton_cotes_weights_exact_for_cubics(grid):
    """Test ∫₀¹ x³ dx = 1/4 for both node parities."""
    for points in (grid.N + 2, grid.N + 3):
        spacing = 1.0 / (points - 1)
        weights = newton_cotes_weights(points, spacing)
        x = spacing * np.arange(points)
        assert weights.sum() == pytest.approx(1.0)
        assert weights @ x**3 == pytest.approx(0.25)
    with pytest.raises(ValueError, match="three nodes"):
        newton_cotes_weights(2, 1.0)


def test_tensor_weights_volume(grid):
    """Test that the cube weights integrate one to one."""
    assert tensor_weights(grid, grid.n).sum() == pytest.approx(1.0)


def test_greens_identity_for_quadratics(grid):
    """Test the identity for u = x1², v = x2² and a constant potential."""
    coeffs = CoefficientSet(A=VectorField.zeros(grid), q=_constant(grid, 1.5))
    u = traced(from_function(grid, lambda x, y, z: x**2), _constant(grid, 2.0))
    v = traced(from_function(grid, lambda x, y, z: y**2), _constant(grid, 2.0))
    assert greens_identity_residual(coeffs, u, v) < 1e-8


def test_greens_identity_needs_traces(grid, zero_coeffs):
    """Test that incomplete traces are rejected."""
    bare = FieldTraces(field=ScalarField.zeros(grid))
    with pytest.raises(ValueError, match="missing boundary traces"):
        greens_identity_residual(zero_coeffs, bare, bare)


def test_poisson_inverts_discrete_laplacian(grid):
    """Test that the DST solve inverts the 7-point Dirichlet Laplacian."""
    rng = np.random.default_rng(3)
    values = np.zeros(grid.shape, dtype=complex)
    values[grid.interior] = rng.standard_normal(grid.interior_shape) + 1j * rng.standard_normal(
        grid.interior_shape
    )
    phi = ScalarField(grid=grid, values=values)
    recovered = solve_poisson_dirichlet(laplacian(phi))
    assert np.allclose(recovered.values, values, atol=1e-10)


def _sines(kx, ky, kz):
    def fn(x, y, z):
        return np.sin(kx * np.pi * x) * np.sin(ky * np.pi * y) * np.sin(kz * np.pi * z)

    return fn


def test_greens_identity_for_sine_products():
    """Test the sine product: both volume terms near 9π⁴‖u‖², residual below 1e-6."""
    grid = build_grid(3, GREEN_N)
    zero = CoefficientSet.zeros(grid)
    u_field = from_function(grid, _sines(1, 1, 1))
    v_field = from_function(grid, _sines(1, 2, 1))
    u = traced(u_field, u_field * (-3.0 * np.pi**2))
    v = traced(v_field, v_field * (-6.0 * np.pi**2))
    assert greens_identity_residual(zero, u, u) < 1e-6
    assert greens_identity_residual(zero, u, v) < 1e-6

    weights = tensor_weights(grid, grid.n)
    volume = np.sum(weights * apply_L(zero, u_field, u.laplacian).values * u_field.values)
    norm_sq = np.sum(weights * np.abs(u_field.values) ** 2)
    assert volume.real == pytest.approx(9.0 * np.pi**4 * norm_sq, rel=1e-2)

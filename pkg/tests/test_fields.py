"""Tests for grid fields and the discrete differential calculus."""

import numpy as np
import pytest

from pybiharmonic.fields import (
    d_cap,
    d_operator,
    divergence,
    dot,
    from_function,
    gradient,
    vector_from_functions,
)
from pybiharmonic.models.fields import (
    PeriodicField,
    ScalarField,
    TwoFormField,
    VectorField,
    form_pairs,
)
from pybiharmonic.norms import linf_norm


def test_scalar_field_validation(grid):
    """Test shape and finiteness checks."""
    with pytest.raises(ValueError, match="does not match grid"):
        ScalarField(grid=grid, values=np.zeros((3, 3, 3)))
    values = np.zeros(grid.shape)
    values[1, 1, 1] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        ScalarField(grid=grid, values=values)


def test_scalar_field_is_read_only(grid):
    """Test that stored values cannot be modified in place."""
    field = ScalarField.zeros(grid)
    with pytest.raises(ValueError):
        field.values[0, 0, 0] = 1.0


def test_scalar_field_arithmetic(grid):
    """Test the field operators and the boundary-layer copy."""
    f = from_function(grid, lambda x, y, z: x + 1j * y)
    g = from_function(grid, lambda x, y, z: z)
    assert np.allclose((f + g).values, f.values + g.values)
    assert np.allclose((f - g).values, f.values - g.values)
    assert np.allclose((2.0 * f).values, 2.0 * f.values)
    assert np.allclose((-f).values, -f.values)
    assert np.allclose(f.conj().values, np.conj(f.values))
    layer = g.boundary_layer()
    assert np.all(layer[grid.interior] == 0)
    assert layer[-1, 3, 3] == pytest.approx(g.values[-1, 3, 3])


def test_periodic_extension_round_trip(grid):
    """Test that restricting a zero extension gives the field back."""
    f = from_function(grid, lambda x, y, z: np.sin(x) * y)
    box = PeriodicField.extend(f)
    assert box.values.shape == grid.box_shape
    assert np.array_equal(box.restrict().values, f.values)
    assert np.all(box.values[grid.N + 2 :] == 0)


def test_vector_field_component_count(grid):
    """Test that a vector field needs exactly n components."""
    with pytest.raises(ValueError, match="expected 3"):
        VectorField(components=(ScalarField.zeros(grid),) * 2)


def test_gradient_of_linear_function_is_exact(grid):
    """Test ∇(x1 + 2x2 − x3) = (1, 2, −1) on every node."""
    f = from_function(grid, lambda x, y, z: x + 2 * y - z)
    grad = gradient(f)
    for component, expected in zip(grad.components, (1.0, 2.0, -1.0)):
        assert np.allclose(component.values, expected, atol=1e-10)


def test_divergence(grid):
    """Test div(x1, x2, x3) = 3."""
    A = vector_from_functions(
        grid, [lambda x, y, z: x, lambda x, y, z: y, lambda x, y, z: z]
    )
    assert np.allclose(divergence(A).values, 3.0, atol=1e-10)


def test_d_of_gradient_vanishes_for_quadratics(grid):
    """Test that d∇f = 0 for a quadratic, boundary layer included."""
    f = from_function(grid, lambda x, y, z: x * y + 3 * z**2 - y * z + x**2)
    form = d_operator(gradient(f))
    assert linf_norm(form) < 1e-9


def test_d_operator_components(grid):
    """Test dA for A = (−x2, x1, 0): the (1, 2) entry is 2, the others vanish."""
    A = vector_from_functions(
        grid, [lambda x, y, z: -y, lambda x, y, z: x, lambda x, y, z: 0 * x]
    )
    form = d_operator(A)
    assert form.pairs == ((0, 1), (0, 2), (1, 2))
    assert np.allclose(form.component(0, 1).values, 2.0, atol=1e-10)
    assert np.allclose(form.component(1, 0).values, -2.0, atol=1e-10)
    assert np.allclose(form.component(0, 2).values, 0.0, atol=1e-10)
    assert np.all(form.component(2, 2).values == 0)


def test_two_form_component_count(grid):
    """Test that a two-form in three dimensions has three components."""
    assert form_pairs(4) == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    with pytest.raises(ValueError, match="expected 3"):
        TwoFormField(components=(ScalarField.zeros(grid),))


def test_d_cap_and_dot(grid):
    """Test D = −i∇ and the unconjugated pointwise product."""
    f = from_function(grid, lambda x, y, z: 2 * x)
    D = d_cap(f)
    assert np.allclose(D.components[0].values, -2j, atol=1e-10)
    ones = VectorField.from_arrays(grid, tuple(np.ones(grid.shape) for _ in range(3)))
    assert np.allclose(dot(ones, D).values, -2j, atol=1e-10)

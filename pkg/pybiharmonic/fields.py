"""Discrete differential calculus on closed-grid fields.

All first derivatives use second-order central differences inside and
second-order one-sided differences on the boundary layer, so that
``d_operator(gradient(f))`` vanishes identically for quadratics.
"""

from typing import Callable, Sequence

import numpy as np

from pybiharmonic.models.fields import (
    ScalarField,
    TwoFormField,
    VectorField,
    form_pairs,
)
from pybiharmonic.models.grid import GridSpec


def from_function(grid: GridSpec, fn: Callable[..., np.ndarray]) -> ScalarField:
    """Sample ``fn(x1, ..., xn)`` on the closed grid."""
    values = np.broadcast_to(fn(*grid.mesh()), grid.shape)
    return ScalarField(grid=grid, values=values)


def vector_from_functions(
    grid: GridSpec, fns: Sequence[Callable[..., np.ndarray]]
) -> VectorField:
    return VectorField(components=tuple(from_function(grid, fn) for fn in fns))


def partial(values: np.ndarray, spacing: float, axis: int) -> np.ndarray:
    return np.gradient(values, spacing, axis=axis, edge_order=2)


def gradient(f: ScalarField) -> VectorField:
    """∇f."""
    spacing = f.grid.spacing
    return VectorField.from_arrays(
        f.grid, tuple(partial(f.values, spacing, k) for k in range(f.grid.n))
    )


def divergence(A: VectorField) -> ScalarField:
    """div A."""
    spacing = A.grid.spacing
    total = np.zeros(A.grid.shape, dtype=np.complex128)
    for k, component in enumerate(A.components):
        total += partial(component.values, spacing, k)
    return ScalarField(grid=A.grid, values=total)


def d_operator(A: VectorField) -> TwoFormField:
    """Exterior derivative, components ∂_j A_k − ∂_k A_j for j < k."""
    spacing = A.grid.spacing
    components = []
    for j, k in form_pairs(A.grid.n):
        dj_ak = partial(A.components[k].values, spacing, j)
        dk_aj = partial(A.components[j].values, spacing, k)
        components.append(ScalarField(grid=A.grid, values=dj_ak - dk_aj))
    return TwoFormField(components=tuple(components))


def d_cap(f: ScalarField) -> VectorField:
    """D = −i∇."""
    return gradient(f) * (-1j)


def dot(A: VectorField, B: VectorField) -> ScalarField:
    """Pointwise bilinear product Σ A_k B_k (no conjugation)."""
    total = np.zeros(A.grid.shape, dtype=np.complex128)
    for a, b in zip(A.components, B.components):
        total += a.values * b.values
    return ScalarField(grid=A.grid, values=total)

"""Finite-difference operators Δ, Δ², 𝓛_{A,q}, Green's identity and Poisson.

Operator outputs are defined on interior nodes by the stencils and carried to
the boundary layer by cubic extrapolation, so the quadratures below see a
closed-grid field that is exact on cubic polynomials.
"""

import logging
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import fft as sfft

from pybiharmonic.boundary import normal_traces
from pybiharmonic.fields import partial
from pybiharmonic.models.coefficients import CoefficientSet, FieldTraces
from pybiharmonic.models.fields import ScalarField
from pybiharmonic.models.grid import GridSpec, all_faces

logger = logging.getLogger(__name__)

CUBIC_EXTRAPOLATION = (4.0, -6.0, 4.0, -1.0)


def interior_laplacian(values: np.ndarray, spacing: float) -> np.ndarray:
    """(2n+1)-point Laplacian on interior nodes of a closed-grid array."""
    n = values.ndim
    core = (slice(1, -1),) * n
    out = -2.0 * n * values[core]
    for axis in range(n):
        plus = list(core)
        minus = list(core)
        plus[axis] = slice(2, None)
        minus[axis] = slice(None, -2)
        out = out + values[tuple(plus)] + values[tuple(minus)]
    return out / spacing**2


def extrapolate_boundary(interior: np.ndarray) -> np.ndarray:
    """Pad an interior array with one cubically extrapolated layer per side."""
    out = interior
    for axis in range(interior.ndim):
        take = lambda i, a=axis: np.take(out, [i], axis=a)  # noqa: E731
        low = sum(c * take(i) for i, c in enumerate(CUBIC_EXTRAPOLATION))
        high = sum(c * take(-1 - i) for i, c in enumerate(CUBIC_EXTRAPOLATION))
        out = np.concatenate([low, out, high], axis=axis)
    return out


def _with_boundary(interior: np.ndarray, boundary: np.ndarray) -> np.ndarray:
    out = np.array(boundary, dtype=np.complex128)
    out[(slice(1, -1),) * interior.ndim] = interior
    return out


def laplacian(f: ScalarField, boundary: Optional[ScalarField] = None) -> ScalarField:
    """Δ_h f; the boundary layer comes from ``boundary`` or from extrapolation."""
    inner = interior_laplacian(f.values, f.grid.spacing)
    if boundary is None:
        return ScalarField(grid=f.grid, values=extrapolate_boundary(inner))
    return ScalarField(grid=f.grid, values=_with_boundary(inner, boundary.values))


def bilaplacian(
    f: ScalarField, laplacian_trace: Optional[ScalarField] = None
) -> ScalarField:
    """Δ_h ∘ Δ_h, using ``laplacian_trace`` as the boundary layer of Δf."""
    return laplacian(laplacian(f, laplacian_trace))


def first_order_term(A_values: np.ndarray, f: ScalarField) -> np.ndarray:
    """A·D f with D = −i∇, central inside, one-sided on the boundary layer."""
    total = np.zeros(f.grid.shape, dtype=np.complex128)
    for k in range(f.grid.n):
        total += A_values[k] * partial(f.values, f.grid.spacing, k)
    return -1j * total


def apply_L(
    coeffs: CoefficientSet,
    u: ScalarField,
    laplacian_trace: Optional[ScalarField] = None,
) -> ScalarField:
    """𝓛_{A,q}u = Δ²u + A·Du + qu.

    Args:
        coeffs: Operator coefficients
        u: Closed-grid field
        laplacian_trace: Field whose boundary layer holds Δu on ∂Ω; when
            omitted the boundary layer of Δu is extrapolated

    Returns:
        Closed-grid field
    """
    out = bilaplacian(u, laplacian_trace).values
    out = out + first_order_term(coeffs.A.stack(), u) + coeffs.q.values * u.values
    return ScalarField(grid=u.grid, values=out)


def apply_L_adjoint(
    coeffs: CoefficientSet,
    u: ScalarField,
    laplacian_trace: Optional[ScalarField] = None,
) -> ScalarField:
    """Formal adjoint 𝓛_{Ā, q̄ − i div Ā}."""
    return apply_L(coeffs.adjoint(), u, laplacian_trace)


@lru_cache(maxsize=32)
def newton_cotes_weights(points: int, spacing: float) -> np.ndarray:
    """Composite weights on ``points`` equispaced nodes, exact for cubics."""
    intervals = points - 1
    if intervals < 2:
        raise ValueError("Need at least three nodes for cubic-exact quadrature")
    w = np.zeros(points)
    simpson = intervals if intervals % 2 == 0 else intervals - 3
    for start in range(0, simpson, 2):
        w[start : start + 3] += np.array([1.0, 4.0, 1.0]) * spacing / 3.0
    if simpson != intervals:
        w[simpson : simpson + 4] += np.array([1.0, 3.0, 3.0, 1.0]) * 3.0 * spacing / 8.0
    w.setflags(write=False)
    return w


def tensor_weights(grid: GridSpec, dims: int) -> np.ndarray:
    w1 = newton_cotes_weights(grid.N + 2, grid.spacing)
    out = np.ones(())
    for _ in range(dims):
        out = np.multiply.outer(out, w1)
    return out


def traced(u: ScalarField, laplacian_field: ScalarField) -> FieldTraces:
    """Bundle a field with Δu and the outward normal traces of u and Δu."""
    return FieldTraces(
        field=u,
        laplacian=laplacian_field,
        normal=normal_traces(u),
        normal_laplacian=normal_traces(laplacian_field),
    )


def greens_identity_residual(
    coeffs: CoefficientSet, u: FieldTraces, v: FieldTraces
) -> float:
    """|⟨𝓛u, v⟩ − ⟨u, 𝓛*v⟩ − boundary terms| by cubic-exact quadrature.

    The boundary terms are −i∫ν·A u v̄ + ∫∂_νΔu v̄ − ∫Δu ∂_νv̄ + ∫∂_νu Δv̄
    − ∫u ∂_νΔv̄.

    Raises:
        ValueError: If either field lacks a boundary trace
    """
    if not (u.complete and v.complete):
        raise ValueError("missing boundary traces: need u, Δu, ∂_νu and ∂_νΔu")
    grid = u.field.grid
    lu = apply_L(coeffs, u.field, u.laplacian)
    lv = apply_L_adjoint(coeffs, v.field, v.laplacian)
    w_vol = tensor_weights(grid, grid.n)
    volume = np.sum(w_vol * (lu.values * np.conj(v.field.values))) - np.sum(
        w_vol * (u.field.values * np.conj(lv.values))
    )

    w_face = tensor_weights(grid, grid.n - 1)
    A = coeffs.A.stack()
    boundary = 0.0 + 0.0j
    for i, face in enumerate(all_faces(grid)):
        idx = face.index(grid)
        uf = u.field.values[idx]
        vf = v.field.values[idx]
        lap_u = u.laplacian.values[idx]  # type: ignore[union-attr]
        lap_v = v.laplacian.values[idx]  # type: ignore[union-attr]
        dn_u = u.normal[i]  # type: ignore[index]
        dn_v = v.normal[i]  # type: ignore[index]
        dn_lap_u = u.normal_laplacian[i]  # type: ignore[index]
        dn_lap_v = v.normal_laplacian[i]  # type: ignore[index]
        nu_A = face.outward_sign * A[face.axis][idx]
        integrand = (
            -1j * nu_A * uf * np.conj(vf)
            + dn_lap_u * np.conj(vf)
            - lap_u * np.conj(dn_v)
            + dn_u * np.conj(lap_v)
            - uf * np.conj(dn_lap_v)
        )
        boundary += np.sum(w_face * integrand)
    residual = abs(volume - boundary)
    logger.debug("Green residual %.3e (volume %.3e)", residual, abs(volume))
    return float(residual)


@lru_cache(maxsize=8)
def _dirichlet_eigenvalues(grid: GridSpec) -> np.ndarray:
    k = np.arange(1, grid.N + 1)
    lam1 = (2.0 * np.cos(np.pi * k / (grid.N + 1)) - 2.0) / grid.spacing**2
    total = np.zeros(grid.interior_shape)
    for axis in range(grid.n):
        shape = [1] * grid.n
        shape[axis] = -1
        total = total + lam1.reshape(shape)
    total.setflags(write=False)
    return total


def _dst_solve(rhs: np.ndarray, eigen: np.ndarray) -> np.ndarray:
    return sfft.idstn(sfft.dstn(rhs, type=1) / eigen, type=1)


def solve_poisson_dirichlet(rhs: ScalarField) -> ScalarField:
    """Exact inverse of the discrete Dirichlet Laplacian by DST-I.

    Only the interior of ``rhs`` is read; the solution vanishes on ∂Ω.
    """
    grid = rhs.grid
    eigen = _dirichlet_eigenvalues(grid)
    inner = rhs.interior
    solution = _dst_solve(inner.real, eigen) + 1j * _dst_solve(inner.imag, eigen)
    values = np.zeros(grid.shape, dtype=np.complex128)
    values[grid.interior] = solution
    return ScalarField(grid=grid, values=values)

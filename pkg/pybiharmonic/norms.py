"""Norms on grid fields.

FFT convention: forward transform with kernel e^{−ix·ξ}, unnormalized, so
``spacing**n * fftn(f)`` approximates ∫ f e^{−ix·ξ} dx on the box of side 2;
the inverse carries 1/Mⁿ. Box wavenumbers are ``2π * fftfreq(M, spacing)``.
"""

import logging
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import fft as sfft

from pybiharmonic.models.fields import (
    AnyField,
    FaceCoefficients,
    InterpolationReport,
    NormKind,
    PeriodicField,
    ScalarField,
    SobolevIndex,
    TwoFormField,
    VectorField,
)
from pybiharmonic.models.grid import GridSpec

logger = logging.getLogger(__name__)

BOX_SIDE = 2.0


@lru_cache(maxsize=16)
def _box_frequency_squares(grid: GridSpec) -> np.ndarray:
    freqs = 2.0 * np.pi * np.fft.fftfreq(grid.box_size, d=grid.spacing)
    total = np.zeros(grid.box_shape)
    for k in range(grid.n):
        shape = [1] * grid.n
        shape[k] = -1
        total = total + (freqs**2).reshape(shape)
    total.setflags(write=False)
    return total


def box_wavenumbers(grid: GridSpec) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(grid.box_size, d=grid.spacing)


def _components(f: AnyField) -> Tuple[Union[ScalarField, PeriodicField], ...]:
    if isinstance(f, (VectorField, TwoFormField)):
        return f.components
    return (f,)


def l2_norm(f: AnyField, mask: Optional[np.ndarray] = None) -> float:
    """(spacingⁿ Σ |f|²)^{1/2}, optionally restricted to a node mask."""
    total = 0.0
    for c in _components(f):
        values = c.values if mask is None else c.values[mask]
        total += float(np.sum(np.abs(values) ** 2))
    return float(np.sqrt(c.grid.cell_volume * total))


def l1_norm(f: AnyField) -> float:
    """spacingⁿ Σ |f|, summed over components; bounds every |𝓕(f_k)(ξ)|."""
    components = _components(f)
    total = sum(float(np.sum(np.abs(c.values))) for c in components)
    return components[0].grid.cell_volume * total


def linf_norm(f: AnyField, mask: Optional[np.ndarray] = None) -> float:
    best = 0.0
    for c in _components(f):
        values = c.values if mask is None else c.values[mask]
        if values.size:
            best = max(best, float(np.max(np.abs(values))))
    return best


def _box_values(c: Union[ScalarField, PeriodicField], s: float) -> np.ndarray:
    if isinstance(c, PeriodicField):
        return c.values
    if s > 0.0 and np.any(c.boundary_layer() != 0.0):
        raise ValueError(
            "zero-extension invalid: field does not vanish on the boundary layer"
        )
    return PeriodicField.extend(c).values


def sobolev_norm(f: AnyField, s: float) -> float:
    """H^s norm of the zero extension to the periodic box of side 2.

    Raises:
        ValueError: If ``s`` is positive and a Ω-field does not vanish on ∂Ω
    """
    total = 0.0
    grid = _components(f)[0].grid
    weight = (1.0 + _box_frequency_squares(grid)) ** s
    scale = grid.cell_volume / float(grid.box_size**grid.n)
    for c in _components(f):
        spectrum = sfft.fftn(_box_values(c, s))
        total += float(np.sum(weight * np.abs(spectrum) ** 2))
    return float(np.sqrt(scale * total))


def h1_scl_norm(f: AnyField, scl: float, mask: Optional[np.ndarray] = None) -> float:
    """(‖f‖² + ‖scl·∇f‖²)^{1/2} with finite-difference gradients."""
    total = l2_norm(f, mask) ** 2
    for c in _components(f):
        grid = c.grid
        for k in range(grid.n):
            deriv = np.gradient(c.values, grid.spacing, axis=k, edge_order=2)
            values = deriv if mask is None else deriv[mask]
            total += scl**2 * grid.cell_volume * float(np.sum(np.abs(values) ** 2))
    return float(np.sqrt(total))


def hk_norm(
    f: AnyField, k: int, mask: Optional[np.ndarray] = None, scl: float = 1.0
) -> float:
    """Integer-order Sobolev norm from repeated second-order differences.

    Each multi-index of order ≤ k is counted once, weighted by scl^{|α|}.
    """
    if k < 0:
        raise ValueError("Order must be nonnegative")
    total = 0.0
    for c in _components(f):
        grid = c.grid
        cache: Dict[Tuple[int, ...], np.ndarray] = {(): c.values}
        for order in range(1, k + 1):
            for alpha in combinations_with_replacement(range(grid.n), order):
                parent = cache[alpha[:-1]]
                cache[alpha] = np.gradient(
                    parent, grid.spacing, axis=alpha[-1], edge_order=2
                )
        for alpha, values in cache.items():
            data = values if mask is None else values[mask]
            total += scl ** (2 * len(alpha)) * float(np.sum(np.abs(data) ** 2))
    return float(np.sqrt(_components(f)[0].grid.cell_volume * total))


def norm(f: AnyField, idx: SobolevIndex) -> float:
    """Evaluate the norm selected by ``idx``."""
    if idx.kind == NormKind.L2:
        return l2_norm(f)
    if idx.kind == NormKind.LINF:
        return linf_norm(f)
    if idx.kind == NormKind.H1_SCL:
        return h1_scl_norm(f, float(idx.scl))  # type: ignore[arg-type]
    return sobolev_norm(f, idx.s)


def boundary_norm(coeffs: Sequence[FaceCoefficients], t: float) -> float:
    """Σ over faces of (Σ_k (1+λ_k)^t |c_k|²)^{1/2}.

    Raises:
        ValueError: If a face has a different number of coefficients and
            eigenvalues
    """
    total = 0.0
    for face in coeffs:
        if face.values.shape != face.eigenvalues.shape:
            raise ValueError(
                f"basis size mismatch on face {face.face}: "
                f"{face.values.size} coefficients, {face.eigenvalues.size} modes"
            )
        total += float(
            np.sqrt(np.sum((1.0 + face.eigenvalues) ** t * np.abs(face.values) ** 2))
        )
    return total


def check_interpolation(
    f: AnyField, s_low: float, s_mid: float, s_high: float
) -> InterpolationReport:
    """Compare ‖f‖_{s_mid} with ‖f‖_{s_low}^θ ‖f‖_{s_high}^{1−θ}.

    Raises:
        ValueError: Unless s_low < s_mid < s_high
    """
    if not (s_low < s_mid < s_high):
        raise ValueError(
            f"interpolation indices must satisfy s_low < s_mid < s_high, "
            f"got {s_low}, {s_mid}, {s_high}"
        )
    theta = (s_high - s_mid) / (s_high - s_low)
    lhs = sobolev_norm(f, s_mid)
    rhs = sobolev_norm(f, s_low) ** theta * sobolev_norm(f, s_high) ** (1.0 - theta)
    if lhs == 0.0 and rhs == 0.0:
        ratio = 1.0
    else:
        ratio = lhs / rhs
    return InterpolationReport(lhs=lhs, rhs=rhs, ratio=ratio, theta=theta)


def fourier_transform_at(f: ScalarField, xi: Sequence[float]) -> complex:
    """Quadrature of ∫ f e^{−ix·ξ} dx over the closed grid."""
    grid = f.grid
    phase = np.zeros(grid.shape)
    for x_k, xi_k in zip(grid.mesh(), xi):
        phase = phase + x_k * xi_k
    return complex(grid.cell_volume * np.sum(f.values * np.exp(-1j * phase)))

"""Complex geometric optics solutions u = e^{ix·ζ/τ}(a + r).

The remainder r is obtained on the periodic box of side 2 by a Neumann
iteration around the inverse of the ζ-conjugated bilaplacian symbol,

    p(κ) = (−τ²|κ|² − 2τ ζ·κ)²,

evaluated at κ = k + κ_s with k the box wavenumbers and κ_s = π·shift a
lattice shift. With a shift the remainder is quasi-periodic: r = e^{iκ_s·x}ρ
with ρ periodic.
"""

import logging
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft

from pybiharmonic.exceptions import (
    CgoResidualError,
    NeumannDivergenceError,
    SymbolFloorError,
)
from pybiharmonic.models.cgo import AmplitudeKind, CgoDirections, CgoRole, CgoSolution
from pybiharmonic.models.coefficients import CoefficientSet
from pybiharmonic.models.fields import PeriodicField, ScalarField, VectorField
from pybiharmonic.models.grid import GridSpec
from pybiharmonic.models.settings import CgoSettings
from pybiharmonic.norms import box_wavenumbers

logger = logging.getLogger(__name__)

ORTHO_TOL = 1e-12
ISOTROPY_TOL = 1e-13
DIFFERENCE_TOL = 1e-12


def make_directions(
    xi: Sequence[float],
    mu1: Sequence[float],
    mu2: Sequence[float],
    tau: float,
    lattice_shift: Optional[Sequence[float]] = None,
) -> CgoDirections:
    """Build ζ₁ = τξ/2 + √(1−τ²|ξ|²/4)μ⁽¹⁾ + iμ⁽²⁾ and ζ₂ = −τξ/2 + √(…)μ⁽¹⁾ − iμ⁽²⁾.

    Raises:
        ValueError: If μ⁽¹⁾, μ⁽²⁾ are not orthonormal and orthogonal to ξ, or
            if τ|ξ| > 2
    """
    xi_v = np.asarray(xi, dtype=float)
    m1 = np.asarray(mu1, dtype=float)
    m2 = np.asarray(mu2, dtype=float)
    if not (xi_v.shape == m1.shape == m2.shape) or xi_v.ndim != 1:
        raise ValueError("xi, mu1 and mu2 must be vectors of one length")
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    scale = max(1.0, float(np.linalg.norm(xi_v)))
    if abs(np.linalg.norm(m1) - 1.0) > ORTHO_TOL or abs(np.linalg.norm(m2) - 1.0) > ORTHO_TOL:
        raise ValueError("mu1 and mu2 must be unit vectors")
    if (
        abs(m1 @ m2) > ORTHO_TOL
        or abs(m1 @ xi_v) > ORTHO_TOL * scale
        or abs(m2 @ xi_v) > ORTHO_TOL * scale
    ):
        raise ValueError("mu1, mu2 and xi must be mutually orthogonal")
    disc = 1.0 - tau**2 * float(xi_v @ xi_v) / 4.0
    if disc < 0.0:
        raise ValueError(
            f"tau too large: 1 - tau^2 |xi|^2 / 4 = {disc:.4g} is negative"
        )
    root = np.sqrt(disc)
    zeta1 = tau * xi_v / 2.0 + root * m1 + 1j * m2
    zeta2 = -tau * xi_v / 2.0 + root * m1 - 1j * m2
    _check_isotropic(xi_v, tau, zeta1, zeta2, scale)
    shift = np.zeros_like(xi_v) if lattice_shift is None else np.asarray(lattice_shift)
    return CgoDirections(
        xi=xi_v,
        mu1=m1,
        mu2=m2,
        tau=tau,
        zeta1=zeta1,
        zeta2=zeta2,
        lattice_shift=shift,
    )


def _check_isotropic(
    xi: np.ndarray, tau: float, zeta1: np.ndarray, zeta2: np.ndarray, scale: float
) -> None:
    """ζ_j·ζ_j = 0 (bilinear) and (ζ₂ − conj ζ₁)/τ = −ξ."""
    for label, zeta in (("zeta1", zeta1), ("zeta2", zeta2)):
        square = complex(np.sum(zeta * zeta))
        if abs(square) > ISOTROPY_TOL * scale**2:
            raise ValueError(f"{label}·{label} = {square:.3e} is not zero")
    gap = float(np.max(np.abs((zeta2 - np.conj(zeta1)) / tau + xi)))
    if gap > DIFFERENCE_TOL * scale:
        raise ValueError(f"(zeta2 - conj(zeta1))/tau misses -xi by {gap:.3e}")


def lattice_shift(direction: Sequence[int]) -> np.ndarray:
    """Shift s with s·p = 1/2 for an integer direction p ≠ 0.

    Then μ·(k + πs) stays at least π/(2|p|) away from zero for μ = p/|p|
    and every box wavenumber k.
    """
    p = np.asarray(direction, dtype=int)
    nonzero = np.flatnonzero(p)
    if nonzero.size == 0:
        raise ValueError("Integer direction must be nonzero")
    shift = np.zeros(p.size)
    i = int(nonzero[0])
    shift[i] = 1.0 / (2.0 * p[i])
    return shift


def _unit(direction: np.ndarray) -> np.ndarray:
    return direction / np.linalg.norm(direction)


def pair_directions(
    m: Sequence[int], j: int, k: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """μ⁽¹⁾ ∝ μ_jk = m_j e_k − m_k e_j and an integer μ⁽²⁾ ⊥ (ξ, μ_jk).

    Returns:
        (mu1, mu2, integer direction of mu2)

    Raises:
        ValueError: If μ_jk vanishes
    """
    m_v = np.asarray(m, dtype=int)
    n = m_v.size
    mu_jk = np.zeros(n, dtype=int)
    mu_jk[k] += m_v[j]
    mu_jk[j] -= m_v[k]
    if not np.any(mu_jk):
        raise ValueError(f"mu_jk vanishes for m={tuple(m_v)}, pair ({j}, {k})")
    others = [ell for ell in range(n) if ell not in (j, k)]
    p = np.zeros(n, dtype=int)
    free = [ell for ell in others if m_v[ell] == 0]
    if free:
        p[free[0]] = 1
    else:
        ell = others[0]
        p[j] = m_v[j] * m_v[ell]
        p[k] = m_v[k] * m_v[ell]
        p[ell] = -(m_v[j] ** 2 + m_v[k] ** 2)
    return _unit(mu_jk.astype(float)), _unit(p.astype(float)), p


def plane_directions(m: Sequence[int]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Directions for the q and φ extractions at lattice index m.

    Uses the pair with the largest |μ_jk|; for m = 0 returns (e₁, e₂).
    """
    m_v = np.asarray(m, dtype=int)
    n = m_v.size
    if not np.any(m_v):
        e1 = np.eye(n)[0]
        p = np.zeros(n, dtype=int)
        p[1] = 1
        return e1, np.eye(n)[1], p
    j, k = max(
        combinations(range(n), 2), key=lambda jk: m_v[jk[0]] ** 2 + m_v[jk[1]] ** 2
    )
    return pair_directions(m_v, j, k)


def make_amplitude(
    grid: GridSpec, directions: CgoDirections, kind: AmplitudeKind
) -> ScalarField:
    """a = 1, or the transport solution a = μ⁽¹⁾·x."""
    return ScalarField(grid=grid, values=_amplitude_values(grid.mesh(), directions, kind))


def _amplitude_values(
    mesh: Sequence[np.ndarray], directions: CgoDirections, kind: AmplitudeKind
) -> np.ndarray:
    if AmplitudeKind(kind) == AmplitudeKind.ONE:
        return np.ones(mesh[0].shape, dtype=np.complex128)
    total = np.zeros(mesh[0].shape, dtype=np.complex128)
    for x_k, mu_k in zip(mesh, directions.mu1):
        total += mu_k * x_k
    return total


def _amplitude_gradient(directions: CgoDirections, kind: AmplitudeKind) -> np.ndarray:
    if AmplitudeKind(kind) == AmplitudeKind.ONE:
        return np.zeros(directions.n)
    return np.array(directions.mu1)


class FaddeevInverse:
    """Regularized inverse of the conjugated symbol on the box."""

    def __init__(
        self,
        grid: GridSpec,
        directions: CgoDirections,
        role: CgoRole = CgoRole.DIRECT_SIDE,
        floor_factor: float = 1e-2,
    ):
        self.grid = grid
        self.directions = directions
        zeta = directions.zeta(role)
        tau = directions.tau
        k = box_wavenumbers(grid)
        shift = np.pi * directions.lattice_shift
        self.kappa: List[np.ndarray] = []
        for axis in range(grid.n):
            shape = [1] * grid.n
            shape[axis] = -1
            self.kappa.append((k + shift[axis]).reshape(shape))
        kappa_sq = sum(kk**2 for kk in self.kappa)
        zeta_kappa = sum(z * kk for z, kk in zip(zeta, self.kappa))
        self.symbol = np.broadcast_to(
            (-(tau**2) * kappa_sq - 2.0 * tau * zeta_kappa) ** 2, grid.box_shape
        )
        self.kappa_sq = np.broadcast_to(kappa_sq, grid.box_shape)

        floor = floor_factor * tau**3
        magnitude = np.abs(self.symbol)
        clamped = magnitude < floor
        self.clamped_modes = int(clamped.sum())
        if self.clamped_modes == self.symbol.size:
            raise SymbolFloorError(
                f"symbol floor dominates: every mode below {floor:.3e}"
            )
        safe = np.where(magnitude > 0, magnitude, 1.0)
        phase = np.where(magnitude > 0, self.symbol / safe, 1.0)
        self.regularized = np.where(clamped, floor * phase, self.symbol)
        if self.clamped_modes:
            logger.debug("Clamped %d symbol modes at floor %.3e", self.clamped_modes, floor)

        box = grid.box_mesh()
        self.phase = np.exp(1j * sum(s * x for s, x in zip(shift, box)))

    def transform(self, values: np.ndarray) -> np.ndarray:
        """Fourier coefficients of the periodic part e^{−iκ_s·x}w."""
        return sfft.fftn(np.conj(self.phase) * values)

    def synthesize(self, spectrum: np.ndarray) -> np.ndarray:
        return self.phase * sfft.ifftn(spectrum)

    def solve_spectrum(self, values: np.ndarray) -> np.ndarray:
        return self.transform(values) / self.regularized

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.synthesize(self.solve_spectrum(values))

    def forward(self, values: np.ndarray) -> np.ndarray:
        """Unregularized conjugated operator (τ²Δ + 2iτζ·∇)²."""
        return self.synthesize(self.symbol * self.transform(values))

    def gradient(self, spectrum: np.ndarray) -> List[np.ndarray]:
        return [self.synthesize(1j * kk * spectrum) for kk in self.kappa]

    def laplacian(self, spectrum: np.ndarray) -> np.ndarray:
        return self.synthesize(-self.kappa_sq * spectrum)


def faddeev_apply_inverse(
    directions: CgoDirections,
    rhs: PeriodicField,
    role: CgoRole = CgoRole.DIRECT_SIDE,
    floor_factor: float = 1e-2,
) -> PeriodicField:
    """Divide the box spectrum of ``rhs`` by the floored symbol.

    Raises:
        SymbolFloorError: If every mode is clamped
    """
    inverse = FaddeevInverse(rhs.grid, directions, role, floor_factor)
    return PeriodicField(grid=rhs.grid, values=inverse.apply(rhs.values))


def _box_extension(field: ScalarField) -> np.ndarray:
    if np.any(field.boundary_layer() != 0.0):
        raise ValueError("coefficients must vanish on ∂Ω to be extended by zero")
    return PeriodicField.extend(field).values


def _box_norm(values: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(values) ** 2)))


def build_cgo(
    coeffs: CoefficientSet,
    directions: CgoDirections,
    amplitude: AmplitudeKind,
    role: CgoRole,
    settings: Optional[CgoSettings] = None,
) -> CgoSolution:
    """Solve r = −G_ζ[τ⁴(A·(D + ζ/τ) + q)(a + r)] by Neumann iteration.

    The adjoint side uses the adjoint coefficients with ζ₁; the direct side
    uses the coefficients themselves with ζ₂.

    Raises:
        NeumannDivergenceError: If the update norm grows for
            ``divergence_window`` consecutive steps
        SymbolFloorError: If the symbol floor swallows every mode
        CgoResidualError: If the stencil residual of u (see
            ``cgo_residual``) exceeds ``settings.residual_tol``
    """
    settings = settings or CgoSettings()
    grid = coeffs.grid
    if directions.n != grid.n:
        raise ValueError("Direction vectors do not match the grid dimension")
    role = CgoRole(role)
    op = coeffs.adjoint() if role == CgoRole.ADJOINT_SIDE else coeffs
    zeta = directions.zeta(role)
    tau = directions.tau

    A_box = [_box_extension(c) for c in op.A.components]
    q_box = _box_extension(op.q)
    a_box = _amplitude_values(grid.box_mesh(), directions, amplitude)
    Da = -1j * _amplitude_gradient(directions, amplitude)
    inverse = FaddeevInverse(grid, directions, role, settings.floor_factor)

    def potential(w: np.ndarray, Dw: Sequence[np.ndarray]) -> np.ndarray:
        total = q_box * w
        for A_k, D_k, z_k in zip(A_box, Dw, zeta):
            total = total + A_k * (D_k + (z_k / tau) * w)
        return tau**4 * total

    r = np.zeros(grid.box_shape, dtype=np.complex128)
    Dr: List[np.ndarray] = [np.zeros(grid.box_shape, dtype=np.complex128)] * grid.n
    spectrum = np.zeros(grid.box_shape, dtype=np.complex128)
    first: Optional[np.ndarray] = None
    previous_update = np.inf
    increases = 0
    iterations = 0
    for iterations in range(1, settings.max_iterations + 1):
        source = -potential(a_box + r, [Da[k] + Dr[k] for k in range(grid.n)])
        spectrum = inverse.solve_spectrum(source)
        r_new = inverse.synthesize(spectrum)
        Dr = [-1j * g for g in inverse.gradient(spectrum)]
        update = _box_norm(r_new - r)
        size = _box_norm(r_new)
        r = r_new
        if first is None:
            first = r_new
        logger.debug("Neumann step %d: update %.3e, |r| %.3e", iterations, update, size)
        if update == 0.0 or update <= settings.tolerance * size:
            break
        increases = increases + 1 if update > previous_update else 0
        if increases >= settings.divergence_window:
            raise NeumannDivergenceError(
                "Neumann series divergent; decrease τ or coefficient magnitude"
            )
        previous_update = update
    else:
        logger.warning(
            "Neumann iteration hit the cap of %d steps", settings.max_iterations
        )

    grad_r = [1j * d for d in Dr]
    residual = _stencil_residual(grid, directions, role, op, amplitude, r)
    solution = CgoSolution(
        grid=grid,
        directions=directions,
        amplitude=amplitude,
        role=role,
        remainder=PeriodicField(grid=grid, values=r),
        remainder_gradient=tuple(PeriodicField(grid=grid, values=g) for g in grad_r),
        remainder_laplacian=PeriodicField(grid=grid, values=inverse.laplacian(spectrum)),
        iterations=iterations,
        residual=residual,
        clamped_modes=inverse.clamped_modes,
        first_iterate=PeriodicField(grid=grid, values=first) if first is not None else None,
    )
    logger.debug(
        "CGO (%s) tau=%.3g built in %d steps, residual %.2e",
        role.value,
        tau,
        iterations,
        residual,
    )
    if residual > settings.residual_tol:
        raise CgoResidualError(
            f"CGO ({role.value}) tau={tau:.3g} residual {residual:.3e} "
            f"exceeds {settings.residual_tol:.1e}"
        )
    return solution


def _log_weight(grid: GridSpec, zeta: np.ndarray, tau: float) -> np.ndarray:
    """log |e^{ix·ζ/τ}| on the closed grid of Ω."""
    return -sum(x * z.imag for x, z in zip(grid.mesh(), zeta)) / tau


def _stencil_derivatives(
    values: np.ndarray, h: float
) -> Tuple[List[np.ndarray], np.ndarray]:
    """Fourth-order central ∇ and Δ on box values; wrapped near the box edge."""
    gradient: List[np.ndarray] = []
    laplacian = np.zeros_like(values)
    for axis in range(values.ndim):
        p1, m1, p2, m2 = (np.roll(values, -step, axis=axis) for step in (1, -1, 2, -2))
        gradient.append((8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h))
        laplacian = laplacian + (16.0 * (p1 + m1) - (p2 + m2) - 30.0 * values) / (12.0 * h**2)
    return gradient, laplacian


def _stencil_residual(
    grid: GridSpec,
    directions: CgoDirections,
    role: CgoRole,
    op: CoefficientSet,
    amplitude: AmplitudeKind,
    remainder: np.ndarray,
) -> float:
    zeta = directions.zeta(role)
    tau = directions.tau
    h = grid.spacing
    w = _amplitude_values(grid.box_mesh(), directions, amplitude) + remainder

    def transport(values: np.ndarray) -> np.ndarray:
        gradient, lap = _stencil_derivatives(values, h)
        return tau**2 * lap + 2j * tau * sum(z * g for z, g in zip(zeta, gradient))

    leading = transport(transport(w)) / tau**4
    grad_w, _ = _stencil_derivatives(w, h)
    lower = _box_extension(op.q) * w
    for c, g, z in zip(op.A.components, grad_w, zeta):
        lower = lower + _box_extension(c) * (-1j * g + (z / tau) * w)

    # Two stencil sweeps reach four nodes; no wrapped value enters these nodes.
    inner = (slice(4, grid.N - 2),) * grid.n
    log_w = _log_weight(grid, zeta, tau)[inner]
    weight = np.exp(2.0 * (log_w - log_w.max()))
    top = np.sum(weight * np.abs((leading + lower)[inner]) ** 2)
    if top == 0.0:
        return 0.0
    bottom = np.sum(weight * np.abs(lower[inner]) ** 2)
    if bottom == 0.0:
        bottom = np.sum(weight * np.abs(w[inner]) ** 2)
    return float(np.sqrt(top / bottom))


def cgo_residual(solution: CgoSolution, coeffs: CoefficientSet) -> float:
    """Share of the lower-order term that u leaves unbalanced on the interior.

    𝓛u (𝓛*u on the adjoint side) is evaluated in the conjugated frame,

        e^{−ix·ζ/τ}𝓛u = τ⁻⁴(τ²Δ + 2iτζ·∇)²w + (A·(D + ζ/τ) + q)w,

    with fourth-order central stencils applied to w = a + r, independently of
    the spectral symbol the remainder was solved with. The weighted L² norm of
    that field is divided by the norm of (A·(D + ζ/τ) + q)w, or of w when the
    coefficients vanish. A remainder that balances nothing scores 1.
    """
    role = CgoRole(solution.role)
    op = coeffs.adjoint() if role == CgoRole.ADJOINT_SIDE else coeffs
    return _stencil_residual(
        solution.grid,
        solution.directions,
        role,
        op,
        solution.amplitude,
        solution.remainder.values,
    )


def _omega(grid: GridSpec) -> Tuple[slice, ...]:
    return (slice(0, grid.N + 2),) * grid.n


def conjugated_parts(solution: CgoSolution) -> Tuple[np.ndarray, List[np.ndarray]]:
    """w = a + r and ∇w on the closed grid, so that u = e^{ix·ζ/τ}w."""
    grid = solution.grid
    omega = _omega(grid)
    a = _amplitude_values(grid.mesh(), solution.directions, solution.amplitude)
    grad_a = _amplitude_gradient(solution.directions, solution.amplitude)
    w = a + solution.remainder.values[omega]
    grad_w = [
        grad_a[k] + solution.remainder_gradient[k].values[omega] for k in range(grid.n)
    ]
    return w, grad_w


def cgo_exponential(solution: CgoSolution) -> np.ndarray:
    """e^{ix·ζ/τ} on the closed grid."""
    grid = solution.grid
    phase = sum(x * z for x, z in zip(grid.mesh(), solution.zeta))
    return np.exp(1j * phase / solution.directions.tau)


def cgo_values(solution: CgoSolution) -> ScalarField:
    """u on the closed grid of Ω."""
    w, _ = conjugated_parts(solution)
    return ScalarField(grid=solution.grid, values=cgo_exponential(solution) * w)


def cgo_gradient(solution: CgoSolution) -> VectorField:
    """∇u = e^{ix·ζ/τ}(iζ/τ w + ∇w)."""
    tau = solution.directions.tau
    expo = cgo_exponential(solution)
    w, grad_w = conjugated_parts(solution)
    return VectorField(
        components=tuple(
            ScalarField(
                grid=solution.grid, values=expo * (1j * z / tau * w + g)
            )
            for z, g in zip(solution.zeta, grad_w)
        )
    )


def cgo_laplacian(solution: CgoSolution) -> ScalarField:
    """Δu = e^{ix·ζ/τ}(Δr + 2i ζ/τ·∇w), using ζ·ζ = 0 and Δa = 0."""
    grid = solution.grid
    tau = solution.directions.tau
    _, grad_w = conjugated_parts(solution)
    inner = np.array(solution.remainder_laplacian.values[_omega(grid)])
    for z, g in zip(solution.zeta, grad_w):
        inner = inner + 2j * z / tau * g
    return ScalarField(grid=grid, values=cgo_exponential(solution) * inner)


def remainder_norm(solution: CgoSolution) -> float:
    """‖r‖_{H¹_scl(Ω)} with semiclassical parameter τ."""
    grid = solution.grid
    omega = _omega(grid)
    tau = solution.directions.tau
    total = np.sum(np.abs(solution.remainder.values[omega]) ** 2)
    for g in solution.remainder_gradient:
        total += tau**2 * np.sum(np.abs(g.values[omega]) ** 2)
    return float(np.sqrt(grid.cell_volume * total))

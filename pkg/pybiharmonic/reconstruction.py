"""Coefficient recovery from CGO pairs.

The integral identity ∫(A·Du₂ + qu₂)ū₁ = −∫ū₁P(x,D)u links the coefficient
difference (A, q) = (A₂ − A₁, q₂ − q₁) to Fourier samples at ξ. Sampling a
lattice ball and inverting gives band-limited reconstructions of dA and q;
the potential part φ of A is recovered with a linear amplitude.

Lattice points are ξ = π·m, the dual lattice of the periodic box of side 2.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft

from pybiharmonic.cgo import (
    build_cgo,
    cgo_gradient,
    cgo_laplacian,
    cgo_values,
    conjugated_parts,
    lattice_shift,
    make_directions,
    pair_directions,
    plane_directions,
)
from pybiharmonic.exceptions import CgoResidualError
from pybiharmonic.fields import d_cap, divergence, dot, gradient
from pybiharmonic.grid import chain_cutoff
from pybiharmonic.models.cgo import AmplitudeKind, CgoDirections, CgoRole, CgoSolution
from pybiharmonic.models.coefficients import CoefficientSet
from pybiharmonic.models.fields import ScalarField, TwoFormField, VectorField, form_pairs
from pybiharmonic.models.grid import Cutoff, GridSpec, NeighborhoodChain
from pybiharmonic.models.reconstruction import (
    AEstimateReport,
    DecompositionResult,
    FourierSamples,
    FrequencySample,
    IntegralEvidence,
    LowpassResult,
    ParameterCoupling,
    QMode,
    ReconstructionResult,
    SampleKind,
    TheoremExponents,
)
from pybiharmonic.models.settings import CgoSettings, SolverSettings
from pybiharmonic.navier import NavierSolver
from pybiharmonic.norms import hk_norm, l1_norm, l2_norm, linf_norm
from pybiharmonic.operators import apply_L, solve_poisson_dirichlet

logger = logging.getLogger(__name__)

SIGNS = ((1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0))


def _omega(grid: GridSpec) -> Tuple[slice, ...]:
    return (slice(0, grid.N + 2),) * grid.n


def _kernel(grid: GridSpec, xi: np.ndarray) -> np.ndarray:
    """e^{−ix·ξ} on the closed grid."""
    return np.exp(-1j * sum(x * k for x, k in zip(grid.mesh(), xi)))


def _pairing(
    diff: CoefficientSet,
    u1: CgoSolution,
    u2: CgoSolution,
    include_A: bool = True,
    include_q: bool = True,
) -> complex:
    """∫(A·Du₂ + qu₂)ū₁, evaluated as ∫e^{−ix·ξ}(A·(ζ₂/τ w₂ + Dw₂) + q w₂)w̄₁."""
    grid = diff.grid
    tau = u2.directions.tau
    w1, _ = conjugated_parts(u1)
    w2, grad_w2 = conjugated_parts(u2)
    integrand = np.zeros(grid.shape, dtype=np.complex128)
    if include_A:
        for A_k, z_k, g_k in zip(diff.A.components, u2.zeta, grad_w2):
            integrand += A_k.values * (z_k / tau * w2 - 1j * g_k)
    if include_q:
        integrand += diff.q.values * w2
    kernel = _kernel(grid, u2.directions.xi)
    return complex(grid.cell_volume * np.sum(integrand * np.conj(w1) * kernel))


def _remainder_bound(
    diff: CoefficientSet, u1: CgoSolution, u2: CgoSolution, scaled: bool
) -> float:
    """Quadrature bound on the remainder part of the pairing.

    With ``scaled`` the bound refers to τ times the full pairing, otherwise
    to the q-part alone.
    """
    grid = diff.grid
    tau = u2.directions.tau
    w1, _ = conjugated_parts(u1)
    w2, grad_w2 = conjugated_parts(u2)
    a2 = w2 - u2.remainder.values[_omega(grid)]
    cross = np.abs(w2 * np.conj(w1) - a2)
    q_abs = np.abs(diff.q.values)
    if not scaled:
        return float(grid.cell_volume * np.sum(q_abs * cross))
    A_abs = np.sqrt(sum(np.abs(c.values) ** 2 for c in diff.A.components))
    grad_r2 = np.sqrt(
        sum(np.abs(g.values[_omega(grid)]) ** 2 for g in u2.remainder_gradient)
    )
    zeta_abs = float(np.linalg.norm(u2.zeta))
    density = A_abs * (zeta_abs * cross + tau * grad_r2 * np.abs(w1)) + tau * q_abs * cross
    return float(grid.cell_volume * np.sum(density))


def _tau_term(diff: CoefficientSet, tau: float) -> float:
    """τ(‖A‖_{L¹} + ‖q‖_{L¹}), the a priori size of the remainder in one pairing."""
    return tau * (l1_norm(diff.A) + l1_norm(diff.q))


def _stencil_gap(xi_k: float, spacing: float) -> float:
    """|ξ_k − sin(ξ_k h)/h|: central differences see sin(ξ_k h)/h instead of ξ_k."""
    return abs(xi_k - np.sin(xi_k * spacing) / spacing)


class IdentityContext:
    """Shared state for sampling one coefficient pair.

    ``coeffs1`` enters through the adjoint CGO u₁ and the difference solve,
    ``coeffs2`` through the direct CGO u₂.
    """

    def __init__(
        self,
        coeffs1: CoefficientSet,
        coeffs2: CoefficientSet,
        chain: NeighborhoodChain,
        cutoff: Optional[Cutoff] = None,
        solver_settings: Optional[SolverSettings] = None,
        cgo_settings: Optional[CgoSettings] = None,
        verify_identity: bool = False,
    ):
        if coeffs1.grid != coeffs2.grid or coeffs1.grid != chain.grid:
            raise ValueError("Coefficient pair and neighborhoods use different grids")
        self.coeffs1 = coeffs1
        self.coeffs2 = coeffs2
        self.difference = coeffs2.minus(coeffs1)
        self.chain = chain
        self.cutoff = cutoff or chain_cutoff(chain)
        self.solver_settings = solver_settings or SolverSettings()
        self.cgo_settings = cgo_settings or CgoSettings()
        self.verify_identity = verify_identity
        self._solver: Optional[NavierSolver] = None

    @property
    def grid(self) -> GridSpec:
        return self.coeffs1.grid

    @property
    def solver(self) -> NavierSolver:
        if self._solver is None:
            self._solver = NavierSolver(self.coeffs1, self.solver_settings)
        return self._solver

    def cgo_pair(
        self,
        directions: CgoDirections,
        amplitude: AmplitudeKind = AmplitudeKind.ONE,
    ) -> Tuple[CgoSolution, CgoSolution]:
        """u₁ for 𝓛*_{A₁,q₁} with a₁ = 1 and u₂ for 𝓛_{A₂,q₂} with ``amplitude``.

        Raises:
            CgoResidualError: If either solution fails its residual check
        """
        u1 = build_cgo(
            self.coeffs1,
            directions,
            AmplitudeKind.ONE,
            CgoRole.ADJOINT_SIDE,
            self.cgo_settings,
        )
        u2 = build_cgo(
            self.coeffs2, directions, amplitude, CgoRole.DIRECT_SIDE, self.cgo_settings
        )
        _check_residual(u1, self.cgo_settings.residual_tol)
        _check_residual(u2, self.cgo_settings.residual_tol)
        return u1, u2

    def evidence(self, u1: CgoSolution, u2: CgoSolution) -> IntegralEvidence:
        return evaluate_integral_identity(
            self.coeffs1,
            self.coeffs2,
            u1,
            u2,
            self.chain,
            self.cutoff,
            solver=self.solver,
            residual_tol=self.cgo_settings.residual_tol,
        )


def _check_residual(solution: CgoSolution, tol: float) -> None:
    if solution.residual > tol:
        raise CgoResidualError(
            f"CGO ({solution.role.value}) residual {solution.residual:.3e} "
            f"exceeds {tol:.1e}"
        )


def evaluate_integral_identity(
    coeffs1: CoefficientSet,
    coeffs2: CoefficientSet,
    u1: CgoSolution,
    u2: CgoSolution,
    chain: NeighborhoodChain,
    chi: Optional[Cutoff] = None,
    settings: Optional[SolverSettings] = None,
    solver: Optional[NavierSolver] = None,
    residual_tol: Optional[float] = None,
    alphas: Optional[Tuple[float, float]] = None,
    delta: Optional[float] = None,
    h: Optional[float] = None,
) -> IntegralEvidence:
    """Evaluate both sides of the integral identity.

    The difference u solves 𝓛_{A₁,q₁}u = A·Du₂ + qu₂ with zero Navier traces;
    the commutator is applied as the stencil difference 𝓛₁(χu) − χ𝓛₁u and
    paired with ū₁ over interior nodes.

    Args:
        coeffs1: Coefficients of the adjoint side
        coeffs2: Coefficients of the direct side
        u1: Adjoint-side CGO solution for ``coeffs1``
        u2: Direct-side CGO solution for ``coeffs2``
        chain: Neighborhood chain fixing χ
        chi: Cutoff, defaults to the chain cutoff
        settings: Navier solver controls
        solver: Prepared solver for ``coeffs1``
        residual_tol: Largest accepted CGO residual, defaults to
            ``CgoSettings().residual_tol``
        alphas: (α₁, α₂) for the DtN bound
        delta: DtN difference norm for the DtN bound
        h: Semiclassical parameter for the DtN bound

    Returns:
        The evidence record

    Raises:
        CgoResidualError: If a CGO residual exceeds ``residual_tol``
        ValueError: If the roles are swapped, or the bound inputs are partial
    """
    if u1.role != CgoRole.ADJOINT_SIDE or u2.role != CgoRole.DIRECT_SIDE:
        raise ValueError("u1 must be adjoint-side and u2 direct-side")
    if residual_tol is None:
        residual_tol = CgoSettings().residual_tol
    _check_residual(u1, residual_tol)
    _check_residual(u2, residual_tol)
    grid = coeffs1.grid
    chi = chi or chain_cutoff(chain)
    diff = coeffs2.minus(coeffs1)

    u1_field = cgo_values(u1)
    u2_field = cgo_values(u2)
    source = dot(diff.A, cgo_gradient(u2) * (-1j)) + diff.q * u2_field
    lhs = complex(grid.cell_volume * np.sum(source.values * np.conj(u1_field.values)))

    if solver is None or solver.coeffs is not coeffs1:
        solver = NavierSolver(coeffs1, settings)
    zero = ScalarField.zeros(grid)
    solution = solver.solve_traces(zero, zero, rhs=source)
    u = solution.u
    chi_u = u * chi.values
    commutator = apply_L(coeffs1, chi_u, zero) - apply_L(coeffs1, u, solution.laplacian) * chi.values
    inner = grid.interior
    commutator_term = complex(
        grid.cell_volume * np.sum(np.conj(u1_field.values[inner]) * commutator.values[inner])
    )

    bound = None
    if alphas is not None or delta is not None:
        if alphas is None or delta is None or h is None:
            raise ValueError("The DtN bound needs alphas, delta and h together")
        bound = dtn_bound(u1_field, u2_field, cgo_laplacian(u2), alphas, delta, h)

    residual = abs(lhs + commutator_term)
    logger.debug(
        "Integral identity: |lhs| %.3e, residual %.3e", abs(lhs), residual
    )
    return IntegralEvidence(
        lhs=lhs,
        commutator_term=commutator_term,
        identity_residual=residual,
        dtn_bound=bound,
        solve_residual=solution.report.residual,
    )


def dtn_bound(
    u1: ScalarField,
    u2: ScalarField,
    lap_u2: ScalarField,
    alphas: Tuple[float, float],
    delta: float,
    h: float,
) -> float:
    """‖u₁‖[e^{−α₁/3h}‖u₂‖_{H¹} + e^{α₂/3h}‖u₂‖_{H¹}^{2/3}δ^{1/3}(‖u₂‖_{H⁴}^{1/3} + ‖Δu₂‖_{H²}^{1/3})]."""
    alpha1, alpha2 = alphas
    u2_h1 = hk_norm(u2, 1)
    high = hk_norm(u2, 4) ** (1.0 / 3.0) + hk_norm(lap_u2, 2) ** (1.0 / 3.0)
    with np.errstate(over="ignore"):
        value = l2_norm(u1) * (
            np.exp(-alpha1 / (3.0 * h)) * u2_h1
            + np.exp(alpha2 / (3.0 * h)) * u2_h1 ** (2.0 / 3.0) * delta ** (1.0 / 3.0) * high
        )
    return float(value)


def _lattice_xi(index: Sequence[int]) -> np.ndarray:
    return np.pi * np.asarray(index, dtype=float)


def extract_dA_hat(
    context: IdentityContext, index: Sequence[int], h: float, lam: float
) -> FrequencySample:
    """Estimate 𝓕(dA)_{jk}(ξ) for every pair j < k at ξ = π·index.

    For each pair, μ⁽¹⁾ ∝ μ_jk(ξ) = ξ_je_k − ξ_ke_j. The values τ·∫(A·Du₂ + qu₂)ū₁
    for (±μ⁽¹⁾, ±μ⁽²⁾) are combined with the sign of μ⁽¹⁾, which leaves
    √(1−τ²|ξ|²/4) μ⁽¹⁾·𝓕(A)(ξ) up to remainder terms, and
    𝓕(dA)_{jk} = i|μ_jk(ξ)| μ⁽¹⁾·𝓕(A).

    Each budget adds the measured remainder bound, the a priori τ term and
    the gap between ξ and the central-difference symbol that d_operator sees.

    Raises:
        ValueError: If τ|ξ| > 2
    """
    grid = context.grid
    m = tuple(int(v) for v in index)
    xi = _lattice_xi(m)
    tau = lam * h
    pairs = form_pairs(grid.n)
    if not any(m):
        zeros = np.zeros(len(pairs))
        return FrequencySample(index=m, values=zeros, budgets=zeros, degenerate=True)
    if tau * np.linalg.norm(xi) > 2.0:
        raise ValueError(f"tau too large: tau*|xi| = {tau * np.linalg.norm(xi):.3g} > 2")

    root = np.sqrt(1.0 - tau**2 * float(xi @ xi) / 4.0)
    diff = context.difference
    tau_term = _tau_term(diff, tau)
    A_l1 = [l1_norm(c) for c in diff.A.components]
    values = np.zeros(len(pairs), dtype=np.complex128)
    budgets = np.zeros(len(pairs))
    worst_residual = 0.0
    identity: Optional[float] = None
    for slot, (j, k) in enumerate(pairs):
        if m[j] == 0 and m[k] == 0:
            continue
        mu1, mu2, p = pair_directions(m, j, k)
        shift = lattice_shift(p)
        mu_size = np.pi * np.hypot(m[j], m[k])
        total = 0.0 + 0.0j
        bound = 0.0
        for s1, s2 in SIGNS:
            directions = make_directions(xi, s1 * mu1, s2 * mu2, tau, shift)
            u1, u2 = context.cgo_pair(directions)
            total += s1 * tau * _pairing(diff, u1, u2)
            bound = max(bound, _remainder_bound(diff, u1, u2, scaled=True))
            worst_residual = max(worst_residual, u1.residual, u2.residual)
            if context.verify_identity and identity is None:
                identity = context.evidence(u1, u2).identity_residual
        values[slot] = 1j * mu_size * total / (4.0 * root)
        quadrature = (
            _stencil_gap(xi[j], grid.spacing) * A_l1[k]
            + _stencil_gap(xi[k], grid.spacing) * A_l1[j]
        )
        budgets[slot] = mu_size * (bound + tau_term) / root + quadrature
    logger.debug("dA samples at m=%s: %s", m, np.round(values, 6))
    return FrequencySample(
        index=m,
        values=values,
        budgets=budgets,
        cgo_residual=worst_residual,
        identity_residual=identity,
    )


def extract_q_hat(
    context: IdentityContext,
    index: Sequence[int],
    h: float,
    lam: float,
    mode: QMode = QMode.WITH_A,
) -> FrequencySample:
    """Estimate 𝓕(q)(ξ) from ∫qu₂ū₁ = 𝓕(q)(ξ) + I, averaged over ±μ⁽²⁾.

    The budget holds the measured remainder bound, the a priori τ term and a
    trapezoid term spacing²(1 + |ξ|²)‖q‖_{L¹}/12. In ``with_A`` mode the
    measured ∫A·Du₂ū₁ is subtracted and its size (‖A‖∞ + spacing²)‖Du₂‖‖u₁‖
    joins the budget.

    Raises:
        ValueError: If τ|ξ| > 2, or ``A_zero`` mode meets a nonzero A
    """
    grid = context.grid
    mode = QMode(mode)
    if mode == QMode.A_ZERO and (
        context.coeffs1.has_first_order or context.coeffs2.has_first_order
    ):
        raise ValueError("A_zero mode requires A1 = A2 = 0")
    m = tuple(int(v) for v in index)
    xi = _lattice_xi(m)
    tau = lam * h
    if tau * np.linalg.norm(xi) > 2.0:
        raise ValueError(f"tau too large: tau*|xi| = {tau * np.linalg.norm(xi):.3g} > 2")
    mu1, mu2, p = plane_directions(m)
    shift = lattice_shift(p)

    total = 0.0 + 0.0j
    bound = 0.0
    worst_residual = 0.0
    identity: Optional[float] = None
    diff = context.difference
    for s2 in (1.0, -1.0):
        directions = make_directions(xi, mu1, s2 * mu2, tau, shift)
        u1, u2 = context.cgo_pair(directions)
        total += _pairing(diff, u1, u2, include_A=False, include_q=True)
        term = _remainder_bound(diff, u1, u2, scaled=False)
        if mode == QMode.WITH_A:
            du2 = d_cap(cgo_values(u2))
            term += (linf_norm(diff.A) + grid.spacing**2) * l2_norm(du2) * l2_norm(
                cgo_values(u1)
            )
        bound = max(bound, term)
        worst_residual = max(worst_residual, u1.residual, u2.residual)
        if context.verify_identity and identity is None:
            identity = context.evidence(u1, u2).identity_residual
    trapezoid = grid.spacing**2 * (1.0 + float(xi @ xi)) * l1_norm(diff.q) / 12.0
    bound += _tau_term(diff, tau) + trapezoid
    return FrequencySample(
        index=m,
        values=np.array([total / 2.0]),
        budgets=np.array([bound]),
        cgo_residual=worst_residual,
        identity_residual=identity,
    )


def extract_phi_hat(
    context: IdentityContext,
    index: Sequence[int],
    h: float,
    lam: float,
    A_sol: VectorField,
) -> FrequencySample:
    """Estimate 𝓕(φ)(ξ) for A = A_sol + ∇φ, φ = 0 on ∂Ω.

    With a₂ = μ⁽¹⁾·x, ζ₂·∫∇φ a₂e^{−ix·ξ} = −√(1−τ²|ξ|²/4)𝓕(φ)(ξ) plus a term
    odd in μ⁽¹⁾, so averaging ζ₂·∫A_sol a₂e^{−ix·ξ} − τ·∫(A·Du₂ + qu₂)ū₁
    over (±μ⁽¹⁾, ±μ⁽²⁾) isolates 𝓕(φ). Summation by parts on the grid trades
    |ξ| for the central-difference symbol, so the budget carries that gap
    times √n‖A‖_{L¹} next to the remainder bound and the τ term.

    Raises:
        ValueError: If τ|ξ| > 2
    """
    grid = context.grid
    m = tuple(int(v) for v in index)
    xi = _lattice_xi(m)
    tau = lam * h
    if tau * np.linalg.norm(xi) > 2.0:
        raise ValueError(f"tau too large: tau*|xi| = {tau * np.linalg.norm(xi):.3g} > 2")
    root = np.sqrt(1.0 - tau**2 * float(xi @ xi) / 4.0)
    mu1, mu2, p = plane_directions(m)
    shift = lattice_shift(p)
    kernel = _kernel(grid, xi)
    mesh = grid.mesh()
    diff = context.difference

    total = 0.0 + 0.0j
    bound = 0.0
    worst_residual = 0.0
    for s1, s2 in SIGNS:
        directions = make_directions(xi, s1 * mu1, s2 * mu2, tau, shift)
        u1, u2 = context.cgo_pair(directions, AmplitudeKind.LINEAR_TRANSPORT)
        a2 = sum(mu_k * x_k for mu_k, x_k in zip(directions.mu1, mesh))
        solenoidal = sum(
            z_k * grid.cell_volume * np.sum(c.values * a2 * kernel)
            for z_k, c in zip(u2.zeta, A_sol.components)
        )
        total += solenoidal - tau * _pairing(diff, u1, u2)
        bound = max(bound, _remainder_bound(diff, u1, u2, scaled=True))
        worst_residual = max(worst_residual, u1.residual, u2.residual)
    gap = _stencil_gap(float(np.linalg.norm(xi)), grid.spacing)
    bound += _tau_term(diff, tau) + gap * np.sqrt(grid.n) * l1_norm(diff.A)
    return FrequencySample(
        index=m,
        values=np.array([total / (4.0 * root)]),
        budgets=np.array([bound / root]),
        cgo_residual=worst_residual,
    )


def cutoff_radius(h: float, n: int, kind: SampleKind, rho_factor: float = 1.0) -> float:
    """ρ = h^{−1/(n+2)} for dA and φ, h^{−2/(n+2)} for q, times ``rho_factor``."""
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    power = 2.0 if SampleKind(kind) == SampleKind.Q else 1.0
    return rho_factor * h ** (-power / (n + 2))


def nyquist_radius(grid: GridSpec) -> float:
    return float(np.pi / grid.spacing)


def dual_lattice_ball(grid: GridSpec, radius: float) -> List[Tuple[int, ...]]:
    """Indices m with |πm| ≤ radius below Nyquist, in lexicographic order."""
    radius = min(radius, nyquist_radius(grid))
    reach = min(int(np.floor(radius / np.pi)), grid.box_size // 2 - 1)
    span = range(-reach, reach + 1)
    return [
        m
        for m in product(span, repeat=grid.n)
        if np.pi * np.sqrt(sum(v * v for v in m)) <= radius * (1.0 + 1e-12)
    ]


def sample_frequencies(
    context: IdentityContext,
    kind: SampleKind,
    h: float,
    lam: float,
    rho_factor: float = 1.0,
    mode: QMode = QMode.WITH_A,
    A_sol: Optional[VectorField] = None,
    threads: int = 1,
) -> FourierSamples:
    """Sample the lattice ball for ``kind``, one frequency per task.

    Raises:
        ValueError: If φ samples are requested without ``A_sol``, or the ball
            is empty
    """
    kind = SampleKind(kind)
    grid = context.grid
    rho = cutoff_radius(h, grid.n, kind, rho_factor)
    indices = dual_lattice_ball(grid, rho)
    if not indices:
        raise ValueError("empty frequency set")

    extract: Callable[[Tuple[int, ...]], FrequencySample]
    if kind == SampleKind.DA:
        extract = lambda m: extract_dA_hat(context, m, h, lam)  # noqa: E731
    elif kind == SampleKind.Q:
        extract = lambda m: extract_q_hat(context, m, h, lam, mode)  # noqa: E731
    else:
        if A_sol is None:
            raise ValueError("phi samples need the solenoidal part A_sol")
        extract = lambda m: extract_phi_hat(context, m, h, lam, A_sol)  # noqa: E731

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        samples = tuple(pool.map(extract, indices))
    logger.info(
        "Sampled %d %s frequencies (rho=%.3f, h=%.3g, tau=%.3g)",
        len(samples),
        kind.value,
        rho,
        h,
        lam * h,
    )
    return FourierSamples(
        kind=kind,
        samples=samples,
        tau=lam * h,
        h=h,
        lam=lam,
        rho=rho,
        nyquist=nyquist_radius(grid),
    )


def _synthesize(
    grid: GridSpec, indices: Sequence[Tuple[int, ...]], values: np.ndarray
) -> np.ndarray:
    """Σ_m v_m e^{iπm·x} / 2ⁿ on the closed grid of Ω."""
    spectrum = np.zeros(grid.box_shape, dtype=np.complex128)
    M = grid.box_size
    for m, v in zip(indices, values):
        spectrum[tuple(np.mod(m, M))] += v
    return sfft.ifftn(spectrum)[_omega(grid)] / grid.cell_volume


def lowpass_invert(samples: FourierSamples, grid: GridSpec) -> LowpassResult:
    """Inverse FFT of the samples, zero outside the lattice ball.

    Returns a two-form for dA samples and a scalar field otherwise.

    Raises:
        ValueError: If there are no samples
    """
    if not samples.samples:
        raise ValueError("empty frequency set")
    table = samples.value_table()
    if samples.kind == SampleKind.DA:
        field = TwoFormField(
            components=tuple(
                ScalarField(grid=grid, values=_synthesize(grid, samples.indices, table[:, c]))
                for c in range(table.shape[1])
            )
        )
    else:
        field = ScalarField(
            grid=grid, values=_synthesize(grid, samples.indices, table[:, 0])
        )
    return LowpassResult(
        field=field,
        rho=samples.rho,
        nyquist=samples.nyquist,
        h=samples.h,
        count=len(samples.samples),
    )


def assemble_vector_potential(
    dA_samples: FourierSamples,
    grid: GridSpec,
    phi_samples: Optional[FourierSamples] = None,
) -> VectorField:
    """A = A_sol + ∇φ from 𝓕(A_sol)_k = −iΣ_jξ_j𝓕(dA)_{jk}/|ξ|² and 𝓕(∇φ) = iξ𝓕(φ)."""
    pairs = form_pairs(grid.n)
    components: List[List[complex]] = [[] for _ in range(grid.n)]
    indices = list(dA_samples.indices)
    for sample in dA_samples.samples:
        xi = sample.xi
        size = float(xi @ xi)
        for k in range(grid.n):
            if size == 0.0:
                components[k].append(0.0)
                continue
            acc = 0.0 + 0.0j
            for slot, (a, b) in enumerate(pairs):
                # dA_{jk} with j the summed index; antisymmetry for j > k
                if b == k:
                    acc += xi[a] * sample.values[slot]
                elif a == k:
                    acc -= xi[b] * sample.values[slot]
            components[k].append(-1j * acc / size)
    fields = [_synthesize(grid, indices, np.array(c)) for c in components]
    if phi_samples is not None:
        table = phi_samples.value_table()[:, 0]
        for k in range(grid.n):
            grad = [1j * s.xi[k] * v for s, v in zip(phi_samples.samples, table)]
            fields[k] = fields[k] + _synthesize(grid, phi_samples.indices, np.array(grad))
    return VectorField.from_arrays(grid, tuple(fields))


def decompose(A: VectorField, h: Optional[float] = None) -> DecompositionResult:
    """A = A_sol + ∇φ with Δφ = div A in Ω and φ = 0 on ∂Ω."""
    grid = A.grid
    phi = solve_poisson_dirichlet(divergence(A))
    A_sol = A - gradient(phi)
    div_sol = divergence(A_sol)
    interior = np.zeros(grid.shape, dtype=bool)
    interior[grid.interior] = True
    boundary = ~interior
    return DecompositionResult(
        phi=phi,
        A_sol=A_sol,
        div_residual=l2_norm(div_sol, interior),
        boundary_residual=float(np.max(np.abs(phi.values[boundary]))),
        h=h,
    )


def theorem_exponents(n: int, s: float) -> TheoremExponents:
    """Exponents of the stability estimates for dimension n and regularity s.

    Raises:
        ValueError: If s ≤ n/2 + 1
    """
    eta = (s - n / 2.0) / 2.0
    eta_tilde = (s - n / 2.0 - 1.0) / 2.0
    if eta_tilde <= 0:
        raise ValueError(f"s={s} must exceed n/2 + 1 = {n / 2.0 + 1.0}")
    mu1 = eta * eta_tilde / (6.0 * (1.0 + s) ** 2)
    mu2 = eta**2 * eta_tilde**2 / (3.0 * (n + 2) ** 2 * (1.0 + s) ** 4)
    return TheoremExponents(
        n=n,
        s=s,
        eta=eta,
        eta_tilde=eta_tilde,
        mu1=mu1,
        mu2=mu2,
        mu_prime=min(2.0 / (n + 2), mu2 / 2.0),
        a_zero_log=2.0 / (n + 2),
        linf_theta=(s - n / 2.0) / (1.0 + s),
    )


def assemble_A_estimate(
    dA_result: LowpassResult, decomposition: DecompositionResult, s: float
) -> AEstimateReport:
    """Measured ‖dA‖∞, ‖A_sol‖∞, ‖∇φ‖∞ and ‖A‖∞ with the predicted exponents.

    Raises:
        ValueError: If the inputs come from runs with different h
    """
    if decomposition.h is not None and decomposition.h != dA_result.h:
        raise ValueError(
            f"Inputs come from different runs: h={dA_result.h} vs h={decomposition.h}"
        )
    grid = decomposition.phi.grid
    dA_linf = linf_norm(dA_result.field)
    grad_phi = gradient(decomposition.phi)
    A_sol_bound = linf_norm(decomposition.A_sol)
    grad_phi_bound = linf_norm(grad_phi)
    A_bound = linf_norm(decomposition.A_sol + grad_phi)
    ratio = A_sol_bound / dA_linf if dA_linf > 0 else 0.0
    return AEstimateReport(
        h=dA_result.h,
        dA_linf=dA_linf,
        A_sol_bound=A_sol_bound,
        grad_phi_bound=grad_phi_bound,
        A_bound=A_bound,
        solenoidal_ratio=ratio,
        triangle_ok=A_bound <= (A_sol_bound + grad_phi_bound) * (1.0 + 1e-12) + 1e-300,
        exponents=theorem_exponents(grid.n, s),
    )


def domain_radius(n: int) -> float:
    """R = sup_{x∈Ω}|x| for the unit cube."""
    return float(np.sqrt(n))


def parameter_coupling(
    alpha1: float, alpha2: float, lam: float, n: int
) -> ParameterCoupling:
    """α₃ = α₁/3 − 4R/λ and α₄ = 6R/λ + α₂/3 for τ = λh."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    R = domain_radius(n)
    return ParameterCoupling(
        alpha1=alpha1,
        alpha2=alpha2,
        lam=lam,
        R=R,
        alpha3=alpha1 / 3.0 - 4.0 * R / lam,
        alpha4=6.0 * R / lam + alpha2 / 3.0,
    )


def recommended_lambda(alpha1: float, n: int, safety: float = 2.0) -> float:
    """λ = safety·12R/α₁, so that 4R/λ − α₁/3 < 0 when safety > 1.

    Raises:
        ValueError: If α₁ ≤ 0 or safety ≤ 1
    """
    if alpha1 <= 0:
        raise ValueError(f"alpha1 must be positive, got {alpha1}")
    if safety <= 1:
        raise ValueError("safety must exceed 1")
    return safety * 12.0 * domain_radius(n) / alpha1


def reconstruct_coefficients(
    context: IdentityContext,
    h: float,
    lam: float,
    rho_factor: float = 1.0,
    mode: QMode = QMode.WITH_A,
    threads: int = 1,
) -> ReconstructionResult:
    """Run the full recovery for one (h, λ).

    In ``with_A`` mode: dA samples, the solenoidal part from them, φ samples
    against it, the assembled A and its decomposition, then q. In ``A_zero``
    mode only q.
    """
    grid = context.grid
    mode = QMode(mode)
    q_samples = sample_frequencies(
        context, SampleKind.Q, h, lam, rho_factor, mode=mode, threads=threads
    )
    q = lowpass_invert(q_samples, grid)
    if mode == QMode.A_ZERO:
        return ReconstructionResult(q_samples=q_samples, q=q)

    dA_samples = sample_frequencies(
        context, SampleKind.DA, h, lam, rho_factor, threads=threads
    )
    dA = lowpass_invert(dA_samples, grid)
    A_sol = assemble_vector_potential(dA_samples, grid)
    phi_samples = sample_frequencies(
        context, SampleKind.PHI, h, lam, rho_factor, A_sol=A_sol, threads=threads
    )
    A = assemble_vector_potential(dA_samples, grid, phi_samples)
    return ReconstructionResult(
        q_samples=q_samples,
        q=q,
        dA_samples=dA_samples,
        phi_samples=phi_samples,
        dA=dA,
        A=A,
        decomposition=decompose(A, h),
    )

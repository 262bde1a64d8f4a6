"""Tests for Fourier extraction, low-pass inversion and the A decomposition."""

import numpy as np
import pytest

from pybiharmonic.cgo import cgo_laplacian, cgo_values, make_directions
from pybiharmonic.fields import d_operator, from_function, gradient
from pybiharmonic.grid import build_grid, make_neighborhoods
from pybiharmonic.models.coefficients import CoefficientSet
from pybiharmonic.models.fields import ScalarField, VectorField
from pybiharmonic.models.grid import Cutoff
from pybiharmonic.models.reconstruction import (
    FourierSamples,
    FrequencySample,
    LowpassResult,
    QMode,
    SampleKind,
)
from pybiharmonic.models.settings import CgoSettings
from pybiharmonic.norms import fourier_transform_at, linf_norm
from pybiharmonic.reconstruction import (
    IdentityContext,
    assemble_A_estimate,
    assemble_vector_potential,
    cutoff_radius,
    decompose,
    dtn_bound,
    dual_lattice_ball,
    evaluate_integral_identity,
    extract_dA_hat,
    extract_phi_hat,
    extract_q_hat,
    lowpass_invert,
    parameter_coupling,
    recommended_lambda,
    reconstruct_coefficients,
    sample_frequencies,
    theorem_exponents,
)

from tests.conftest import TEST_WIDTHS, bump

# Test constants
TEST_H = 0.05
TEST_LAMBDA = 4.0
AXIS = (1, 0, 0)
ORIGIN = (0.0, 0.0, 0.0)
SHIFT = (0.0, 0.5, 0.0)


@pytest.fixture
def context(zero_coeffs, q_only, chain):
    """Reference bilaplacian against a potential bump."""
    return IdentityContext(zero_coeffs, q_only, chain)


def _samples(kind, entries, components=1):
    return FourierSamples(
        kind=kind,
        samples=tuple(
            FrequencySample(
                index=m,
                values=np.full(components, value, dtype=complex),
                budgets=np.zeros(components),
            )
            for m, value in entries
        ),
        tau=TEST_H * TEST_LAMBDA,
        h=TEST_H,
        lam=TEST_LAMBDA,
        rho=np.pi,
        nyquist=40.0,
    )


@pytest.mark.parametrize("index", [(0, 0, 0), AXIS])
def test_q_sample_within_budget(context, index):
    """Test |q̂ estimate − 𝓕(q)(ξ)| ≤ budget for a potential-only pair."""
    sample = extract_q_hat(context, index, TEST_H, TEST_LAMBDA, QMode.A_ZERO)
    exact = fourier_transform_at(context.difference.q, sample.xi)
    assert abs(sample.values[0] - exact) <= sample.budgets[0] * (1 + 1e-9) + 1e-12
    assert 0.0 < sample.cgo_residual <= CgoSettings().residual_tol
    assert sample.identity_residual is None


def test_identical_pair_gives_zero(zero_coeffs, chain):
    """Test that equal coefficients give vanishing samples."""
    context = IdentityContext(zero_coeffs, zero_coeffs, chain)
    sample = extract_q_hat(context, AXIS, TEST_H, TEST_LAMBDA, QMode.A_ZERO)
    assert sample.values[0] == 0
    assert sample.budgets[0] == 0.0


def test_phi_sample_of_identical_pair(grid, zero_coeffs, chain):
    """Test that equal coefficients and A_sol = 0 give a zero φ sample."""
    context = IdentityContext(zero_coeffs, zero_coeffs, chain)
    sample = extract_phi_hat(context, AXIS, TEST_H, TEST_LAMBDA, VectorField.zeros(grid))
    assert sample.values.shape == (1,)
    assert sample.values[0] == 0
    assert sample.budgets[0] == 0.0
    with pytest.raises(ValueError, match="tau too large"):
        extract_phi_hat(context, AXIS, 1.0, 1.0, VectorField.zeros(grid))


def test_dA_at_origin_is_degenerate(context):
    """Test that ξ = 0 carries no dA information."""
    sample = extract_dA_hat(context, (0, 0, 0), TEST_H, TEST_LAMBDA)
    assert sample.degenerate
    assert np.all(sample.values == 0)
    assert sample.values.shape == (3,)


def test_extraction_rejects_large_tau(context):
    """Test τ|ξ| ≤ 2."""
    with pytest.raises(ValueError, match="tau too large"):
        extract_dA_hat(context, AXIS, 1.0, 1.0)
    with pytest.raises(ValueError, match="tau too large"):
        extract_q_hat(context, AXIS, 1.0, 1.0)


def test_a_zero_mode_needs_vanishing_A(zero_coeffs, full_coeffs, chain):
    """Test that A_zero mode refuses first-order terms."""
    context = IdentityContext(zero_coeffs, full_coeffs, chain)
    with pytest.raises(ValueError, match="A_zero mode requires"):
        extract_q_hat(context, AXIS, TEST_H, TEST_LAMBDA, QMode.A_ZERO)


def test_verify_identity_records_residual(zero_coeffs, q_only, chain):
    """Test that identity verification reports a residual."""
    context = IdentityContext(zero_coeffs, q_only, chain, verify_identity=True)
    sample = extract_q_hat(context, (0, 0, 0), TEST_H, TEST_LAMBDA, QMode.A_ZERO)
    assert sample.identity_residual is not None
    assert sample.identity_residual >= 0.0


def test_cutoff_radius():
    """Test ρ = h^{−2/(n+2)} for q and h^{−1/(n+2)} for dA."""
    assert cutoff_radius(TEST_H, 3, SampleKind.Q) == pytest.approx(3.314, abs=1e-3)
    assert cutoff_radius(TEST_H, 3, SampleKind.DA) == pytest.approx(1.821, abs=1e-3)
    assert cutoff_radius(TEST_H, 3, SampleKind.PHI, rho_factor=2.0) == pytest.approx(
        2 * 1.821, abs=2e-3
    )
    with pytest.raises(ValueError, match="h must be positive"):
        cutoff_radius(0.0, 3, SampleKind.Q)


def test_dual_lattice_ball(grid):
    """Test the lattice points inside |πm| ≤ radius."""
    ball = dual_lattice_ball(grid, np.pi)
    assert len(ball) == 7
    assert (0, 0, 0) in ball
    assert (-1, 0, 0) in ball
    assert dual_lattice_ball(grid, 0.5) == [(0, 0, 0)]


def test_lowpass_constant(grid):
    """Test that a single ξ = 0 sample of 8 rebuilds the constant one."""
    result = lowpass_invert(_samples(SampleKind.Q, [((0, 0, 0), 8.0)]), grid)
    assert np.allclose(result.field.values, 1.0)
    assert result.count == 1


def test_lowpass_cosine(grid):
    """Test that samples 4 at ±πe₁ rebuild cos(πx₁)."""
    samples = _samples(SampleKind.Q, [((1, 0, 0), 4.0), ((-1, 0, 0), 4.0)])
    result = lowpass_invert(samples, grid)
    expected = from_function(grid, lambda x, y, z: np.cos(np.pi * x) + 0 * y)
    assert np.allclose(result.field.values, expected.values, atol=1e-12)


def test_vector_potential_from_phi_samples(grid):
    """Test A = ∇φ for φ = cos(πx₁) when every dA sample vanishes."""
    dA = _samples(SampleKind.DA, [((0, 0, 0), 0.0), ((1, 0, 0), 0.0)], 3)
    phi = _samples(SampleKind.PHI, [((1, 0, 0), 4.0), ((-1, 0, 0), 4.0)])
    A = assemble_vector_potential(dA, grid, phi)
    expected = from_function(grid, lambda x, y, z: -np.pi * np.sin(np.pi * x) + 0 * y)
    assert np.allclose(A.components[0].values, expected.values, atol=1e-10)
    assert np.allclose(A.components[1].values, 0.0)
    assert np.allclose(A.components[2].values, 0.0)


def test_decompose_gradient_field(grid):
    """Test that a pure gradient has no solenoidal part."""
    exact = from_function(
        grid, lambda x, y, z: np.sin(np.pi * x) * np.sin(np.pi * y) * np.sin(np.pi * z)
    )
    A = gradient(exact)
    result = decompose(A)
    assert result.boundary_residual == 0.0
    recombined = result.A_sol + gradient(result.phi)
    for got, want in zip(recombined.components, A.components):
        assert np.allclose(got.values, want.values)
    assert linf_norm(result.phi - exact) < 0.05
    assert result.h is None


def test_theorem_exponents():
    """Test the exponents for n = 3, s = 4."""
    exponents = theorem_exponents(3, 4.0)
    assert exponents.eta == pytest.approx(1.25)
    assert exponents.eta_tilde == pytest.approx(0.75)
    assert exponents.mu1 == pytest.approx(0.00625)
    assert exponents.mu2 == pytest.approx(1.875e-5)
    assert exponents.mu_prime == pytest.approx(9.375e-6)
    assert exponents.a_zero_log == pytest.approx(0.4)
    assert exponents.linf_theta == pytest.approx(0.5)
    with pytest.raises(ValueError, match="must exceed"):
        theorem_exponents(3, 2.5)


def test_parameter_coupling():
    """Test α₃ and α₄ at the recommended λ."""
    lam = recommended_lambda(1.0, 3)
    assert lam == pytest.approx(24 * np.sqrt(3))
    coupling = parameter_coupling(1.0, 0.5, lam, 3)
    assert coupling.R == pytest.approx(np.sqrt(3))
    assert coupling.alpha3 == pytest.approx(1.0 / 6.0)
    assert coupling.alpha4 == pytest.approx(0.25 + 0.5 / 3.0)
    assert coupling.decaying
    assert not parameter_coupling(1.0, 0.0, 1.0, 3).decaying


def test_parameter_validation():
    """Test rejection of nonpositive inputs."""
    with pytest.raises(ValueError, match="alpha1 must be positive"):
        recommended_lambda(0.0, 3)
    with pytest.raises(ValueError, match="safety must exceed 1"):
        recommended_lambda(1.0, 3, safety=1.0)
    with pytest.raises(ValueError, match="lambda must be positive"):
        parameter_coupling(1.0, 1.0, 0.0, 3)


def test_A_estimate(grid):
    """Test the triangle inequality report and the h consistency check."""
    A = VectorField.from_arrays(
        grid,
        (
            bump(grid, (0.5, 0.5, 0.5), 0.15, 1.0),
            np.zeros(grid.shape),
            bump(grid, (0.4, 0.5, 0.6), 0.15, 0.5),
        ),
    )
    dA = LowpassResult(field=d_operator(A), rho=1.0, nyquist=40.0, h=TEST_H, count=1)
    report = assemble_A_estimate(dA, decompose(A, TEST_H), 4.0)
    assert report.triangle_ok
    assert report.dA_linf > 0
    assert report.exponents.n == 3
    with pytest.raises(ValueError, match="different runs"):
        assemble_A_estimate(dA, decompose(A, 0.1), 4.0)


def test_sample_frequencies_needs_solenoidal_part(context):
    """Test that φ samples require A_sol."""
    with pytest.raises(ValueError, match="phi samples need"):
        sample_frequencies(context, SampleKind.PHI, TEST_H, TEST_LAMBDA)


def test_reconstruct_potential_only(context, grid):
    """Test the A_zero pipeline over the seven-point q ball."""
    result = reconstruct_coefficients(context, TEST_H, TEST_LAMBDA, mode=QMode.A_ZERO, threads=2)
    assert result.q.count == 7
    assert result.q_samples.tau == pytest.approx(TEST_H * TEST_LAMBDA)
    assert result.dA_samples is None
    assert result.A is None
    assert isinstance(result.q.field, ScalarField)
    assert result.q.field.grid == grid


def test_integral_identity_checks_roles(context, chain):
    """Test the role order and the all-or-nothing bound inputs."""
    directions = make_directions(ORIGIN, (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), 0.5, SHIFT)
    u1, u2 = context.cgo_pair(directions)
    with pytest.raises(ValueError, match="u1 must be adjoint-side"):
        evaluate_integral_identity(context.coeffs1, context.coeffs2, u2, u1, chain)
    with pytest.raises(ValueError, match="together"):
        evaluate_integral_identity(
            context.coeffs1, context.coeffs2, u1, u2, chain, alphas=(1.0, 1.0)
        )


def test_dtn_bound_grows_with_delta(context):
    """Test that the bound is positive and increasing in δ."""
    directions = make_directions(ORIGIN, (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), 0.5, SHIFT)
    u1, u2 = context.cgo_pair(directions)
    args = (cgo_values(u1), cgo_values(u2), cgo_laplacian(u2), (1.0, 1.0))
    assert 0.0 < dtn_bound(*args, 0.0, 0.1) < dtn_bound(*args, 1e-3, 0.1)


def _dA_oracle(context, sample):
    dA = d_operator(context.difference.A)
    return np.array([fourier_transform_at(c, sample.xi) for c in dA.components])


@pytest.mark.slow
def test_dA_samples_within_budget(zero_coeffs, full_coeffs, chain):
    """Test that nearly every nondegenerate dA slot lies within its budget."""
    context = IdentityContext(zero_coeffs, full_coeffs, chain)
    inside = total = 0
    for index in [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 0, 1), (0, 1, 1)]:
        sample = extract_dA_hat(context, index, TEST_H, TEST_LAMBDA)
        oracle = _dA_oracle(context, sample)
        for slot, (j, k) in enumerate([(0, 1), (0, 2), (1, 2)]):
            if index[j] == 0 and index[k] == 0:
                continue
            total += 1
            inside += abs(sample.values[slot] - oracle[slot]) <= sample.budgets[slot]
    assert total == 15
    assert inside >= 0.9 * total


@pytest.mark.slow
def test_dA_close_to_quadrature_transform(zero_coeffs, full_coeffs, chain):
    """Test the dA estimate against 𝓕(dA) at the four smallest lattice points."""
    context = IdentityContext(zero_coeffs, full_coeffs, chain)
    errors = []
    sizes = []
    for index in [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0)]:
        sample = extract_dA_hat(context, index, TEST_H, TEST_LAMBDA)
        oracle = _dA_oracle(context, sample)
        errors.append(sample.values - oracle)
        sizes.append(oracle)
    assert np.linalg.norm(errors) <= 0.15 * np.linalg.norm(sizes)


def _identity_residual(N):
    grid = build_grid(3, N)
    chain = make_neighborhoods(grid, *TEST_WIDTHS)
    inside = grid.boundary_distance() > 2.5 * grid.spacing
    q = np.where(inside, bump(grid, (0.5, 0.5, 0.5), 0.10, 1.0), 0.0)
    coeffs1 = CoefficientSet.zeros(grid)
    coeffs2 = CoefficientSet(A=VectorField.zeros(grid), q=ScalarField(grid=grid, values=q))
    chi = Cutoff(grid=grid, values=inside.astype(float), gap=0.0)
    context = IdentityContext(coeffs1, coeffs2, chain)
    directions = make_directions(ORIGIN, (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), 0.4, SHIFT)
    u1, u2 = context.cgo_pair(directions)
    evidence = evaluate_integral_identity(coeffs1, coeffs2, u1, u2, chain, chi=chi)
    return evidence.identity_residual, abs(evidence.lhs)


@pytest.mark.slow
def test_integral_identity_closes_under_refinement():
    """Test |lhs + commutator| ≤ 5% of |lhs| at N = 24, shrinking from N = 12."""
    coarse, _ = _identity_residual(12)
    fine, lhs = _identity_residual(24)
    assert lhs > 0.0
    assert fine <= 0.05 * lhs
    assert fine <= 0.5 * coarse

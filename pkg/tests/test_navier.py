"""Tests for the Navier problem solver."""

import numpy as np
import pytest

from pybiharmonic.experiment import forward_check
from pybiharmonic.fields import from_function
from pybiharmonic.grid import build_grid
from pybiharmonic.models.coefficients import CoefficientSet, ConditionFlag, NavierProblem
from pybiharmonic.models.fields import ScalarField
from pybiharmonic.models.settings import SolverSettings
from pybiharmonic.navier import NavierSolver, solve_navier

from tests.conftest import bump


def test_linear_data_is_reproduced(grid, zero_coeffs):
    """Test that u = x1 with Δu = 0 is recovered from its Navier data."""
    exact = from_function(grid, lambda x, y, z: x)
    solution = NavierSolver(zero_coeffs).solve_traces(exact, ScalarField.zeros(grid))
    assert solution.report.ok
    assert solution.report.method == "direct"
    assert np.allclose(solution.u.values, exact.values, atol=1e-9)
    assert np.allclose(solution.laplacian.values, 0.0, atol=1e-7)


def test_quadratic_data_is_reproduced(grid, zero_coeffs):
    """Test u = |x|² with Navier trace Δu = 6."""
    exact = from_function(grid, lambda x, y, z: x**2 + y**2 + z**2)
    six = ScalarField(grid=grid, values=np.full(grid.shape, 6.0))
    solution = NavierSolver(zero_coeffs).solve_traces(exact, six)
    assert np.allclose(solution.u.values, exact.values, atol=1e-8)
    assert np.allclose(solution.laplacian.values[grid.interior], 6.0, atol=1e-6)


def test_zero_data_gives_zero(grid, q_only):
    """Test the trivial problem short-cut."""
    problem = NavierProblem.homogeneous(q_only, ScalarField.zeros(grid))
    u, report = solve_navier(problem)
    assert np.all(u.values == 0)
    assert report.iterations == 0
    assert report.residual == 0.0


def test_forward_check_with_potential(q_only):
    """Test the manufactured sine solution with a potential bump."""
    result = forward_check(q_only)
    assert result["ok"]
    assert result["relative_l2_error"] < 0.05


def test_forward_check_converges():
    """Test second-order convergence of the manufactured solution error."""
    errors = []
    for N in (8, 16):
        coeffs = CoefficientSet.zeros(build_grid(3, N))
        errors.append(forward_check(coeffs)["l2_error"])
    assert errors[1] < errors[0] / 2.5


def test_gmres_path():
    """Test the preconditioned Krylov path on a small grid."""
    grid = build_grid(3, 8)
    coeffs = CoefficientSet.zeros(grid)
    exact = from_function(grid, lambda x, y, z: x)
    solver = NavierSolver(coeffs, SolverSettings(direct_size_cap=0))
    solution = solver.solve_traces(exact, ScalarField.zeros(grid))
    assert solver.method == "gmres"
    assert solution.report.method == "gmres"
    assert solution.report.ok
    assert np.allclose(solution.u.values, exact.values, atol=1e-6)


def test_solver_rejects_other_coefficients(grid, zero_coeffs, q_only):
    """Test that a factorization is tied to its coefficient set."""
    solver = NavierSolver(zero_coeffs)
    problem = NavierProblem.homogeneous(q_only, ScalarField.zeros(grid))
    with pytest.raises(ValueError, match="differ from the factorized"):
        solver.solve(problem)


def test_problem_traces_flag(grid, zero_coeffs):
    """Test detection of nonzero Navier traces."""
    rhs = ScalarField.zeros(grid)
    assert NavierProblem.homogeneous(zero_coeffs, rhs).has_zero_traces
    ones = ScalarField(grid=grid, values=np.ones(grid.shape))
    problem = NavierProblem(coeffs=zero_coeffs, rhs=rhs, dirichlet=ones, navier=rhs)
    assert not problem.has_zero_traces


def test_failed_factorization_is_flagged(monkeypatch, grid, zero_coeffs):
    """Test that a singular LU factorization is reported instead of raised."""

    def singular(matrix):
        raise RuntimeError("Factor is exactly singular")

    monkeypatch.setattr("pybiharmonic.navier.spla.splu", singular)
    solver = NavierSolver(zero_coeffs)
    zero = ScalarField.zeros(grid)
    rhs = ScalarField(grid=grid, values=bump(grid, (0.5, 0.5, 0.5), 0.1, 1.0))
    solution = solver.solve_traces(zero, zero, rhs=rhs)
    assert solution.report.condition_flag == ConditionFlag.NEAR_SINGULAR
    assert solution.report.residual == float("inf")
    assert np.all(np.isfinite(solution.u.values))
    assert solver.solve_traces(zero, zero).report.ok

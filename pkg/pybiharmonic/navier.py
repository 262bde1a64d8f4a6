"""Navier problem solver for 𝓛_{A,q}u = F.

The problem is split with v = Δu into the block system

    [ Δ_h        −I  ] [u]   [ −Δ_h(f lift)                    ]
    [ A·D_h + q   Δ_h ] [v] = [ F − Δ_h(g lift) − A·D_h(f lift) ]

on interior unknowns. The matrix is factorized (or preconditioned) once per
coefficient set so that many right-hand sides reuse it.
"""

import logging
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from pybiharmonic.models.coefficients import (
    CoefficientSet,
    ConditionFlag,
    NavierProblem,
    NavierSolution,
    SolveReport,
)
from pybiharmonic.models.fields import ScalarField
from pybiharmonic.models.grid import GridSpec
from pybiharmonic.models.settings import SolverSettings
from pybiharmonic.operators import interior_laplacian

logger = logging.getLogger(__name__)


def _kron_axis(grid: GridSpec, one_d: sp.spmatrix, axis: int) -> sp.csr_matrix:
    eye = sp.identity(grid.N, format="csr")
    out = sp.identity(1, format="csr")
    for k in range(grid.n):
        out = sp.kron(out, one_d if k == axis else eye, format="csr")
    return out


@lru_cache(maxsize=8)
def laplacian_matrix(grid: GridSpec) -> sp.csr_matrix:
    """Interior Dirichlet Laplacian in C order."""
    h2 = grid.spacing**2
    one_d = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(grid.N, grid.N)) / h2
    total = sp.csr_matrix((grid.N**grid.n, grid.N**grid.n))
    for axis in range(grid.n):
        total = total + _kron_axis(grid, one_d, axis)
    return total.tocsr()


@lru_cache(maxsize=8)
def central_difference_matrices(grid: GridSpec) -> Tuple[sp.csr_matrix, ...]:
    one_d = sp.diags([-1.0, 1.0], [-1, 1], shape=(grid.N, grid.N)) / (2 * grid.spacing)
    return tuple(_kron_axis(grid, one_d, axis) for axis in range(grid.n))


def _interior_central(values: np.ndarray, spacing: float, axis: int) -> np.ndarray:
    n = values.ndim
    core = [slice(1, -1)] * n
    plus = list(core)
    minus = list(core)
    plus[axis] = slice(2, None)
    minus[axis] = slice(None, -2)
    return (values[tuple(plus)] - values[tuple(minus)]) / (2.0 * spacing)


class NavierSolver:
    """Reusable solver for one coefficient set."""

    def __init__(
        self, coeffs: CoefficientSet, settings: Optional[SolverSettings] = None
    ):
        """Assemble and factorize the block system.

        Args:
            coeffs: Operator coefficients
            settings: Solver controls; defaults apply when omitted
        """
        self.coeffs = coeffs
        self.settings = settings or SolverSettings()
        self.grid = coeffs.grid
        grid = self.grid
        size = grid.N**grid.n

        lap = laplacian_matrix(grid).astype(np.complex128)
        first = sp.diags(coeffs.q.interior.ravel())
        self._A_interior = [c.interior.ravel() for c in coeffs.A.components]
        for A_k, D_k in zip(self._A_interior, central_difference_matrices(grid)):
            if np.any(A_k):
                first = first + sp.diags(-1j * A_k) @ D_k
        eye = sp.identity(size, dtype=np.complex128)
        self.matrix = sp.bmat([[lap, -eye], [first, lap]], format="csc")

        self.method = "direct" if grid.N <= self.settings.direct_size_cap else "gmres"
        self._lu = None
        self._preconditioner = None
        if self.method == "direct":
            try:
                self._lu = spla.splu(self.matrix)
            except RuntimeError as exc:
                logger.warning("LU factorization failed (%s); solves report near_singular", exc)
        else:
            try:
                ilu = spla.spilu(
                    self.matrix,
                    drop_tol=self.settings.ilu_drop_tol,
                    fill_factor=self.settings.ilu_fill_factor,
                )
            except RuntimeError as exc:
                logger.warning("ILU preconditioner failed (%s); running plain GMRES", exc)
            else:
                self._preconditioner = spla.LinearOperator(
                    self.matrix.shape, matvec=ilu.solve, dtype=np.complex128
                )
        logger.debug(
            "Navier system of size %d prepared (%s)", self.matrix.shape[0], self.method
        )

    def _rhs(self, problem: NavierProblem) -> np.ndarray:
        grid = self.grid
        spacing = grid.spacing
        f_lift = problem.dirichlet.boundary_layer()
        g_lift = problem.navier.boundary_layer()
        top = -interior_laplacian(f_lift, spacing)
        bottom = problem.rhs.interior - interior_laplacian(g_lift, spacing)
        for axis, A_k in enumerate(self._A_interior):
            if np.any(A_k):
                drift = _interior_central(f_lift, spacing, axis).ravel()
                bottom = bottom - (-1j * A_k * drift).reshape(grid.interior_shape)
        return np.concatenate([top.ravel(), bottom.ravel()])

    def _solve_system(self, rhs: np.ndarray) -> Tuple[np.ndarray, int]:
        if self.method == "direct":
            if self._lu is None:
                return np.full(rhs.shape, np.nan, dtype=np.complex128), 0
            return self._lu.solve(rhs), 1
        iterations: List[int] = [0]

        def count(_: object) -> None:
            iterations[0] += 1

        x, info = spla.gmres(
            self.matrix,
            rhs,
            rtol=self.settings.tolerance,
            atol=0.0,
            restart=self.settings.restart,
            maxiter=self.settings.max_iterations,
            M=self._preconditioner,
            callback=count,
            callback_type="pr_norm",
        )
        if info != 0:
            logger.warning("GMRES stopped with info=%d", info)
        return x, iterations[0]

    def solve(self, problem: NavierProblem) -> NavierSolution:
        """Solve one Navier problem with this solver's coefficients."""
        if problem.coeffs is not self.coeffs:
            raise ValueError("Problem coefficients differ from the factorized ones")
        grid = self.grid
        rhs = self._rhs(problem)
        size = grid.N**grid.n
        rhs_norm = float(np.linalg.norm(rhs))
        if rhs_norm == 0.0:
            x = np.zeros(2 * size, dtype=np.complex128)
            iterations, residual = 0, 0.0
        else:
            x, iterations = self._solve_system(rhs)
            residual = float(np.linalg.norm(self.matrix @ x - rhs)) / rhs_norm

        accepted = residual <= self.settings.accept_tolerance and np.all(np.isfinite(x))
        flag = ConditionFlag.OK if accepted else ConditionFlag.NEAR_SINGULAR
        if not accepted:
            logger.warning("Navier solve near-singular: residual %.3e", residual)
        report = SolveReport(
            iterations=iterations,
            residual=residual if np.isfinite(residual) else float("inf"),
            condition_flag=flag,
            method=self.method,
        )

        u = np.array(problem.dirichlet.boundary_layer())
        v = np.array(problem.navier.boundary_layer())
        u[grid.interior] = x[:size].reshape(grid.interior_shape)
        v[grid.interior] = x[size:].reshape(grid.interior_shape)
        if not np.all(np.isfinite(u)):
            u = np.nan_to_num(u)
            v = np.nan_to_num(v)
        return NavierSolution(
            u=ScalarField(grid=grid, values=u),
            laplacian=ScalarField(grid=grid, values=v),
            report=report,
        )

    def solve_traces(
        self,
        dirichlet: ScalarField,
        navier: ScalarField,
        rhs: Optional[ScalarField] = None,
    ) -> NavierSolution:
        problem = NavierProblem(
            coeffs=self.coeffs,
            rhs=rhs if rhs is not None else ScalarField.zeros(self.grid),
            dirichlet=dirichlet,
            navier=navier,
        )
        return self.solve(problem)


def solve_navier(
    problem: NavierProblem, settings: Optional[SolverSettings] = None
) -> Tuple[ScalarField, SolveReport]:
    """Solve 𝓛_{A,q}u = F, u = f and Δu = g on ∂Ω.

    Returns:
        The solution on the closed grid and the solve report; a
        near-singular flag is reported, never raised
    """
    solution = NavierSolver(problem.coeffs, settings).solve(problem)
    return solution.u, solution.report

"""Partial Dirichlet-to-Neumann assembly and weighted difference norms."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, Tuple

import numpy as np

from pybiharmonic.boundary import (
    DEFAULT_MODES,
    BoundaryBasis,
    BoundaryPair,
    FaceSineBasis,
    patch_bases,
    project_traces,
)
from pybiharmonic.exceptions import NearSingularError
from pybiharmonic.models.coefficients import CoefficientSet
from pybiharmonic.models.dtn import PartialDtnMatrix
from pybiharmonic.models.grid import BoundaryPatch
from pybiharmonic.models.settings import SolverSettings
from pybiharmonic.navier import NavierSolver

logger = logging.getLogger(__name__)

INPUT_ORDERS = (3.5, 1.5)
OUTPUT_ORDERS = (2.5, 0.5)


def output_weights(bases: Sequence[FaceSineBasis]) -> np.ndarray:
    """(1+λ)^{5/4} on the ∂_νu rows, (1+λ)^{1/4} on the ∂_νΔu rows."""
    lam = np.concatenate([b.eigenvalues for b in bases])
    return np.concatenate(
        [(1.0 + lam) ** (OUTPUT_ORDERS[0] / 2), (1.0 + lam) ** (OUTPUT_ORDERS[1] / 2)]
    )


def dtn_column(
    solver: NavierSolver,
    basis: BoundaryBasis,
    outputs: Sequence[FaceSineBasis],
    pair: BoundaryPair,
) -> Tuple[np.ndarray, float]:
    """γ₂ coefficients of (∂_νu, ∂_νΔu) for Navier data ``pair`` and F = 0."""
    f, g = basis.traces(pair)
    solution = solver.solve_traces(f, g)
    if not solution.report.ok:
        raise NearSingularError(
            f"Navier solve near-singular (residual {solution.report.residual:.3e})"
        )
    du = project_traces(outputs, solution.u)
    dlap = project_traces(outputs, solution.laplacian)
    return np.concatenate(list(du) + list(dlap)), solution.report.residual


def assemble_dtn(
    coeffs: CoefficientSet,
    basis: BoundaryBasis,
    gamma2: BoundaryPatch,
    output_modes: int = DEFAULT_MODES,
    settings: Optional[SolverSettings] = None,
    threads: int = 1,
    solver: Optional[NavierSolver] = None,
) -> PartialDtnMatrix:
    """Assemble Λ^{γ₁,γ₂}_{A,q} column by column.

    Args:
        coeffs: Operator coefficients
        basis: Input basis supported in γ₁
        gamma2: Output patch
        output_modes: Sine modes per axis on each γ₂ face
        settings: Solver controls
        threads: Worker threads for the column solves
        solver: Prepared solver for ``coeffs``, reused when given

    Returns:
        The weighted DtN matrix

    Raises:
        NearSingularError: If a column solve is near-singular; the message
            carries the column index
    """
    if basis.grid != gamma2.grid or basis.grid != coeffs.grid:
        raise ValueError("Basis, output patch and coefficients use different grids")
    solver = solver or NavierSolver(coeffs, settings)
    outputs = patch_bases(gamma2, output_modes)

    def column(index: int) -> Tuple[np.ndarray, float]:
        try:
            return dtn_column(solver, basis, outputs, basis.pair(index))
        except NearSingularError as exc:
            raise NearSingularError(str(exc), column=index) from exc

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(column, range(basis.count)))

    matrix = np.stack([r[0] for r in results], axis=1)
    logger.info(
        "Assembled %dx%d DtN matrix (max residual %.2e)",
        matrix.shape[0],
        matrix.shape[1],
        max((r[1] for r in results), default=0.0),
    )
    return PartialDtnMatrix(
        matrix=matrix,
        weights_in=basis.weights(*INPUT_ORDERS),
        weights_out=output_weights(outputs),
        orders_in=INPUT_ORDERS,
        orders_out=OUTPUT_ORDERS,
        residuals=tuple(r[1] for r in results),
    )


def dtn_difference_norm(
    first: PartialDtnMatrix,
    second: PartialDtnMatrix,
    seed: int = 0,
    tol: float = 1e-8,
    max_iter: int = 10000,
) -> float:
    """Largest singular value of W_out (Λ₁ − Λ₂) W_in⁻¹ by power iteration.

    Raises:
        ValueError: If shapes or weights differ
    """
    if first.shape != second.shape:
        raise ValueError(f"DtN shape mismatch: {first.shape} vs {second.shape}")
    if not (
        np.array_equal(first.weights_in, second.weights_in)
        and np.array_equal(first.weights_out, second.weights_out)
    ):
        raise ValueError("DtN weight mismatch")
    diff = first.matrix - second.matrix
    if not np.any(diff):
        return 0.0
    weighted = first.weights_out[:, None] * diff / first.weights_in[None, :]

    rng = np.random.default_rng(seed)
    x = rng.standard_normal(weighted.shape[1]) + 1j * rng.standard_normal(
        weighted.shape[1]
    )
    x /= np.linalg.norm(x)
    sigma = 0.0
    for iteration in range(1, max_iter + 1):
        y = weighted @ x
        estimate = float(np.linalg.norm(y))
        z = weighted.conj().T @ y
        z_norm = np.linalg.norm(z)
        if z_norm == 0.0:
            return estimate
        x = z / z_norm
        if abs(estimate - sigma) <= tol * estimate:
            logger.debug("Power iteration converged after %d steps", iteration)
            return estimate
        sigma = estimate
    logger.warning("Power iteration hit max_iter=%d", max_iter)
    return sigma

"""Stability sweeps: DtN differences against reconstruction errors."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from pybiharmonic.boundary import BoundaryBasis, boundary_basis
from pybiharmonic.config import ScenarioSetup, build_scenario
from pybiharmonic.dtn import assemble_dtn, dtn_difference_norm
from pybiharmonic.fields import d_operator
from pybiharmonic.models.coefficients import CoefficientSet, NavierProblem
from pybiharmonic.models.dtn import PartialDtnMatrix
from pybiharmonic.models.experiment import (
    CellFailure,
    FitModel,
    StabilityFit,
    StabilityRecord,
    SweepReport,
)
from pybiharmonic.models.fields import ScalarField
from pybiharmonic.models.grid import GridSpec
from pybiharmonic.models.reconstruction import QMode, SampleKind, TheoremExponents
from pybiharmonic.models.scenario import Scenario
from pybiharmonic.models.settings import SolverSettings
from pybiharmonic.navier import NavierSolver
from pybiharmonic.norms import l2_norm, linf_norm, sobolev_norm
from pybiharmonic.reconstruction import (
    IdentityContext,
    cutoff_radius,
    nyquist_radius,
    reconstruct_coefficients,
    theorem_exponents,
)

logger = logging.getLogger(__name__)

MIN_FIT_RECORDS = 4
MIN_DECADES = 1.0


def _clamped(rho: float, setup: ScenarioSetup) -> float:
    return min(rho, nyquist_radius(setup.grid))


def run_cell(
    setup: ScenarioSetup,
    coeffs2: CoefficientSet,
    t: float,
    h: float,
    delta: float,
    exponents: TheoremExponents,
) -> StabilityRecord:
    """Reconstruct (A₂ − A₁, q₂ − q₁) at one h and measure the errors."""
    scenario = setup.scenario
    sweep = scenario.sweep
    coeffs1 = setup.reference
    context = IdentityContext(
        coeffs1,
        coeffs2,
        setup.chain,
        solver_settings=scenario.solver,
        cgo_settings=scenario.cgo,
        verify_identity=sweep.verify_identity,
    )
    result = reconstruct_coefficients(
        context, h, sweep.lam, rho_factor=sweep.rho_factor, mode=sweep.mode
    )
    truth = context.difference

    q_error = result.q.field - truth.q  # type: ignore[operator]
    err_q_Hminus1 = sobolev_norm(q_error, -1.0)
    err_dA: Optional[float] = None
    err_A: Optional[float] = None
    if result.dA is not None and result.A is not None:
        true_dA = d_operator(truth.A)
        dA_error = [
            rec - true
            for rec, true in zip(result.dA.field.components, true_dA.components)  # type: ignore[union-attr]
        ]
        err_dA = max(linf_norm(c) for c in dA_error)
        err_A = linf_norm(result.A - truth.A)
    residuals = [s.cgo_residual for s in result.q_samples.samples]
    if result.dA_samples is not None:
        residuals += [s.cgo_residual for s in result.dA_samples.samples]

    n = setup.grid.n
    theta = exponents.linf_theta
    return StabilityRecord(
        t=t,
        h=h,
        delta=delta,
        err_A_Linf=err_A,
        err_dA_Linf=err_dA,
        err_q_Hminus1=err_q_Hminus1,
        err_q_Linf=linf_norm(q_error),
        q_linf_bound=scenario.coefficients.M ** (1.0 - theta) * err_q_Hminus1**theta,
        rho_dA=_clamped(cutoff_radius(h, n, SampleKind.DA, sweep.rho_factor), setup),
        rho_q=_clamped(cutoff_radius(h, n, SampleKind.Q, sweep.rho_factor), setup),
        lam=sweep.lam,
        tau=sweep.lam * h,
        above_threshold=delta > sweep.delta_threshold,
        mode=sweep.mode,
        q_frequencies=result.q.count,
        cgo_residual=max(residuals, default=0.0),
        mu1=exponents.mu1,
        mu2=exponents.mu2,
        mu_prime=exponents.mu_prime,
    )


def _assemble(
    setup: ScenarioSetup,
    basis: BoundaryBasis,
    coeffs: CoefficientSet,
    threads: int,
) -> PartialDtnMatrix:
    scenario = setup.scenario
    return assemble_dtn(
        coeffs,
        basis,
        setup.gamma2,
        output_modes=scenario.sweep.output_modes,
        threads=threads,
        solver=NavierSolver(coeffs, scenario.solver),
    )


def run_scenario(
    scenario: Scenario,
    threads: int = 1,
    seed: int = 0,
    setup: Optional[ScenarioSetup] = None,
) -> SweepReport:
    """Sweep the perturbation scales and h values of one scenario.

    For every scale t both DtN matrices are assembled and δ is measured;
    every (t, h) cell then runs the reconstruction. A failing stage aborts
    only its cells, which are listed in ``failures``. Records come back in
    (t, h) sweep order whatever the thread count.
    """
    setup = setup or build_scenario(scenario)
    sweep = scenario.sweep
    exponents = theorem_exponents(setup.grid.n, scenario.coefficients.s)
    basis = boundary_basis(setup.gamma1, sweep.basis_modes)
    reference = _assemble(setup, basis, setup.reference, threads)

    failures: List[CellFailure] = []
    deltas: List[Tuple[float, float]] = []
    cells: List[Tuple[CoefficientSet, float, float, float]] = []
    for t in sweep.all_scales:
        try:
            coeffs2 = setup.coefficients_at(t)
            perturbed = reference if t == 0.0 else _assemble(setup, basis, coeffs2, threads)
            delta = dtn_difference_norm(reference, perturbed, seed=seed)
        except (ValueError, RuntimeError) as exc:
            logger.warning("Scale t=%g aborted in the DtN stage: %s", t, exc)
            failures.append(CellFailure(t=t, stage="dtn", error=str(exc)))
            continue
        logger.info("t=%g: delta=%.6e", t, delta)
        deltas.append((t, delta))
        cells.extend((coeffs2, t, h, delta) for h in sweep.h_values)

    def work(cell: Tuple[CoefficientSet, float, float, float]) -> Union[StabilityRecord, CellFailure]:
        coeffs2, t, h, delta = cell
        try:
            return run_cell(setup, coeffs2, t, h, delta, exponents)  # type: ignore[arg-type]
        except (ValueError, RuntimeError) as exc:
            logger.warning("Cell t=%g h=%g aborted: %s", t, h, exc)
            return CellFailure(t=t, h=h, stage="reconstruct", error=str(exc))

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        outcomes = list(pool.map(work, cells))

    records = [o for o in outcomes if isinstance(o, StabilityRecord)]
    failures.extend(o for o in outcomes if isinstance(o, CellFailure))
    logger.info(
        "Scenario %s: %d records, %d aborted cells", scenario.name, len(records), len(failures)
    )
    return SweepReport(
        scenario=scenario.name,
        records=records,
        failures=failures,
        deltas=deltas,
        exponents=exponents,
    )


def _regressor(delta: np.ndarray, model: FitModel) -> np.ndarray:
    x = np.abs(np.log(delta))
    if model == FitModel.LOGLOG_POWER:
        x = np.abs(np.log(x))
    return x


def fit_stability_curve(
    records: Sequence[StabilityRecord],
    model: Union[FitModel, str] = FitModel.LOG_POWER,
    column: str = "err_q_Hminus1",
    reference: Optional[float] = None,
) -> StabilityFit:
    """Fit log(err) = c + exponent·log x, x = |log δ| or |log|log δ||.

    Records with δ = 0, a zero or missing error, or a degenerate regressor
    are skipped.

    Raises:
        ValueError: If fewer than four distinct δ remain or they span less
            than one decade ("need wider delta range")
    """
    model = FitModel(model)
    pairs: Dict[float, List[float]] = {}
    for record in records:
        err = getattr(record, column)
        if err is None or err <= 0 or record.delta <= 0:
            continue
        pairs.setdefault(record.delta, []).append(float(err))
    delta = np.array([d for d, errs in pairs.items() for _ in errs])
    err = np.array([e for errs in pairs.values() for e in errs])
    if delta.size:
        x = _regressor(delta, model)
        keep = (x > 0) & np.isfinite(x)
        delta, err, x = delta[keep], err[keep], x[keep]
    distinct = np.unique(delta) if delta.size else delta
    if distinct.size < MIN_FIT_RECORDS or np.log10(distinct.max() / distinct.min()) < MIN_DECADES:
        raise ValueError(
            f"need wider delta range: {distinct.size} distinct delta values, "
            f"need {MIN_FIT_RECORDS} spanning {MIN_DECADES:g} decade"
        )

    design = np.column_stack([np.log(x), np.ones_like(x)])
    target = np.log(err)
    coef, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
    fitted = design @ coef
    resid = target - fitted
    dof = max(len(target) - 2, 1)
    sigma_sq = float(resid @ resid) / dof
    spread = float(np.sum((design[:, 0] - design[:, 0].mean()) ** 2))
    stderr = float(np.sqrt(sigma_sq / spread)) if spread > 0 else 0.0
    fit = StabilityFit(
        model=model,
        column=column,
        exponent=float(coef[0]),
        intercept=float(coef[1]),
        residual=float(np.sqrt(np.mean(resid**2))),
        stderr=stderr,
        count=len(target),
        reference=reference,
    )
    logger.info(
        "Fit %s of %s: exponent %.4g ± %.2g (reference %s)",
        model.value,
        column,
        fit.exponent,
        fit.stderr,
        reference,
    )
    return fit


def reference_exponent(
    exponents: TheoremExponents, mode: QMode, model: FitModel
) -> float:
    """Predicted negative exponent for the fitted curve."""
    if QMode(mode) == QMode.A_ZERO:
        return -exponents.a_zero_log
    if FitModel(model) == FitModel.LOGLOG_POWER:
        return -exponents.mu_prime
    return -exponents.mu2


def summarize(report: SweepReport) -> Dict[str, Dict[str, object]]:
    """Summary sections for the run report."""
    exp = report.exponents
    sections: Dict[str, Dict[str, object]] = {
        "sweep": {
            "records": len(report.records),
            "aborted_cells": len(report.failures),
            "deltas": ", ".join(f"t={t:g}:{d:.6e}" for t, d in report.deltas),
        },
        "predicted_exponents": {
            "mu1": exp.mu1,
            "mu2": exp.mu2,
            "mu_prime": exp.mu_prime,
            "a_zero_power": exp.a_zero_power,
            "a_zero_log": exp.a_zero_log,
            "linf_theta": exp.linf_theta,
        },
    }
    if report.failures:
        sections["failures"] = {
            f"t={f.t:g},h={f.h}": f"{f.stage}: {f.error}" for f in report.failures
        }
    return sections


def sine_product(grid: GridSpec) -> Tuple[np.ndarray, List[np.ndarray]]:
    """u* = Π sin(πx_k) and its exact gradient; u* = Δu* = 0 on ∂Ω."""
    sines = [np.sin(np.pi * x) for x in grid.mesh()]
    u = np.prod(sines, axis=0)
    grads = []
    for k, x in enumerate(grid.mesh()):
        others = np.prod([s for j, s in enumerate(sines) if j != k], axis=0)
        grads.append(np.pi * np.cos(np.pi * x) * others)
    return u, grads


def forward_check(
    coeffs: CoefficientSet, settings: Optional[SolverSettings] = None
) -> Dict[str, object]:
    """Solve 𝓛u = 𝓛u* with homogeneous Navier data and compare with u*."""
    grid = coeffs.grid
    u, grads = sine_product(grid)
    rhs = (grid.n * np.pi**2) ** 2 * u + coeffs.q.values * u
    for A_k, g in zip(coeffs.A.components, grads):
        rhs = rhs - 1j * A_k.values * g
    problem = NavierProblem.homogeneous(coeffs, ScalarField(grid=grid, values=rhs))
    solution = NavierSolver(coeffs, settings).solve(problem)
    exact = ScalarField(grid=grid, values=u)
    error = solution.u - exact
    report = solution.report
    logger.info("Forward check: L2 error %.3e (%s)", l2_norm(error), report.method)
    return {
        "N": grid.N,
        "l2_error": l2_norm(error),
        "linf_error": linf_norm(error),
        "relative_l2_error": l2_norm(error) / l2_norm(exact),
        "residual": report.residual,
        "iterations": report.iterations,
        "method": report.method,
        "ok": report.ok,
        "solution": solution,
    }

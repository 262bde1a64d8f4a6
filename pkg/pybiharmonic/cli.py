"""Command-line front end.

Every subcommand reads the scenarios of ``--config`` (the calibration
scenario when omitted) and writes CSV tables, binary fields and a
``summary.txt`` under ``--out/<scenario name>/<subcommand>``. The exit code is
0 only when no cell aborted.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from pybiharmonic import __version__
from pybiharmonic.boundary import boundary_basis
from pybiharmonic.carleman import carleman_check, make_weight, unique_continuation_experiment
from pybiharmonic.cgo import build_cgo, lattice_shift, make_directions, plane_directions, remainder_norm
from pybiharmonic.config import ScenarioSetup, build_scenario, load_config
from pybiharmonic.dtn import assemble_dtn, dtn_difference_norm
from pybiharmonic.exceptions import ConfigError
from pybiharmonic.experiment import (
    fit_stability_curve,
    forward_check,
    reference_exponent,
    run_scenario,
    sine_product,
    summarize,
)
from pybiharmonic.fields import d_operator, gradient
from pybiharmonic.io import (
    encode_field,
    ensure_dir,
    read_csv_models,
    write_csv,
    write_dtn,
    write_field,
    write_summary,
)
from pybiharmonic.models.cgo import AmplitudeKind, CgoDirections, CgoRole
from pybiharmonic.models.experiment import FitModel, StabilityRecord
from pybiharmonic.models.fields import ScalarField, TwoFormField
from pybiharmonic.models.reconstruction import FourierSamples, QMode
from pybiharmonic.models.scenario import Scenario
from pybiharmonic.navier import NavierSolver
from pybiharmonic.norms import fourier_transform_at
from pybiharmonic.reconstruction import (
    IdentityContext,
    assemble_A_estimate,
    decompose,
    parameter_coupling,
    reconstruct_coefficients,
    theorem_exponents,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ABORTED = 1
EXIT_CONFIG = 2

Command = Callable[[ScenarioSetup, Path, argparse.Namespace], bool]


def _single_run_scale(scenario: Scenario) -> float:
    return max(scenario.sweep.scales, default=0.0)


def cmd_forward(setup: ScenarioSetup, out: Path, args: argparse.Namespace) -> bool:
    scenario = setup.scenario
    coeffs = setup.coefficients_at(_single_run_scale(scenario))
    result = forward_check(coeffs, scenario.solver)
    solution = result.pop("solution")
    write_field(solution.u, out / "u.bhfld")  # type: ignore[attr-defined]
    write_field(solution.laplacian, out / "laplacian.bhfld")  # type: ignore[attr-defined]
    write_csv([result], out / "forward.csv")
    write_summary(scenario, {"forward": result}, out / "summary.txt")
    return bool(result["ok"])


def cmd_dtn(setup: ScenarioSetup, out: Path, args: argparse.Namespace) -> bool:
    scenario = setup.scenario
    sweep = scenario.sweep
    basis = boundary_basis(setup.gamma1, sweep.basis_modes)

    def assemble(t: float):  # type: ignore[no-untyped-def]
        coeffs = setup.coefficients_at(t)
        return assemble_dtn(
            coeffs,
            basis,
            setup.gamma2,
            output_modes=sweep.output_modes,
            threads=args.threads,
            solver=NavierSolver(coeffs, scenario.solver),
        )

    reference = assemble(0.0)
    write_dtn(reference, out / "dtn_t=0.bhdtn")
    rows = []
    for t in sweep.scales:
        matrix = assemble(t)
        write_dtn(matrix, out / f"dtn_t={t:g}.bhdtn")
        rows.append(
            {
                "t": t,
                "delta": dtn_difference_norm(reference, matrix, seed=args.seed),
                "rows": matrix.shape[0],
                "cols": matrix.shape[1],
                "max_residual": max(matrix.residuals, default=0.0),
            }
        )
    write_csv(rows, out / "dtn.csv")
    write_summary(scenario, {"dtn": {"basis_size": basis.count}}, out / "summary.txt")
    return True


def _directions_block(directions: CgoDirections) -> str:
    fmt = lambda v: np.array2string(np.asarray(v), precision=12, separator=", ")  # noqa: E731
    return (
        "{\n"
        f'  "tau": {directions.tau!r},\n'
        f'  "xi": {fmt(directions.xi)},\n'
        f'  "mu1": {fmt(directions.mu1)},\n'
        f'  "mu2": {fmt(directions.mu2)},\n'
        f'  "zeta1": "{fmt(directions.zeta1)}",\n'
        f'  "zeta2": "{fmt(directions.zeta2)}",\n'
        f'  "lattice_shift": {fmt(directions.lattice_shift)}\n'
        "}\n"
    )


def cmd_cgo(setup: ScenarioSetup, out: Path, args: argparse.Namespace) -> bool:
    scenario = setup.scenario
    coeffs = setup.coefficients_at(_single_run_scale(scenario))
    m = (1,) + (0,) * (setup.grid.n - 1)
    xi = np.pi * np.asarray(m, dtype=float)
    mu1, mu2, p = plane_directions(m)
    rows = []
    blocks = []
    for h in scenario.sweep.h_values:
        tau = scenario.sweep.lam * h
        directions = make_directions(xi, mu1, mu2, tau, lattice_shift(p))
        solution = build_cgo(
            coeffs, directions, AmplitudeKind.ONE, CgoRole.DIRECT_SIDE, scenario.cgo
        )
        rows.append(
            {
                "tau": tau,
                "iterations": solution.iterations,
                "residual": solution.residual,
                "remainder_h1_scl": remainder_norm(solution),
                "clamped_modes": solution.clamped_modes,
            }
        )
        (out / f"remainder_tau={tau:g}.bhfld").write_bytes(
            encode_field(solution.remainder.values)
        )
        blocks.append(_directions_block(directions))
    (out / "directions.txt").write_text("\n".join(blocks), encoding="utf-8")
    write_csv(rows, out / "cgo.csv")
    write_summary(scenario, {"cgo": {"index": " ".join(map(str, m))}}, out / "summary.txt")
    return True


def _sample_rows(samples: FourierSamples, oracles: Sequence[ScalarField]) -> List[Dict[str, object]]:
    rows = []
    for sample in samples.samples:
        for slot, value in enumerate(sample.values):
            rows.append(
                {
                    "kind": samples.kind.value,
                    "index": sample.index,
                    "component": slot,
                    "value": complex(value),
                    "oracle": fourier_transform_at(oracles[slot], sample.xi),
                    "budget": float(sample.budgets[slot]),
                    "degenerate": sample.degenerate,
                }
            )
    return rows


def cmd_reconstruct(setup: ScenarioSetup, out: Path, args: argparse.Namespace) -> bool:
    scenario = setup.scenario
    sweep = scenario.sweep
    coeffs2 = setup.coefficients_at(_single_run_scale(scenario))
    context = IdentityContext(
        setup.reference,
        coeffs2,
        setup.chain,
        solver_settings=scenario.solver,
        cgo_settings=scenario.cgo,
        verify_identity=sweep.verify_identity,
    )
    truth = context.difference
    sections: Dict[str, Dict[str, object]] = {}
    for h in sweep.h_values:
        result = reconstruct_coefficients(
            context, h, sweep.lam, sweep.rho_factor, sweep.mode, threads=args.threads
        )
        rows = _sample_rows(result.q_samples, [truth.q])
        write_field(result.q.field, out / f"q_h={h:g}.bhfld")  # type: ignore[arg-type]
        if result.dA_samples is not None and result.decomposition is not None:
            true_dA = d_operator(truth.A)
            rows += _sample_rows(result.dA_samples, list(true_dA.components))
            true_phi = decompose(truth.A).phi
            rows += _sample_rows(result.phi_samples, [true_phi])  # type: ignore[arg-type]
            field = result.dA.field  # type: ignore[union-attr]
            if isinstance(field, TwoFormField):
                for (j, k), component in field.items():
                    write_field(component, out / f"dA{j + 1}{k + 1}_h={h:g}.bhfld")
            decomposition = result.decomposition
            for k, component in enumerate(decomposition.A_sol.components):
                write_field(component, out / f"A_sol{k + 1}_h={h:g}.bhfld")
            for k, component in enumerate(gradient(decomposition.phi).components):
                write_field(component, out / f"grad_phi{k + 1}_h={h:g}.bhfld")
            estimate = assemble_A_estimate(result.dA, decomposition, scenario.coefficients.s)  # type: ignore[arg-type]
            sections[f"A_estimate h={h:g}"] = estimate.model_dump(exclude={"exponents"})
        write_csv(rows, out / f"reconstruction_h={h:g}.csv")
    write_summary(scenario, sections, out / "summary.txt")
    return True


def cmd_carleman(setup: ScenarioSetup, out: Path, args: argparse.Namespace) -> bool:
    scenario = setup.scenario
    settings = scenario.carleman
    weight = make_weight(setup.grid, setup.gamma0, settings.beta0)
    u, _ = sine_product(setup.grid)
    report = carleman_check(
        weight,
        ScalarField(grid=setup.grid, values=u),
        settings.h_values,
        ScalarField.zeros(setup.grid),
    )
    rows = [
        {"h": h, "lhs": lhs, "rhs": rhs, "ratio": ratio, "sub_ratio": sub}
        for h, lhs, rhs, ratio, sub in zip(
            report.h_values, report.lhs, report.rhs, report.ratios, report.sub_ratios
        )
    ]
    write_csv(rows, out / "carleman.csv")
    write_summary(
        scenario,
        {
            "carleman": {
                "best_constant": report.best_constant,
                "trend_slope": report.trend_slope,
                "h_floor": report.h_floor,
                "beta0": settings.beta0,
            }
        },
        out / "summary.txt",
    )
    return True


def cmd_uc(setup: ScenarioSetup, out: Path, args: argparse.Namespace) -> bool:
    scenario = setup.scenario
    settings = scenario.carleman
    coeffs = setup.reference
    report = unique_continuation_experiment(
        coeffs,
        setup.chain,
        setup.gamma0,
        setup.uc_scenarios(coeffs),
        settings.h_values,
        beta0=settings.beta0,
        settings=scenario.solver,
        modes=settings.boundary_modes,
    )
    write_csv(report.cells, out / "uc.csv")
    inequality = report.inequality
    alpha1, alpha2 = inequality.fitted_alphas  # type: ignore[misc]
    fit = {
        "alpha1": alpha1,
        "alpha2": alpha2,
        "constant": inequality.constant,
        "margin": inequality.margin,
        "feasible": inequality.feasible,
        "beta0": report.beta0,
        "kappa": report.kappa,
    }
    (out / "uc_fit.json").write_text(report.model_dump_json(indent=2, exclude={"cells"}), encoding="utf-8")
    sections: Dict[str, Dict[str, object]] = {"uc_fit": fit}
    coupling = parameter_coupling(alpha1, alpha2, scenario.sweep.lam, setup.grid.n)
    sections["parameter_coupling"] = {**coupling.model_dump(), "decaying": coupling.decaying}
    write_summary(scenario, sections, out / "summary.txt")
    return inequality.feasible


def cmd_sweep(setup: ScenarioSetup, out: Path, args: argparse.Namespace) -> bool:
    scenario = setup.scenario
    report = run_scenario(scenario, threads=args.threads, seed=args.seed, setup=setup)
    write_csv(report.records, out / "sweep.csv")
    if report.failures:
        write_csv(report.failures, out / "failures.csv")
    sections = summarize(report)
    sections["fits"] = _fits(report.records, scenario.sweep.mode, scenario)
    write_summary(scenario, sections, out / "summary.txt")
    return report.ok


def _fits(records: Sequence[StabilityRecord], mode: QMode, scenario: Scenario) -> Dict[str, object]:
    exponents = theorem_exponents(scenario.geometry.n, scenario.coefficients.s)
    fits: Dict[str, object] = {}
    for model in FitModel:
        try:
            fit = fit_stability_curve(
                records, model, reference=reference_exponent(exponents, mode, model)
            )
        except ValueError as exc:
            fits[model.value] = str(exc)
            continue
        fits[model.value] = (
            f"exponent {fit.exponent:.6g} ± {fit.stderr:.2g} "
            f"(reference {fit.reference:.6g}, n={fit.count})"
        )
    return fits


def cmd_fit(setup: ScenarioSetup, out: Path, args: argparse.Namespace) -> bool:
    scenario = setup.scenario
    source = Path(args.records) if args.records else out.parent / "sweep" / "sweep.csv"
    records = read_csv_models(source, StabilityRecord)
    exponents = theorem_exponents(scenario.geometry.n, scenario.coefficients.s)
    model = FitModel(args.model)
    fit = fit_stability_curve(
        records,
        model,
        column=args.column,
        reference=reference_exponent(exponents, scenario.sweep.mode, model),
    )
    write_csv([fit], out / "fit.csv")
    write_summary(scenario, {"fit": fit.model_dump()}, out / "summary.txt")
    return True


COMMANDS: Dict[str, Command] = {
    "forward": cmd_forward,
    "dtn": cmd_dtn,
    "cgo": cmd_cgo,
    "reconstruct": cmd_reconstruct,
    "carleman": cmd_carleman,
    "uc": cmd_uc,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--out", type=Path, default=Path("runs"), help="Output directory")
    common.add_argument("--threads", type=int, default=1, help="Worker threads")
    common.add_argument("--seed", type=int, default=0, help="Power-iteration seed")
    common.add_argument("--verbose", action="store_true", help="Debug logging")

    parser = argparse.ArgumentParser(
        prog="pybiharmonic",
        description="Stability lab for the perturbed biharmonic inverse problem",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "forward": "Manufactured-solution check of the Navier solver",
        "dtn": "Assemble partial DtN matrices and their differences",
        "cgo": "Build CGO solutions over the tau grid",
        "reconstruct": "Recover coefficient differences from CGO pairs",
        "carleman": "Evaluate the Carleman estimate on the sine test function",
        "uc": "Fit the unique continuation constants",
        "sweep": "Full stability sweep over scales and h",
        "fit": "Fit a stability curve to stored sweep records",
    }
    for name, text in helps.items():
        command = sub.add_parser(name, parents=[common], help=text)
        if name == "fit":
            command.add_argument("--records", help="Sweep CSV; defaults to the sweep output")
            command.add_argument(
                "--model", choices=[m.value for m in FitModel], default=FitModel.LOG_POWER.value
            )
            command.add_argument("--column", default="err_q_Hminus1")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if args.threads < 1:
        logger.error("--threads must be at least 1")
        return EXIT_CONFIG
    try:
        scenarios = load_config(args.config) if args.config else [Scenario()]
    except ConfigError as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG

    command = COMMANDS[args.command]
    ok = True
    for scenario in scenarios:
        out = ensure_dir(args.out / scenario.name / args.command)
        try:
            setup = build_scenario(scenario)
            ok = command(setup, out, args) and ok
        except (ValueError, RuntimeError, OSError) as exc:
            logger.error("Scenario %s aborted in %s: %s", scenario.name, args.command, exc)
            ok = False
    return EXIT_OK if ok else EXIT_ABORTED


if __name__ == "__main__":
    sys.exit(main())

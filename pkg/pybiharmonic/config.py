"""Loading run configurations and turning scenarios into coefficient sets."""

import logging
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np
from pydantic import ValidationError

from pybiharmonic.exceptions import ConfigError
from pybiharmonic.grid import build_grid, interior_envelope, make_neighborhoods, make_patch
from pybiharmonic.models.coefficients import CoefficientSet, NavierProblem
from pybiharmonic.models.fields import ScalarField, VectorField
from pybiharmonic.models.grid import BoundaryPatch, Cutoff, GridSpec, NeighborhoodChain
from pybiharmonic.models.scenario import Bump, CoefficientRecipe, PatchSpec, RunConfig, Scenario
from pybiharmonic.norms import linf_norm, sobolev_norm

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _describe(exc: ValidationError) -> str:
    lines = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"]) or "<root>"
        lines.append(f"  {location}: {error['msg']}")
    return f"{exc.error_count()} configuration error(s):\n" + "\n".join(lines)


def parse_config(text: str) -> List[Scenario]:
    """Parse a JSON run configuration.

    Raises:
        ConfigError: On malformed JSON (the message carries line and column),
            unknown keys, or missing and invalid values; every problem is listed
    """
    try:
        config = RunConfig.model_validate_json(text)
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from exc
    return list(config.scenarios)


def load_config(path: PathLike) -> List[Scenario]:
    """Read and validate the scenarios of a run configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    scenarios = parse_config(text)
    logger.info("Loaded %d scenario(s) from %s", len(scenarios), path)
    return scenarios


def dump_config(scenarios: Sequence[Scenario]) -> str:
    return RunConfig(scenarios=list(scenarios)).model_dump_json(indent=2)


def save_config(scenarios: Sequence[Scenario], path: PathLike) -> None:
    """Write scenarios with every default spelled out."""
    Path(path).write_text(dump_config(scenarios) + "\n", encoding="utf-8")


def _patch(grid: GridSpec, spec: PatchSpec) -> BoundaryPatch:
    return make_patch(grid, spec.face, spec.window)


def bump_values(grid: GridSpec, bump: Bump) -> np.ndarray:
    radius_sq = sum((x - c) ** 2 for x, c in zip(grid.mesh(), bump.center))
    return bump.amplitude * np.exp(-radius_sq / (2.0 * bump.width**2))


class ScenarioSetup:
    """Discrete objects built from one scenario.

    Coefficients are recipes times the interior envelope, so they vanish on
    ω₀ and every coefficient difference does as well.
    """

    def __init__(self, scenario: Scenario):
        geometry = scenario.geometry
        self.scenario = scenario
        self.grid = build_grid(geometry.n, geometry.N)
        self.gamma1 = _patch(self.grid, geometry.gamma1)
        self.gamma2 = _patch(self.grid, geometry.gamma2)
        self.gamma0 = _patch(self.grid, geometry.gamma0)
        self.chain: NeighborhoodChain = make_neighborhoods(self.grid, *geometry.widths)
        self.envelope: Cutoff = interior_envelope(self.chain)
        self.reference = self.recipe_coefficients(scenario.coefficients.reference)
        self.perturbation = self._calibrate_A(
            self.recipe_coefficients(scenario.coefficients.perturbation)
        )
        self._check_admissible(self.reference, "reference")

    def recipe_coefficients(self, recipe: CoefficientRecipe) -> CoefficientSet:
        grid = self.grid
        A = [np.zeros(grid.shape) for _ in range(grid.n)]
        q = np.zeros(grid.shape)
        for term in recipe.terms:
            values = bump_values(grid, term)
            if term.target == "A":
                A[term.component] = A[term.component] + values  # type: ignore[index]
            else:
                q = q + values
        envelope = self.envelope.values
        return CoefficientSet(
            A=VectorField.from_arrays(grid, tuple(a * envelope for a in A)),
            q=ScalarField(grid=grid, values=q * envelope),
            agreement_mask=self.chain.masks[0],
        )

    def _calibrate_A(self, perturbation: CoefficientSet) -> CoefficientSet:
        settings = self.scenario.coefficients
        if settings.A_fraction is None or not perturbation.has_first_order:
            return perturbation
        size = sobolev_norm(perturbation.A, settings.s)
        factor = settings.A_fraction * settings.M / size
        logger.info(
            "A perturbation rescaled by %.3g to ‖ΔA‖_H^%g = %.3g", factor, settings.s, factor * size
        )
        return CoefficientSet(
            A=perturbation.A * factor,
            q=perturbation.q,
            agreement_mask=self.chain.masks[0],
        )

    def _check_admissible(self, coeffs: CoefficientSet, label: str) -> None:
        settings = self.scenario.coefficients
        a_norm = sobolev_norm(coeffs.A, settings.s)
        q_norm = linf_norm(coeffs.q)
        if a_norm > settings.M or q_norm > settings.M:
            raise ValueError(
                f"{label} coefficients leave the admissible set: "
                f"‖A‖_H^{settings.s:g} = {a_norm:.3g}, ‖q‖_∞ = {q_norm:.3g}, M = {settings.M:g}"
            )

    def coefficients_at(self, t: float) -> CoefficientSet:
        """(A₂, q₂) = (A₁, q₁) + t·perturbation.

        Raises:
            ValueError: If t < 0 or the result is not admissible
        """
        if t < 0:
            raise ValueError(f"perturbation scale must be nonnegative, got {t}")
        if t == 0.0:
            return self.reference
        shifted = CoefficientSet(
            A=self.reference.A + self.perturbation.A * t,
            q=self.reference.q + self.perturbation.q * t,
            agreement_mask=self.chain.masks[0],
        )
        self._check_admissible(shifted, f"t={t:g}")
        return shifted

    def uc_scenarios(self, coeffs: CoefficientSet) -> List[NavierProblem]:
        """Interior sources F supported in Ω ∖ ω₀ with homogeneous Navier data."""
        envelope = self.envelope.values
        return [
            NavierProblem.homogeneous(
                coeffs, ScalarField(grid=self.grid, values=bump_values(self.grid, b) * envelope)
            )
            for b in self.scenario.carleman.uc_sources
        ]


def build_scenario(scenario: Scenario) -> ScenarioSetup:
    return ScenarioSetup(scenario)

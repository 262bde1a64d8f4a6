"""Run configuration models: scenarios, coefficient recipes and sweeps."""

from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from pybiharmonic.models.reconstruction import QMode
from pybiharmonic.models.settings import CgoSettings, SolverSettings


class Bump(BaseModel):
    """Gaussian amplitude·exp(−|x − center|²/(2·width²))."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    center: Tuple[float, ...] = Field(..., description="Center in Ω")
    width: float = Field(..., gt=0)
    amplitude: float = 1.0

    @field_validator("center")
    @classmethod
    def _inside(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(not 0.0 < c < 1.0 for c in value):
            raise ValueError(f"bump center {value} is not inside the unit cube")
        return value


class BumpTerm(Bump):
    """A bump added to q, or to one component of A."""

    target: Literal["A", "q"] = "q"
    component: Optional[int] = Field(None, ge=0, description="A component, zero-based")

    @model_validator(mode="after")
    def _check_component(self) -> "BumpTerm":
        if self.target == "A" and self.component is None:
            raise ValueError("A bump needs a component")
        if self.target == "q" and self.component is not None:
            raise ValueError("q bump takes no component")
        return self


class CoefficientRecipe(BaseModel):
    """Sum of bump terms, multiplied by the interior envelope."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    terms: List[BumpTerm] = Field(default_factory=list)

    @property
    def has_first_order(self) -> bool:
        return any(term.target == "A" for term in self.terms)


def _default_perturbation() -> CoefficientRecipe:
    return CoefficientRecipe(
        terms=[
            BumpTerm(target="A", component=0, center=(0.48, 0.5, 0.52), width=0.06, amplitude=1.0),
            BumpTerm(target="A", component=2, center=(0.52, 0.5, 0.48), width=0.06, amplitude=-1.0),
            BumpTerm(target="q", center=(0.5, 0.5, 0.5), width=0.06, amplitude=0.5),
        ]
    )


class PatchSpec(BaseModel):
    """Face label such as ``"x1=0"`` and an optional window in face coordinates."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    face: str
    window: Optional[List[Tuple[float, float]]] = None


class GeometrySettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(3, ge=3)
    N: int = Field(24, ge=8)
    gamma1: PatchSpec = PatchSpec(face="x1=0", window=[(0.0, 1.0), (0.0, 0.5)])
    gamma2: PatchSpec = PatchSpec(face="x2=1", window=[(0.0, 1.0), (0.5, 1.0)])
    gamma0: PatchSpec = PatchSpec(face="x2=1", window=[(0.0, 1.0), (0.5, 1.0)])
    widths: Tuple[float, float, float, float] = (0.30, 0.24, 0.18, 0.05)


class CoefficientSettings(BaseModel):
    """Reference pair (A₁, q₁) and the perturbation added at scale t.

    Both recipes are checked against ‖A‖_{H^s} ≤ M and ‖q‖_{L∞} ≤ M. With
    ``A_fraction`` set, the A part of the perturbation is rescaled so that
    ‖ΔA‖_{H^s} = A_fraction·M and the recipe amplitudes only fix its shape.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    s: float = Field(4.0, gt=0)
    M: float = Field(10.0, gt=0)
    reference: CoefficientRecipe = Field(default_factory=CoefficientRecipe)
    perturbation: CoefficientRecipe = Field(default_factory=_default_perturbation)
    A_fraction: Optional[float] = Field(
        0.5, gt=0, le=1, description="Target ‖ΔA‖_{H^s} as a fraction of M; None keeps amplitudes"
    )


class SweepSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    scales: List[float] = Field(default_factory=lambda: [1.0, 0.5, 0.25, 0.125])
    h_values: List[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05])
    lam: float = Field(4.0, gt=0)
    basis_modes: int = Field(8, ge=1)
    output_modes: int = Field(8, ge=1)
    mode: QMode = QMode.WITH_A
    delta_threshold: float = Field(1.0, gt=0)
    rho_factor: float = Field(1.0, gt=0)
    verify_identity: bool = False

    @field_validator("scales")
    @classmethod
    def _scales(cls, value: List[float]) -> List[float]:
        if any(t < 0 for t in value):
            raise ValueError("perturbation scales must be nonnegative")
        return value

    @field_validator("h_values")
    @classmethod
    def _h_values(cls, value: List[float]) -> List[float]:
        if not value or any(h <= 0 for h in value):
            raise ValueError("h_values must be positive")
        return value

    @property
    def all_scales(self) -> List[float]:
        """Configured scales with the t = 0 sanity row first."""
        return [0.0] + [t for t in self.scales if t != 0.0]


def _default_uc_sources() -> List[Bump]:
    return [
        Bump(center=(0.5, 0.5, 0.5), width=0.05),
        Bump(center=(0.45, 0.55, 0.5), width=0.04, amplitude=2.0),
        Bump(center=(0.55, 0.45, 0.52), width=0.05, amplitude=-1.0),
    ]


class CarlemanSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    beta0: float = Field(2.0, gt=0)
    h_values: List[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    uc_sources: List[Bump] = Field(default_factory=_default_uc_sources)
    boundary_modes: int = Field(8, ge=1)


class Scenario(BaseModel):
    """One calibration setup: geometry, coefficients and every numerical knob."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "calibration"
    geometry: GeometrySettings = Field(default_factory=GeometrySettings)
    coefficients: CoefficientSettings = Field(default_factory=CoefficientSettings)
    sweep: SweepSettings = Field(default_factory=SweepSettings)
    solver: SolverSettings = Field(default_factory=SolverSettings)
    cgo: CgoSettings = Field(default_factory=CgoSettings)
    carleman: CarlemanSettings = Field(default_factory=CarlemanSettings)

    @model_validator(mode="after")
    def _check_consistency(self) -> "Scenario":
        n = self.geometry.n
        recipes = (self.coefficients.reference, self.coefficients.perturbation)
        for recipe in recipes:
            for term in recipe.terms:
                if len(term.center) != n:
                    raise ValueError(f"bump center {term.center} is not {n}-dimensional")
                if term.component is not None and term.component >= n:
                    raise ValueError(f"A component {term.component} out of range for n={n}")
        for bump in self.carleman.uc_sources:
            if len(bump.center) != n:
                raise ValueError(f"source center {bump.center} is not {n}-dimensional")
        if self.sweep.mode == QMode.A_ZERO and any(r.has_first_order for r in recipes):
            raise ValueError("A_zero mode requires recipes without A terms")
        return self


class RunConfig(BaseModel):
    """Top-level JSON document."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    scenarios: List[Scenario] = Field(..., min_length=1)

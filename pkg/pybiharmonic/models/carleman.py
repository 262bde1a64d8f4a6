"""Models for Carleman weights and inequality reports."""

from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from pybiharmonic.models.fields import ScalarField
from pybiharmonic.models.grid import BoundaryPatch, Face


class CarlemanWeight(BaseModel):
    """φ = exp(β₀ψ) for a ramp or face-bump weight ψ rising towards Γ."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    psi: ScalarField
    beta0: float = Field(..., gt=0)
    phi: ScalarField
    gamma: BoundaryPatch
    face: Face


class InequalityReport(BaseModel):
    """Both sides of a weighted inequality per semiclassical parameter.

    ``lhs`` and ``rhs`` are scaled by exp(−log_shifts) so that the largest
    weight is one; ratios are unaffected.
    """

    model_config = ConfigDict(frozen=True)

    h_values: Tuple[float, ...]
    lhs: Tuple[float, ...]
    rhs: Tuple[float, ...]
    ratios: Tuple[float, ...]
    log_shifts: Tuple[float, ...] = ()
    best_constant: float = Field(..., ge=0)
    sub_ratios: Tuple[float, ...] = ()
    trend_slope: Optional[float] = Field(
        None, description="Slope of log ratio against 1/h"
    )
    h_floor: Optional[float] = Field(
        None, description="Smallest h whose weight the grid resolves"
    )
    fitted_alphas: Optional[Tuple[float, float]] = None
    constant: Optional[float] = None
    margin: Optional[float] = None
    feasible: bool = True

    @model_validator(mode="after")
    def _check_lengths(self) -> "InequalityReport":
        size = len(self.h_values)
        if not (len(self.lhs) == len(self.rhs) == len(self.ratios) == size):
            raise ValueError("Per-h entries must match h_values")
        return self


class UcCell(BaseModel):
    """One (scenario, h) evaluation of the unique continuation bound.

    ``interior`` is ‖w‖_{H³} + ‖F‖_{L²(ω₀)} and ``boundary`` the Γ₀ data norm.
    """

    model_config = ConfigDict(frozen=True)

    scenario: int = Field(..., ge=0)
    h: float = Field(..., gt=0)
    lhs: float = Field(..., ge=0)
    interior: float = Field(..., ge=0)
    boundary: float = Field(..., ge=0)
    bound: float = Field(..., ge=0)
    ratio: float = Field(..., ge=0)


class UniqueContinuationReport(BaseModel):
    """Fitted (α₁, α₂) and the evidence behind them."""

    model_config = ConfigDict(frozen=True)

    inequality: InequalityReport
    cells: Tuple[UcCell, ...]
    reference_alphas: Tuple[float, float]
    beta0: float = Field(..., gt=0)
    kappa: float

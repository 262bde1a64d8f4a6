"""Numerical tuning knobs shared by the solvers and the run configuration."""

from pydantic import BaseModel, ConfigDict, Field


class SolverSettings(BaseModel):
    """Navier solver controls."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    tolerance: float = Field(1e-10, gt=0, description="Krylov relative residual target")
    accept_tolerance: float = Field(
        1e-6, gt=0, description="Residual above which a solve is flagged near-singular"
    )
    max_iterations: int = Field(2000, ge=1)
    direct_size_cap: int = Field(
        24, ge=0, description="Largest N solved by sparse LU instead of GMRES"
    )
    restart: int = Field(60, ge=1)
    ilu_drop_tol: float = Field(1e-5, gt=0)
    ilu_fill_factor: float = Field(20.0, gt=0)


class CgoSettings(BaseModel):
    """Remainder iteration controls for CGO construction."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    floor_factor: float = Field(
        1e-2, gt=0, description="Symbol floor is floor_factor * tau**3"
    )
    max_iterations: int = Field(50, ge=1)
    tolerance: float = Field(1e-10, gt=0)
    residual_tol: float = Field(
        0.5, gt=0, description="Largest accepted cgo_residual, a fraction of the lower-order term"
    )
    divergence_window: int = Field(3, ge=1)

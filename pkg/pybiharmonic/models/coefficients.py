"""Models for the perturbed biharmonic operator and its Navier problem."""

from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from pybiharmonic.models.fields import ScalarField, VectorField
from pybiharmonic.models.grid import GridSpec


class CoefficientSet(BaseModel):
    """First-order coefficient ``A`` and potential ``q`` of 𝓛_{A,q}."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    A: VectorField
    q: ScalarField
    agreement_mask: Optional[np.ndarray] = Field(
        None, description="Nodes where the set equals its reference pair"
    )

    @field_validator("agreement_mask")
    @classmethod
    def _freeze_mask(cls, value: Optional[np.ndarray]) -> Optional[np.ndarray]:
        if value is None:
            return None
        array = np.array(value, dtype=bool, copy=True)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def _check_grid(self) -> "CoefficientSet":
        if self.A.grid != self.q.grid:
            raise ValueError("A and q live on different grids")
        if self.agreement_mask is not None and (
            self.agreement_mask.shape != self.q.grid.shape
        ):
            raise ValueError("Agreement mask does not match the grid")
        return self

    @property
    def grid(self) -> GridSpec:
        return self.q.grid

    @classmethod
    def zeros(cls, grid: GridSpec) -> "CoefficientSet":
        return cls(A=VectorField.zeros(grid), q=ScalarField.zeros(grid))

    @property
    def has_first_order(self) -> bool:
        return bool(np.any(self.A.stack() != 0))

    def minus(self, other: "CoefficientSet") -> "CoefficientSet":
        """Coefficient difference ``self - other``."""
        return CoefficientSet(A=self.A - other.A, q=self.q - other.q)

    def adjoint(self) -> "CoefficientSet":
        """Coefficients of the formal L² adjoint 𝓛_{Ā, q̄ − i div Ā}."""
        A_bar = self.A.conj()
        spacing = self.grid.spacing
        div = sum(
            np.gradient(c.values, spacing, axis=k, edge_order=2)
            for k, c in enumerate(A_bar.components)
        )
        q_adj = np.conj(self.q.values) - 1j * div
        return CoefficientSet(
            A=A_bar,
            q=ScalarField(grid=self.grid, values=q_adj),
            agreement_mask=self.agreement_mask,
        )


class NavierProblem(BaseModel):
    """𝓛u = F in Ω with u = f and Δu = g on ∂Ω.

    ``dirichlet`` and ``navier`` are closed-grid fields of which only the
    boundary layer is read.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    coeffs: CoefficientSet
    rhs: ScalarField
    dirichlet: ScalarField
    navier: ScalarField

    @model_validator(mode="after")
    def _check_grid(self) -> "NavierProblem":
        grid = self.coeffs.grid
        if any(f.grid != grid for f in (self.rhs, self.dirichlet, self.navier)):
            raise ValueError("Navier problem data live on different grids")
        return self

    @classmethod
    def homogeneous(cls, coeffs: CoefficientSet, rhs: ScalarField) -> "NavierProblem":
        zero = ScalarField.zeros(coeffs.grid)
        return cls(coeffs=coeffs, rhs=rhs, dirichlet=zero, navier=zero)

    @property
    def has_zero_traces(self) -> bool:
        return not (
            np.any(self.dirichlet.boundary_layer()) or np.any(self.navier.boundary_layer())
        )


class ConditionFlag(str, Enum):
    OK = "ok"
    NEAR_SINGULAR = "near_singular"


class SolveReport(BaseModel):
    """Health of one Navier solve."""

    model_config = ConfigDict(frozen=True)

    iterations: int = Field(..., ge=0)
    residual: float = Field(..., ge=0)
    condition_flag: ConditionFlag
    method: str = Field("direct", description="'direct' or 'gmres'")

    @property
    def ok(self) -> bool:
        return self.condition_flag == ConditionFlag.OK


class NavierSolution(BaseModel):
    """Solution ``u`` together with ``Δu`` and the solve report."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u: ScalarField
    laplacian: ScalarField
    report: SolveReport


class FieldTraces(BaseModel):
    """A field with the boundary traces used by Green's identity.

    ``normal`` and ``normal_laplacian`` hold one array per face, in the order
    of :func:`pybiharmonic.models.grid.all_faces`.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    field: ScalarField
    laplacian: Optional[ScalarField] = None
    normal: Optional[Tuple[np.ndarray, ...]] = None
    normal_laplacian: Optional[Tuple[np.ndarray, ...]] = None

    @property
    def complete(self) -> bool:
        return (
            self.laplacian is not None
            and self.normal is not None
            and self.normal_laplacian is not None
        )

"""Models for complex geometric optics solutions."""

from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from pybiharmonic.models.fields import PeriodicField
from pybiharmonic.models.grid import GridSpec


class CgoRole(str, Enum):
    """``adjoint_side`` solves 𝓛*u₁ = 0 with ζ₁, ``direct_side`` 𝓛u₂ = 0 with ζ₂."""

    ADJOINT_SIDE = "adjoint_side"
    DIRECT_SIDE = "direct_side"


class AmplitudeKind(str, Enum):
    ONE = "one"
    LINEAR_TRANSPORT = "linear_transport"


def _vector(value: np.ndarray, dtype: type) -> np.ndarray:
    array = np.array(value, dtype=dtype, copy=True).ravel()
    if not np.all(np.isfinite(array)):
        raise ValueError("Direction vector has non-finite entries")
    array.setflags(write=False)
    return array


class CgoDirections(BaseModel):
    """ξ, μ⁽¹⁾, μ⁽²⁾, τ and the derived ζ₁, ζ₂.

    ``lattice_shift`` offsets the box wavenumbers by π·shift for the
    quasi-periodic remainder solve.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    xi: np.ndarray
    mu1: np.ndarray
    mu2: np.ndarray
    tau: float = Field(..., gt=0)
    zeta1: np.ndarray
    zeta2: np.ndarray
    lattice_shift: np.ndarray

    @field_validator("xi", "mu1", "mu2", "lattice_shift")
    @classmethod
    def _real_vector(cls, value: np.ndarray) -> np.ndarray:
        return _vector(value, float)

    @field_validator("zeta1", "zeta2")
    @classmethod
    def _complex_vector(cls, value: np.ndarray) -> np.ndarray:
        return _vector(value, np.complex128)

    @property
    def n(self) -> int:
        return int(self.xi.size)

    def zeta(self, role: CgoRole) -> np.ndarray:
        return self.zeta1 if role == CgoRole.ADJOINT_SIDE else self.zeta2


class CgoSolution(BaseModel):
    """u = e^{ix·ζ/τ}(a + r) with its remainder on the periodic box.

    ``remainder_gradient`` holds ∇r per axis on the box, computed spectrally.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridSpec
    directions: CgoDirections
    amplitude: AmplitudeKind
    role: CgoRole
    remainder: PeriodicField
    remainder_gradient: Tuple[PeriodicField, ...]
    remainder_laplacian: PeriodicField
    iterations: int = Field(..., ge=0)
    residual: float = Field(..., ge=0)
    clamped_modes: int = Field(0, ge=0)
    first_iterate: Optional[PeriodicField] = None

    @property
    def zeta(self) -> np.ndarray:
        return self.directions.zeta(self.role)

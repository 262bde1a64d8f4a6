"""Models for complex grid functions and norm selectors."""

from enum import Enum
from itertools import combinations
from typing import Iterator, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from pybiharmonic.models.grid import GridSpec


def _complex_array(value: np.ndarray) -> np.ndarray:
    array = np.array(value, dtype=np.complex128, copy=True)
    if not np.all(np.isfinite(array)):
        raise ValueError("Field contains non-finite entries")
    array.setflags(write=False)
    return array


class ScalarField(BaseModel):
    """Complex function on the closed grid of Ω, boundary layer included."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridSpec
    values: np.ndarray

    @field_validator("values")
    @classmethod
    def _check_values(cls, value: np.ndarray) -> np.ndarray:
        return _complex_array(value)

    @model_validator(mode="after")
    def _check_shape(self) -> "ScalarField":
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"Field shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        return self

    @classmethod
    def zeros(cls, grid: GridSpec) -> "ScalarField":
        return cls(grid=grid, values=np.zeros(grid.shape, dtype=np.complex128))

    @property
    def interior(self) -> np.ndarray:
        return self.values[self.grid.interior]

    def boundary_layer(self) -> np.ndarray:
        """Copy of the values with the interior zeroed."""
        out = np.array(self.values)
        out[self.grid.interior] = 0.0
        return out

    def conj(self) -> "ScalarField":
        return ScalarField(grid=self.grid, values=np.conj(self.values))

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(grid=self.grid, values=values)

    def __add__(self, other: object) -> "ScalarField":
        if isinstance(other, ScalarField):
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)  # type: ignore[operator]

    def __sub__(self, other: object) -> "ScalarField":
        if isinstance(other, ScalarField):
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)  # type: ignore[operator]

    def __mul__(self, other: object) -> "ScalarField":
        if isinstance(other, ScalarField):
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * other)  # type: ignore[operator]

    __rmul__ = __mul__

    def __neg__(self) -> "ScalarField":
        return self.with_values(-self.values)


class PeriodicField(BaseModel):
    """Complex function on the periodic box of side 2 enclosing Ω."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridSpec
    values: np.ndarray

    @field_validator("values")
    @classmethod
    def _check_values(cls, value: np.ndarray) -> np.ndarray:
        return _complex_array(value)

    @model_validator(mode="after")
    def _check_shape(self) -> "PeriodicField":
        if self.values.shape != self.grid.box_shape:
            raise ValueError(
                f"Box field shape {self.values.shape} does not match "
                f"{self.grid.box_shape}"
            )
        return self

    @classmethod
    def extend(cls, field: ScalarField) -> "PeriodicField":
        """Zero-extend a closed-grid field onto the box."""
        grid = field.grid
        values = np.zeros(grid.box_shape, dtype=np.complex128)
        values[(slice(0, grid.N + 2),) * grid.n] = field.values
        return cls(grid=grid, values=values)

    def restrict(self) -> ScalarField:
        """Values on the closed grid of Ω."""
        grid = self.grid
        return ScalarField(
            grid=grid, values=self.values[(slice(0, grid.N + 2),) * grid.n]
        )


class VectorField(BaseModel):
    """n-tuple of scalar fields sharing one grid."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    components: Tuple[ScalarField, ...]

    @model_validator(mode="after")
    def _check_components(self) -> "VectorField":
        if not self.components:
            raise ValueError("Vector field needs at least one component")
        grid = self.components[0].grid
        if any(c.grid != grid for c in self.components):
            raise ValueError("Vector field components live on different grids")
        if len(self.components) != grid.n:
            raise ValueError(
                f"Vector field has {len(self.components)} components, expected {grid.n}"
            )
        return self

    @property
    def grid(self) -> GridSpec:
        return self.components[0].grid

    @classmethod
    def zeros(cls, grid: GridSpec) -> "VectorField":
        return cls(components=tuple(ScalarField.zeros(grid) for _ in range(grid.n)))

    @classmethod
    def from_arrays(cls, grid: GridSpec, arrays: Tuple[np.ndarray, ...]) -> "VectorField":
        return cls(components=tuple(ScalarField(grid=grid, values=a) for a in arrays))

    def stack(self) -> np.ndarray:
        return np.stack([c.values for c in self.components])

    def conj(self) -> "VectorField":
        return VectorField(components=tuple(c.conj() for c in self.components))

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(
            components=tuple(a + b for a, b in zip(self.components, other.components))
        )

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(
            components=tuple(a - b for a, b in zip(self.components, other.components))
        )

    def __mul__(self, other: object) -> "VectorField":
        return VectorField(components=tuple(c * other for c in self.components))

    __rmul__ = __mul__


def form_pairs(n: int) -> Tuple[Tuple[int, int], ...]:
    """Ordered index pairs (j, k), j < k."""
    return tuple(combinations(range(n), 2))


class TwoFormField(BaseModel):
    """Antisymmetric two-form stored by its j < k components."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    components: Tuple[ScalarField, ...]

    @model_validator(mode="after")
    def _check_components(self) -> "TwoFormField":
        if not self.components:
            raise ValueError("Two-form needs at least one component")
        grid = self.components[0].grid
        expected = grid.n * (grid.n - 1) // 2
        if len(self.components) != expected:
            raise ValueError(
                f"Two-form has {len(self.components)} components, expected {expected}"
            )
        if any(c.grid != grid for c in self.components):
            raise ValueError("Two-form components live on different grids")
        return self

    @property
    def grid(self) -> GridSpec:
        return self.components[0].grid

    @property
    def pairs(self) -> Tuple[Tuple[int, int], ...]:
        return form_pairs(self.grid.n)

    def component(self, j: int, k: int) -> ScalarField:
        """Component (j, k) with the antisymmetry applied."""
        if j == k:
            return ScalarField.zeros(self.grid)
        if j < k:
            return self.components[self.pairs.index((j, k))]
        return -self.components[self.pairs.index((k, j))]

    def items(self) -> Iterator[Tuple[Tuple[int, int], ScalarField]]:
        return iter(zip(self.pairs, self.components))


AnyField = Union[ScalarField, VectorField, TwoFormField, PeriodicField]


class NormKind(str, Enum):
    """Norm families supported by :func:`pybiharmonic.norms.norm`."""

    L2 = "l2"
    LINF = "linf"
    SOBOLEV = "sobolev"
    H1_SCL = "h1_scl"


class SobolevIndex(BaseModel):
    """Selects a norm; ``s`` is used by the Sobolev family, ``scl`` by H¹_scl."""

    model_config = ConfigDict(frozen=True)

    kind: NormKind = NormKind.SOBOLEV
    s: float = Field(0.0, ge=-8.0, le=8.0)
    scl: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _check_scl(self) -> "SobolevIndex":
        if self.kind == NormKind.H1_SCL and self.scl is None:
            raise ValueError("H1_scl norm needs the semiclassical parameter scl")
        return self


class FaceCoefficients(BaseModel):
    """Coefficients of a face function in a face Dirichlet sine basis."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    face: str
    values: np.ndarray
    eigenvalues: np.ndarray

    @field_validator("values")
    @classmethod
    def _check_values(cls, value: np.ndarray) -> np.ndarray:
        return _complex_array(np.ravel(value))

    @field_validator("eigenvalues")
    @classmethod
    def _check_eigenvalues(cls, value: np.ndarray) -> np.ndarray:
        array = np.array(np.ravel(value), dtype=float, copy=True)
        if np.any(array < 0):
            raise ValueError("Face eigenvalues must be nonnegative")
        array.setflags(write=False)
        return array


class InterpolationReport(BaseModel):
    """Both sides of a Sobolev interpolation inequality."""

    model_config = ConfigDict(frozen=True)

    lhs: float = Field(..., ge=0)
    rhs: float = Field(..., ge=0)
    ratio: float = Field(..., ge=0)
    theta: float

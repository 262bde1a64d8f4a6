"""Models for the discrete domain and its boundary geometry."""

import re
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator

FACE_LABEL = re.compile(r"^x(\d+)=([01])$")


def _frozen_array(value: np.ndarray, dtype: type) -> np.ndarray:
    array = np.array(value, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class GridSpec(BaseModel):
    """Closed tensor grid on the unit cube.

    Nodes sit at ``i * spacing`` for ``i = 0..N+1`` along every axis, so the
    first and last index of each axis form the boundary layer.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=3, description="Spatial dimension")
    N: int = Field(..., ge=8, description="Interior points per axis")
    box_origin: float = Field(0.0, description="Lower corner of the cube")
    box_side: float = Field(1.0, gt=0, description="Side length of the cube")

    @computed_field  # type: ignore[prop-decorator]
    @property
    def spacing(self) -> float:
        return self.box_side / (self.N + 1)

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.N + 2,) * self.n

    @property
    def interior_shape(self) -> Tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def box_size(self) -> int:
        """Points per axis of the enclosing periodic box of side 2."""
        return 2 * (self.N + 1)

    @property
    def box_shape(self) -> Tuple[int, ...]:
        return (self.box_size,) * self.n

    @property
    def interior(self) -> Tuple[slice, ...]:
        return (slice(1, -1),) * self.n

    @property
    def cell_volume(self) -> float:
        return float(self.spacing**self.n)

    def coordinates(self) -> np.ndarray:
        """One-dimensional node coordinates along any axis."""
        return self.box_origin + self.spacing * np.arange(self.N + 2)

    def mesh(self) -> List[np.ndarray]:
        """Full coordinate arrays on the closed grid, ``ij`` indexing."""
        axis = self.coordinates()
        return list(np.meshgrid(*([axis] * self.n), indexing="ij"))

    def box_mesh(self) -> List[np.ndarray]:
        """Coordinate arrays on the periodic box; Ω occupies the leading corner."""
        axis = self.box_origin + self.spacing * np.arange(self.box_size)
        return list(np.meshgrid(*([axis] * self.n), indexing="ij"))

    def boundary_distance(self) -> np.ndarray:
        """L∞ distance of every node to the cube boundary."""
        axis = self.coordinates() - self.box_origin
        per_axis = np.minimum(axis, self.box_side - axis)
        dist = np.full(self.shape, np.inf)
        for k in range(self.n):
            shape = [1] * self.n
            shape[k] = -1
            dist = np.minimum(dist, per_axis.reshape(shape))
        return dist


class Face(BaseModel):
    """One face of the cube, ``axis`` zero-based, ``side`` 0 or 1."""

    model_config = ConfigDict(frozen=True)

    axis: int = Field(..., ge=0)
    side: int = Field(..., ge=0, le=1)

    @property
    def label(self) -> str:
        return f"x{self.axis + 1}={self.side}"

    @property
    def outward_sign(self) -> float:
        return 1.0 if self.side == 1 else -1.0

    @classmethod
    def parse(cls, label: str) -> "Face":
        match = FACE_LABEL.match(label.strip())
        if match is None:
            raise ValueError(f"Unknown face label {label!r}; expected e.g. 'x1=0'")
        return cls(axis=int(match.group(1)) - 1, side=int(match.group(2)))

    def index(self, grid: GridSpec) -> Tuple[object, ...]:
        """Index tuple selecting this face from a closed-grid array."""
        idx: List[object] = [slice(None)] * grid.n
        idx[self.axis] = 0 if self.side == 0 else grid.N + 1
        return tuple(idx)

    def tangential_axes(self, grid: GridSpec) -> Tuple[int, ...]:
        return tuple(k for k in range(grid.n) if k != self.axis)


def all_faces(grid: GridSpec) -> Tuple[Face, ...]:
    return tuple(Face(axis=k, side=s) for k in range(grid.n) for s in (0, 1))


class PatchFace(BaseModel):
    """Window on a single face and the node mask it selects."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    face: Face
    window: Tuple[Tuple[float, float], ...]
    mask: np.ndarray = Field(..., description="Boolean mask over the closed face grid")

    @field_validator("mask")
    @classmethod
    def _freeze_mask(cls, value: np.ndarray) -> np.ndarray:
        return _frozen_array(value, bool)

    @property
    def count(self) -> int:
        return int(self.mask.sum())


class BoundaryPatch(BaseModel):
    """Open boundary subset given by rectangular windows on one or more faces."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridSpec
    faces: Tuple[PatchFace, ...]

    @field_validator("faces")
    @classmethod
    def _nonempty(cls, value: Tuple[PatchFace, ...]) -> Tuple[PatchFace, ...]:
        if not value or not any(face.count for face in value):
            raise ValueError("Boundary patch selects no face nodes")
        return value

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(face.face.label for face in self.faces)

    def face_mask(self, face: Face) -> Optional[np.ndarray]:
        for patch_face in self.faces:
            if patch_face.face == face:
                return patch_face.mask
        return None


class NeighborhoodChain(BaseModel):
    """Nested boundary neighborhoods ω₀ ⊃ ω₁ ⊃ ω₂ ⊃ ω₃."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridSpec
    widths: Tuple[float, float, float, float]
    masks: Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]

    @field_validator("masks")
    @classmethod
    def _freeze_masks(cls, value: Tuple[np.ndarray, ...]) -> Tuple[np.ndarray, ...]:
        return tuple(_frozen_array(mask, bool) for mask in value)  # type: ignore[return-value]

    def shell(self, outer: int, inner: int) -> np.ndarray:
        """Mask of ω_outer ∖ ω_inner."""
        return self.masks[outer] & ~self.masks[inner]


class Cutoff(BaseModel):
    """Smooth [0, 1]-valued cutoff between two node sets."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridSpec
    values: np.ndarray
    gap: float = Field(..., ge=0, description="Distance between the two regions")
    inner_width: Optional[float] = Field(
        None, description="Boundary distance beyond which the cutoff equals one"
    )
    outer_width: Optional[float] = Field(
        None, description="Boundary distance below which the cutoff vanishes"
    )

    @field_validator("values")
    @classmethod
    def _check_values(cls, value: np.ndarray) -> np.ndarray:
        array = _frozen_array(value, float)
        if np.any(array < 0.0) or np.any(array > 1.0):
            raise ValueError("Cutoff values must lie in [0, 1]")
        return array

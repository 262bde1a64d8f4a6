"""Face Dirichlet sine bases, normal traces and boundary synthesis."""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from pybiharmonic.models.fields import FaceCoefficients, ScalarField
from pybiharmonic.models.grid import BoundaryPatch, Face, GridSpec, all_faces

logger = logging.getLogger(__name__)

DEFAULT_MODES = 8


def face_values(values: np.ndarray, grid: GridSpec, face: Face) -> np.ndarray:
    return values[face.index(grid)]


def outward_normal_derivative(
    values: np.ndarray, grid: GridSpec, face: Face
) -> np.ndarray:
    """One-sided three-point outward normal derivative on a face."""
    axis = face.axis
    take = lambda i: np.take(values, i, axis=axis)  # noqa: E731
    if face.side == 0:
        inward = (-3.0 * take(0) + 4.0 * take(1) - take(2)) / (2.0 * grid.spacing)
        return -inward
    last = grid.N + 1
    return (3.0 * take(last) - 4.0 * take(last - 1) + take(last - 2)) / (
        2.0 * grid.spacing
    )


def normal_traces(field: ScalarField) -> Tuple[np.ndarray, ...]:
    """Outward normal derivative on every face, ordered as ``all_faces``."""
    return tuple(
        outward_normal_derivative(field.values, field.grid, face)
        for face in all_faces(field.grid)
    )


class FaceSineBasis(BaseModel):
    """Lowest Dirichlet sine modes of a rectangular face window.

    The functions are orthonormal for the face quadrature
    ``spacing**(n-1) * sum``.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    face: Face
    modes: np.ndarray = Field(..., description="Integer mode indices, one row per mode")
    eigenvalues: np.ndarray
    functions: np.ndarray = Field(..., description="Mode values over the face grid")

    @field_validator("modes", "eigenvalues", "functions")
    @classmethod
    def _freeze(cls, value: np.ndarray) -> np.ndarray:
        array = np.array(value, copy=True)
        array.setflags(write=False)
        return array

    @property
    def size(self) -> int:
        return int(self.modes.shape[0])

    def project(self, face_array: np.ndarray, spacing: float) -> np.ndarray:
        weight = spacing ** (self.functions.ndim - 1)
        flat = self.functions.reshape(self.size, -1)
        return weight * (flat @ np.ravel(face_array))

    def synthesize(self, coefficients: np.ndarray) -> np.ndarray:
        flat = self.functions.reshape(self.size, -1)
        return (np.asarray(coefficients) @ flat).reshape(self.functions.shape[1:])

    def coefficients(self, values: np.ndarray) -> FaceCoefficients:
        return FaceCoefficients(
            face=self.face.label, values=values, eigenvalues=self.eigenvalues
        )


def _window_ranges(mask: np.ndarray) -> List[Tuple[int, int]]:
    ranges = []
    for axis in range(mask.ndim):
        others = tuple(k for k in range(mask.ndim) if k != axis)
        hits = np.flatnonzero(mask.any(axis=others))
        ranges.append((int(hits[0]), int(hits[-1])))
    return ranges


def face_sine_basis(
    grid: GridSpec, face: Face, mask: np.ndarray, modes: int = DEFAULT_MODES
) -> FaceSineBasis:
    """Sine basis of the index rectangle spanned by ``mask``."""
    if modes < 1:
        raise ValueError("Need at least one mode per axis")
    spacing = grid.spacing
    ranges = _window_ranges(mask)
    axis_modes = []
    axis_functions = []
    axis_eigen = []
    for a, b in ranges:
        m = b - a + 1
        ks = np.arange(1, min(modes, m) + 1)
        local = np.arange(grid.N + 2) - a + 1
        inside = (local >= 1) & (local <= m)
        norm = np.sqrt(2.0 / ((m + 1) * spacing))
        table = norm * np.sin(np.pi * np.outer(ks, local) / (m + 1)) * inside
        axis_modes.append(ks)
        axis_functions.append(table)
        axis_eigen.append((2.0 - 2.0 * np.cos(np.pi * ks / (m + 1))) / spacing**2)

    grids = np.meshgrid(*[np.arange(len(k)) for k in axis_modes], indexing="ij")
    flat = [g.ravel() for g in grids]
    mode_rows = np.stack([axis_modes[j][flat[j]] for j in range(len(flat))], axis=1)
    eigen = sum(axis_eigen[j][flat[j]] for j in range(len(flat)))
    functions = []
    for row in range(mode_rows.shape[0]):
        fn = axis_functions[0][flat[0][row]]
        for j in range(1, len(flat)):
            fn = np.multiply.outer(fn, axis_functions[j][flat[j][row]])
        functions.append(fn)
    stacked = np.stack(functions)
    if np.any(stacked[:, ~mask] != 0.0):
        raise ValueError("Sine basis leaks outside the patch window")
    return FaceSineBasis(
        face=face, modes=mode_rows, eigenvalues=np.asarray(eigen), functions=stacked
    )


def patch_bases(patch: BoundaryPatch, modes: int = DEFAULT_MODES) -> Tuple[FaceSineBasis, ...]:
    return tuple(
        face_sine_basis(patch.grid, pf.face, pf.mask, modes) for pf in patch.faces
    )


class BoundaryPair(BaseModel):
    """Navier data (f, g) as face coefficient vectors, keyed by face label."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    f: Dict[str, np.ndarray] = Field(default_factory=dict)
    g: Dict[str, np.ndarray] = Field(default_factory=dict)


class BasisEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    slot: str = Field(..., pattern="^[fg]$")
    face: int = Field(..., ge=0, description="Position in the patch face list")
    mode: int = Field(..., ge=0)


class BoundaryBasis(BaseModel):
    """Ordered f-slot then g-slot sine modes supported in a patch."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    patch: BoundaryPatch
    bases: Tuple[FaceSineBasis, ...]
    entries: Tuple[BasisEntry, ...]

    @property
    def grid(self) -> GridSpec:
        return self.patch.grid

    @property
    def count(self) -> int:
        return len(self.entries)

    def pair(self, index: int) -> BoundaryPair:
        entry = self.entries[index]
        basis = self.bases[entry.face]
        vector = np.zeros(basis.size, dtype=np.complex128)
        vector[entry.mode] = 1.0
        label = basis.face.label
        if entry.slot == "f":
            return BoundaryPair(f={label: vector})
        return BoundaryPair(g={label: vector})

    def eigenvalues(self) -> np.ndarray:
        return np.array(
            [self.bases[e.face].eigenvalues[e.mode] for e in self.entries]
        )

    def weights(self, f_order: float = 3.5, g_order: float = 1.5) -> np.ndarray:
        """Sobolev weights (1+λ)^{t/2} per entry, ``t`` by slot."""
        lam = self.eigenvalues()
        orders = np.array([f_order if e.slot == "f" else g_order for e in self.entries])
        return (1.0 + lam) ** (orders / 2.0)

    def traces(self, pair: BoundaryPair) -> Tuple[ScalarField, ScalarField]:
        """Closed-grid fields carrying f and g on the boundary layer."""
        grid = self.grid
        out = []
        for slot in (pair.f, pair.g):
            values = np.zeros(grid.shape, dtype=np.complex128)
            for basis in self.bases:
                coeffs = slot.get(basis.face.label)
                if coeffs is None:
                    continue
                if len(coeffs) != basis.size:
                    raise ValueError(
                        f"Face {basis.face.label}: {len(coeffs)} coefficients for "
                        f"{basis.size} modes"
                    )
                values[basis.face.index(grid)] += basis.synthesize(coeffs)
            out.append(ScalarField(grid=grid, values=values))
        return out[0], out[1]


def boundary_basis(patch: BoundaryPatch, modes: int = DEFAULT_MODES) -> BoundaryBasis:
    """Input basis on γ₁: every face mode in the f slot, then in the g slot."""
    bases = patch_bases(patch, modes)
    entries = [
        BasisEntry(slot=slot, face=i, mode=m)
        for slot in ("f", "g")
        for i, basis in enumerate(bases)
        for m in range(basis.size)
    ]
    logger.debug("Boundary basis on %s with %d entries", patch.labels, len(entries))
    return BoundaryBasis(patch=patch, bases=bases, entries=tuple(entries))


def project_traces(
    bases: Sequence[FaceSineBasis], field: ScalarField
) -> Tuple[np.ndarray, ...]:
    """Sine coefficients of the outward normal derivative on each basis face."""
    grid = field.grid
    return tuple(
        basis.project(
            outward_normal_derivative(field.values, grid, basis.face), grid.spacing
        )
        for basis in bases
    )


def face_of(bases: Sequence[FaceSineBasis], label: str) -> Optional[FaceSineBasis]:
    for basis in bases:
        if basis.face.label == label:
            return basis
    return None

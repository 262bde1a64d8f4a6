"""Domain construction: grids, boundary patches, neighborhoods and cutoffs."""

import logging
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage

from pybiharmonic.models.grid import (
    BoundaryPatch,
    Cutoff,
    Face,
    GridSpec,
    NeighborhoodChain,
    PatchFace,
)

logger = logging.getLogger(__name__)

MIN_DIMENSION = 3
MIN_POINTS = 8
CUTOFF_LAYERS = 3

FaceSelector = Union[str, Face, Iterable[Union[str, Face]]]


def build_grid(n: int, N: int) -> GridSpec:
    """Build the closed grid on the unit cube.

    Args:
        n: Spatial dimension, at least 3
        N: Interior points per axis, at least 8

    Returns:
        Grid with spacing 1/(N+1)

    Raises:
        ValueError: If n < 3 or N < 8
    """
    if n < MIN_DIMENSION:
        raise ValueError(f"dimension below {MIN_DIMENSION} is not supported (n={n})")
    if N < MIN_POINTS:
        raise ValueError(f"N={N} is too small for the stencils; need N >= {MIN_POINTS}")
    return GridSpec(n=n, N=N)


def _faces(selector: FaceSelector) -> Tuple[Face, ...]:
    if isinstance(selector, (str, Face)):
        selector = [selector]
    faces = tuple(Face.parse(s) if isinstance(s, str) else s for s in selector)
    if not faces:
        raise ValueError("No face selected")
    return faces


def make_patch(
    grid: GridSpec,
    face_selector: FaceSelector,
    window: Optional[Sequence[Sequence[float]]] = None,
) -> BoundaryPatch:
    """Select the face nodes strictly inside an axis-aligned window.

    Args:
        grid: Domain grid
        face_selector: Face label such as ``"x1=0"``, a Face, or several of them
        window: One ``(lo, hi)`` interval per tangential axis, in face
            coordinates; defaults to the whole face

    Returns:
        The boundary patch

    Raises:
        ValueError: If the window leaves the face or selects no node
    """
    faces = _faces(face_selector)
    if window is None:
        window = [(0.0, 1.0)] * (grid.n - 1)
    intervals = tuple((float(lo), float(hi)) for lo, hi in window)
    if len(intervals) != grid.n - 1:
        raise ValueError(
            f"Window needs {grid.n - 1} intervals, got {len(intervals)}"
        )
    for lo, hi in intervals:
        if not (0.0 <= lo < hi <= 1.0):
            raise ValueError(f"window outside face bounds: ({lo}, {hi})")

    for face in faces:
        if face.axis >= grid.n:
            raise ValueError(f"Face {face.label} does not exist for n={grid.n}")

    coords = grid.coordinates() - grid.box_origin
    interior = np.zeros(grid.N + 2, dtype=bool)
    interior[1:-1] = True
    axis_masks = [interior & (coords > lo) & (coords < hi) for lo, hi in intervals]
    mask = np.ones((grid.N + 2,) * (grid.n - 1), dtype=bool)
    for j, axis_mask in enumerate(axis_masks):
        shape = [1] * (grid.n - 1)
        shape[j] = -1
        mask = mask & axis_mask.reshape(shape)
    if not mask.any():
        raise ValueError("empty window: the patch must contain at least one node")

    return BoundaryPatch(
        grid=grid,
        faces=tuple(PatchFace(face=f, window=intervals, mask=mask) for f in faces),
    )


def make_neighborhoods(
    grid: GridSpec, w0: float, w1: float, w2: float, w3: float
) -> NeighborhoodChain:
    """Boundary neighborhoods ω_j = {dist(x, ∂Ω) < w_j}.

    Raises:
        ValueError: If the widths are not strictly decreasing, or a shell
            between consecutive neighborhoods contains no grid layer
    """
    widths = (float(w0), float(w1), float(w2), float(w3))
    if not all(a > b for a, b in zip(widths, widths[1:])) or widths[3] <= 0:
        raise ValueError(f"widths are not strictly decreasing: {widths}")
    if widths[3] < grid.spacing:
        raise ValueError(
            f"widths too small for the grid: w3={widths[3]} < spacing={grid.spacing}"
        )

    dist = grid.boundary_distance()
    masks = tuple(dist < w for w in widths)
    if not (~masks[0]).any():
        raise ValueError(f"w0={widths[0]} leaves no interior outside ω₀")
    for j in range(3):
        if not (masks[j] & ~masks[j + 1]).any():
            raise ValueError(
                f"widths too small for the grid: shell ω{j} ∖ ω{j + 1} is empty"
            )
    chain = NeighborhoodChain(grid=grid, widths=widths, masks=masks)  # type: ignore[arg-type]
    logger.debug(
        "Neighborhood chain %s with shell counts %s",
        widths,
        [int(chain.shell(j, j + 1).sum()) for j in range(3)],
    )
    return chain


def _smoothstep(t: np.ndarray) -> np.ndarray:
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def make_cutoff(
    grid: GridSpec,
    one_region: np.ndarray,
    zero_region: np.ndarray,
    profile: str = "quintic",
    strict: bool = True,
    inner_width: Optional[float] = None,
    outer_width: Optional[float] = None,
) -> Cutoff:
    """Quintic smoothstep of normalized distance between two node sets.

    Args:
        grid: Domain grid
        one_region: Nodes where the cutoff equals 1
        zero_region: Nodes where the cutoff equals 0
        profile: Only ``"quintic"`` is available
        strict: Reject an empty zero region
        inner_width: Recorded boundary distance of the one region, if any
        outer_width: Recorded boundary distance of the zero region, if any

    Returns:
        The cutoff

    Raises:
        ValueError: If the regions overlap, are closer than three grid layers,
            or the zero region is empty in strict mode
    """
    if profile != "quintic":
        raise ValueError(f"Unknown cutoff profile {profile!r}")
    one = np.asarray(one_region, dtype=bool)
    zero = np.asarray(zero_region, dtype=bool)
    if one.shape != grid.shape or zero.shape != grid.shape:
        raise ValueError("Cutoff regions must be closed-grid masks")
    if (one & zero).any():
        raise ValueError("cutoff regions overlap")
    if not one.any():
        raise ValueError("cutoff one-region is empty")
    if not zero.any():
        if strict:
            raise ValueError("cutoff zero-region is empty (constant cutoff)")
        return Cutoff(grid=grid, values=np.ones(grid.shape), gap=np.inf)

    spacing = grid.spacing
    d0 = ndimage.distance_transform_edt(~zero, sampling=spacing)
    d1 = ndimage.distance_transform_edt(~one, sampling=spacing)
    gap = float(d0[one].min())
    if gap < CUTOFF_LAYERS * spacing * (1.0 - 1e-9):
        raise ValueError(
            f"cutoff regions are {gap / spacing:.2f} layers apart; "
            f"need at least {CUTOFF_LAYERS}"
        )
    t = d0 / (d0 + d1)
    values = np.where(one, 1.0, np.where(zero, 0.0, _smoothstep(t)))
    return Cutoff(
        grid=grid,
        values=values,
        gap=gap,
        inner_width=inner_width,
        outer_width=outer_width,
    )


def chain_cutoff(chain: NeighborhoodChain) -> Cutoff:
    """χ: one on Ω ∖ ω₂, zero on ω₃."""
    return make_cutoff(
        chain.grid,
        one_region=~chain.masks[2],
        zero_region=chain.masks[3],
        inner_width=chain.widths[2],
        outer_width=chain.widths[3],
    )


def interior_envelope(chain: NeighborhoodChain) -> Cutoff:
    """Cutoff vanishing on ω₀ and equal to one three layers further in."""
    grid = chain.grid
    dist = grid.boundary_distance()
    reach = chain.widths[0] + (CUTOFF_LAYERS + 0.5) * grid.spacing
    one = dist >= reach
    if not one.any():
        raise ValueError(f"w0={chain.widths[0]} leaves no room for coefficients")
    return make_cutoff(
        grid,
        one_region=one,
        zero_region=chain.masks[0],
        inner_width=reach,
        outer_width=chain.widths[0],
    )

"""Tests for grids, boundary patches, neighborhoods and cutoffs."""

import numpy as np
import pytest

from pybiharmonic.grid import (
    build_grid,
    chain_cutoff,
    interior_envelope,
    make_cutoff,
    make_neighborhoods,
    make_patch,
)
from pybiharmonic.models.grid import Face, all_faces

from tests.conftest import TEST_N


def test_build_grid_spacing():
    """Test that the closed grid has N + 2 nodes and spacing 1/(N+1)."""
    grid = build_grid(3, TEST_N)
    assert grid.shape == (TEST_N + 2,) * 3
    assert grid.spacing == pytest.approx(1.0 / (TEST_N + 1))
    assert grid.box_size == 2 * (TEST_N + 1)
    axis = grid.coordinates()
    assert axis[0] == 0.0
    assert axis[-1] == pytest.approx(1.0)


def test_build_grid_rejects_small_inputs():
    """Test the dimension and resolution preconditions."""
    with pytest.raises(ValueError, match="dimension"):
        build_grid(2, 16)
    with pytest.raises(ValueError, match="too small"):
        build_grid(3, 4)


def test_boundary_distance(grid):
    """Test the L∞ distance to ∂Ω at a corner, an edge layer and the center."""
    dist = grid.boundary_distance()
    assert dist[0, 5, 5] == 0.0
    assert dist[2, 6, 7] == pytest.approx(2 * grid.spacing)
    assert dist.max() == pytest.approx(6 * grid.spacing)


def test_face_labels():
    """Test face label parsing and the outward sign."""
    face = Face.parse("x2=1")
    assert face.axis == 1
    assert face.side == 1
    assert face.label == "x2=1"
    assert face.outward_sign == 1.0
    assert Face.parse("x3=0").outward_sign == -1.0
    with pytest.raises(ValueError, match="Unknown face label"):
        Face.parse("y1=0")


def test_all_faces(grid):
    """Test that a cube in three dimensions has six faces."""
    labels = [face.label for face in all_faces(grid)]
    assert labels == ["x1=0", "x1=1", "x2=0", "x2=1", "x3=0", "x3=1"]


def test_make_patch_window(grid, gamma1):
    """Test that a half-face window selects the nodes strictly inside it."""
    assert gamma1.labels == ("x1=0",)
    mask = gamma1.faces[0].mask
    assert mask.shape == (TEST_N + 2, TEST_N + 2)
    # x3 < 0.5 keeps the interior nodes 1..6 on a 13-interval axis
    assert gamma1.faces[0].count == TEST_N * 6
    assert not mask[0].any()
    assert not mask[:, 7:].any()


def test_make_patch_full_face(grid):
    """Test that the default window covers every interior face node."""
    patch = make_patch(grid, "x2=1")
    assert patch.faces[0].count == TEST_N**2


def test_make_patch_several_faces(grid):
    """Test a patch spanning two faces."""
    patch = make_patch(grid, ["x1=0", "x3=1"], [(0.2, 0.8), (0.2, 0.8)])
    assert patch.labels == ("x1=0", "x3=1")
    assert patch.face_mask(Face.parse("x3=1")) is not None
    assert patch.face_mask(Face.parse("x2=0")) is None


def test_make_patch_errors(grid):
    """Test window validation."""
    with pytest.raises(ValueError, match="outside face bounds"):
        make_patch(grid, "x1=0", [(-0.1, 0.5), (0.0, 1.0)])
    with pytest.raises(ValueError, match="empty window"):
        make_patch(grid, "x1=0", [(0.0, 0.01), (0.0, 1.0)])
    with pytest.raises(ValueError, match="intervals"):
        make_patch(grid, "x1=0", [(0.0, 1.0)])
    with pytest.raises(ValueError, match="does not exist"):
        make_patch(grid, "x4=0")


def test_make_neighborhoods_nested(chain):
    """Test that ω₀ ⊃ ω₁ ⊃ ω₂ ⊃ ω₃ with nonempty shells."""
    masks = chain.masks
    for outer, inner in zip(masks, masks[1:]):
        assert np.all(outer[inner])
    for j in range(3):
        assert chain.shell(j, j + 1).any()
    assert (~masks[0]).any()


def test_make_neighborhoods_errors(grid):
    """Test the width preconditions."""
    with pytest.raises(ValueError, match="strictly decreasing"):
        make_neighborhoods(grid, 0.3, 0.3, 0.2, 0.1)
    with pytest.raises(ValueError, match="widths too small"):
        make_neighborhoods(grid, 0.4, 0.3, 0.2, 0.01)
    with pytest.raises(ValueError, match="widths too small"):
        # both widths fall between the same two grid layers
        make_neighborhoods(grid, 0.40, 0.39, 0.24, 0.08)


def test_make_cutoff_values(grid):
    """Test that the cutoff is one and zero on its regions and in [0, 1] between."""
    dist = grid.boundary_distance()
    one = dist >= 0.3
    zero = dist < 0.08
    cutoff = make_cutoff(grid, one, zero)
    assert np.all(cutoff.values[one] == 1.0)
    assert np.all(cutoff.values[zero] == 0.0)
    assert cutoff.values.min() >= 0.0
    assert cutoff.values.max() <= 1.0
    assert cutoff.gap >= 3 * grid.spacing * (1 - 1e-9)


def test_make_cutoff_errors(grid):
    """Test overlap, spacing and empty-region checks."""
    dist = grid.boundary_distance()
    zero = dist < 0.08
    with pytest.raises(ValueError, match="overlap"):
        make_cutoff(grid, dist >= 0.0, zero)
    with pytest.raises(ValueError, match="layers apart"):
        make_cutoff(grid, dist > 0.2, zero)
    with pytest.raises(ValueError, match="zero-region is empty"):
        make_cutoff(grid, dist >= 0.3, np.zeros(grid.shape, dtype=bool))
    with pytest.raises(ValueError, match="Unknown cutoff profile"):
        make_cutoff(grid, dist >= 0.3, zero, profile="linear")


def test_make_cutoff_constant_when_not_strict(grid):
    """Test the non-strict fallback to a constant cutoff."""
    empty = np.zeros(grid.shape, dtype=bool)
    cutoff = make_cutoff(grid, np.ones(grid.shape, dtype=bool), empty, strict=False)
    assert np.all(cutoff.values == 1.0)


def test_chain_cutoff(chain):
    """Test that χ vanishes on ω₃ and equals one off ω₂."""
    chi = chain_cutoff(chain)
    assert np.all(chi.values[chain.masks[3]] == 0.0)
    assert np.all(chi.values[~chain.masks[2]] == 1.0)
    assert chi.inner_width == chain.widths[2]


def test_interior_envelope_needs_room(chain):
    """Test that a wide ω₀ on a coarse grid leaves no room for coefficients."""
    with pytest.raises(ValueError, match="no room"):
        interior_envelope(chain)

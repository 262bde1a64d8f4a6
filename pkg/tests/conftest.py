"""Shared fixtures: a small grid, its neighborhood chain and coefficient sets."""

import numpy as np
import pytest

from pybiharmonic.grid import build_grid, make_neighborhoods, make_patch
from pybiharmonic.models.coefficients import CoefficientSet
from pybiharmonic.models.experiment import StabilityRecord
from pybiharmonic.models.fields import ScalarField, VectorField
from pybiharmonic.models.scenario import (
    BumpTerm,
    CoefficientRecipe,
    CoefficientSettings,
    GeometrySettings,
    Scenario,
    SweepSettings,
)

# Test constants
TEST_N = 12
TEST_WIDTHS = (0.40, 0.32, 0.24, 0.08)
SMALL_N = 20
SMALL_WIDTHS = (0.26, 0.21, 0.16, 0.05)


def bump(grid, center, width, amplitude):
    """Gaussian bump with the boundary layer set to zero."""
    mesh = grid.mesh()
    radius_sq = sum((x - c) ** 2 for x, c in zip(mesh, center))
    values = np.zeros(grid.shape)
    full = amplitude * np.exp(-radius_sq / (2.0 * width**2))
    values[grid.interior] = full[grid.interior]
    return values


def stability_record(delta, err, h=0.1, lam=4.0, **fields):
    """Sweep record with the given δ and H⁻¹ error of q."""
    values = {
        "t": 1.0,
        "h": h,
        "delta": delta,
        "err_q_Hminus1": err,
        "err_q_Linf": err,
        "q_linf_bound": err,
        "rho_dA": 1.0,
        "rho_q": 2.0,
        "lam": lam,
        "tau": lam * h,
        "q_frequencies": 7,
        "mu1": 0.00625,
        "mu2": 1.875e-5,
        "mu_prime": 9.375e-6,
    }
    values.update(fields)
    return StabilityRecord(**values)


def small_scenario(name="small", **sweep):
    """Scenario on the smallest grid that fits both cutoffs, with a q-only perturbation."""
    sweep_settings = {
        "scales": [1.0, 0.1],
        "h_values": [0.2],
        "basis_modes": 2,
        "output_modes": 2,
        "mode": "A_zero",
    }
    sweep_settings.update(sweep)
    return Scenario(
        name=name,
        geometry=GeometrySettings(N=SMALL_N, widths=SMALL_WIDTHS),
        coefficients=CoefficientSettings(
            perturbation=CoefficientRecipe(
                terms=[BumpTerm(center=(0.5, 0.5, 0.5), width=0.08, amplitude=0.5)]
            )
        ),
        sweep=SweepSettings(**sweep_settings),
    )


@pytest.fixture
def grid():
    """Small three-dimensional grid."""
    return build_grid(3, TEST_N)


@pytest.fixture
def chain(grid):
    """Neighborhood chain on the small grid; each shell holds at least one layer."""
    return make_neighborhoods(grid, *TEST_WIDTHS)


@pytest.fixture
def gamma1(grid):
    """Lower half of the face x1 = 0."""
    return make_patch(grid, "x1=0", [(0.0, 1.0), (0.0, 0.5)])


@pytest.fixture
def gamma2(grid):
    """Upper half of the face x2 = 1."""
    return make_patch(grid, "x2=1", [(0.0, 1.0), (0.5, 1.0)])


@pytest.fixture
def zero_coeffs(grid):
    """The unperturbed bilaplacian."""
    return CoefficientSet.zeros(grid)


@pytest.fixture
def q_only(grid):
    """Coefficients with a single potential bump."""
    q = bump(grid, (0.5, 0.5, 0.5), 0.12, 2.0)
    return CoefficientSet(A=VectorField.zeros(grid), q=ScalarField(grid=grid, values=q))


@pytest.fixture
def full_coeffs(grid):
    """Coefficients with small first-order bumps and a potential bump."""
    A = (
        bump(grid, (0.5, 0.45, 0.5), 0.12, 0.3),
        np.zeros(grid.shape),
        bump(grid, (0.5, 0.55, 0.5), 0.12, -0.2),
    )
    q = bump(grid, (0.5, 0.5, 0.5), 0.12, 1.5)
    return CoefficientSet(
        A=VectorField.from_arrays(grid, A), q=ScalarField(grid=grid, values=q)
    )

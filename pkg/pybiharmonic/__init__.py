"""Numerical stability lab for the perturbed biharmonic inverse problem."""

from pybiharmonic.carleman import carleman_check, make_weight, unique_continuation_experiment
from pybiharmonic.cgo import build_cgo, faddeev_apply_inverse, make_directions
from pybiharmonic.config import build_scenario, load_config, save_config
from pybiharmonic.dtn import assemble_dtn, dtn_difference_norm
from pybiharmonic.experiment import fit_stability_curve, run_scenario
from pybiharmonic.grid import build_grid, make_cutoff, make_neighborhoods, make_patch
from pybiharmonic.navier import NavierSolver, solve_navier
from pybiharmonic.reconstruction import (
    IdentityContext,
    decompose,
    evaluate_integral_identity,
    extract_dA_hat,
    extract_phi_hat,
    extract_q_hat,
    lowpass_invert,
    reconstruct_coefficients,
)

__version__ = "0.1.0"
__all__ = [
    "IdentityContext",
    "NavierSolver",
    "assemble_dtn",
    "build_cgo",
    "build_grid",
    "build_scenario",
    "carleman_check",
    "decompose",
    "dtn_difference_norm",
    "evaluate_integral_identity",
    "extract_dA_hat",
    "extract_phi_hat",
    "extract_q_hat",
    "faddeev_apply_inverse",
    "fit_stability_curve",
    "load_config",
    "lowpass_invert",
    "make_cutoff",
    "make_directions",
    "make_neighborhoods",
    "make_patch",
    "make_weight",
    "reconstruct_coefficients",
    "run_scenario",
    "save_config",
    "solve_navier",
    "unique_continuation_experiment",
]

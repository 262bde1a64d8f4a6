"""Tests for stability sweeps, curve fits and run summaries."""

import numpy as np
import pytest

from pybiharmonic.experiment import (
    fit_stability_curve,
    reference_exponent,
    run_scenario,
    sine_product,
    summarize,
)
from pybiharmonic.models.experiment import CellFailure, FitModel, SweepReport
from pybiharmonic.models.reconstruction import QMode
from pybiharmonic.reconstruction import theorem_exponents

from tests.conftest import small_scenario, stability_record

# Test constants
TEST_DELTAS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)
TEST_EXPONENT = -0.4


def test_fit_recovers_log_power():
    """Test err = |log δ|^{−0.4} gives exponent −0.4."""
    records = [stability_record(d, abs(np.log(d)) ** TEST_EXPONENT) for d in TEST_DELTAS]
    fit = fit_stability_curve(records, reference=-0.4)
    assert fit.model == FitModel.LOG_POWER
    assert fit.exponent == pytest.approx(TEST_EXPONENT, abs=1e-9)
    assert fit.intercept == pytest.approx(0.0, abs=1e-9)
    assert fit.residual < 1e-9
    assert fit.count == len(TEST_DELTAS)
    assert fit.reference == -0.4


def test_fit_recovers_loglog_power():
    """Test err = |log|log δ||^{−0.2} under the double-log regressor."""
    records = [
        stability_record(d, abs(np.log(abs(np.log(d)))) ** -0.2) for d in TEST_DELTAS
    ]
    fit = fit_stability_curve(records, "loglog_power")
    assert fit.model == FitModel.LOGLOG_POWER
    assert fit.exponent == pytest.approx(-0.2, abs=1e-9)


def test_fit_of_constant_error():
    """Test that a flat curve fits with exponent zero."""
    records = [stability_record(d, 0.3) for d in TEST_DELTAS]
    fit = fit_stability_curve(records)
    assert fit.exponent == pytest.approx(0.0, abs=1e-12)
    assert fit.stderr == pytest.approx(0.0, abs=1e-12)


def test_fit_skips_unusable_records():
    """Test that δ = 0 and zero errors are left out."""
    records = [stability_record(d, abs(np.log(d)) ** TEST_EXPONENT) for d in TEST_DELTAS]
    records += [stability_record(0.0, 0.0, t=0.0), stability_record(1e-3, 0.0)]
    fit = fit_stability_curve(records)
    assert fit.count == len(TEST_DELTAS)


def test_fit_needs_wide_delta_range():
    """Test rejection of narrow or short δ ranges."""
    narrow = [stability_record(d, 0.1) for d in (0.01, 0.02, 0.03, 0.05)]
    with pytest.raises(ValueError, match="need wider delta range"):
        fit_stability_curve(narrow)
    short = [stability_record(d, 0.1) for d in (1e-1, 1e-3, 1e-5)]
    with pytest.raises(ValueError, match="need wider delta range"):
        fit_stability_curve(short)
    missing = [stability_record(d, 0.1) for d in TEST_DELTAS]
    with pytest.raises(ValueError, match="need wider delta range"):
        fit_stability_curve(missing, column="err_A_Linf")


def test_reference_exponent():
    """Test the predicted exponent per mode and regressor."""
    exponents = theorem_exponents(3, 4.0)
    assert reference_exponent(exponents, QMode.A_ZERO, FitModel.LOG_POWER) == -0.4
    assert reference_exponent(exponents, QMode.WITH_A, FitModel.LOG_POWER) == -exponents.mu2
    assert reference_exponent(exponents, QMode.WITH_A, FitModel.LOGLOG_POWER) == (
        -exponents.mu_prime
    )


def test_summarize_lists_failures():
    """Test the summary sections of a sweep with one aborted stage."""
    report = SweepReport(
        scenario="small",
        records=[stability_record(1e-2, 0.1)],
        failures=[CellFailure(t=1.0, stage="dtn", error="boom")],
        deltas=[(0.0, 0.0), (0.5, 1e-2)],
        exponents=theorem_exponents(3, 4.0),
    )
    sections = summarize(report)
    assert not report.ok
    assert sections["sweep"]["records"] == 1
    assert sections["sweep"]["aborted_cells"] == 1
    assert sections["sweep"]["deltas"] == "t=0:0.000000e+00, t=0.5:1.000000e-02"
    assert sections["predicted_exponents"]["mu1"] == pytest.approx(0.00625)
    assert sections["failures"] == {"t=1,h=None": "dtn: boom"}


def test_sine_product(grid):
    """Test that the test function vanishes on ∂Ω with its exact gradient."""
    u, grads = sine_product(grid)
    interior = np.zeros(grid.shape, dtype=bool)
    interior[grid.interior] = True
    assert np.max(np.abs(u[~interior])) < 1e-12
    assert np.all(u[interior] > 0)
    assert len(grads) == grid.n
    x = grid.coordinates()
    assert grads[0][1, 3, 5] == pytest.approx(
        np.pi * np.cos(np.pi * x[1]) * np.sin(np.pi * x[3]) * np.sin(np.pi * x[5])
    )


@pytest.mark.slow
def test_run_small_scenario():
    """Test a potential-only sweep on the smallest grid fitting both cutoffs."""
    report = run_scenario(small_scenario())
    assert report.ok
    assert [r.t for r in report.records] == [0.0, 1.0, 0.1]
    assert report.deltas[0] == (0.0, 0.0)
    zero, full, tenth = report.records
    assert zero.delta == 0.0
    assert zero.err_q_Hminus1 == 0.0
    assert full.delta > tenth.delta > 0.0
    assert full.err_A_Linf is None
    assert full.mode == QMode.A_ZERO
    assert full.tau == pytest.approx(0.8)

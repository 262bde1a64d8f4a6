"""Tests for binary dumps, CSV tables and run summaries."""

import numpy as np
import pytest

from pybiharmonic.grid import build_grid
from pybiharmonic.io import (
    decode_dtn,
    decode_field,
    encode_dtn,
    encode_field,
    ensure_dir,
    format_summary,
    read_csv_models,
    read_dtn,
    read_field,
    records_frame,
    write_csv,
    write_dtn,
    write_field,
)
from pybiharmonic.models.dtn import PartialDtnMatrix
from pybiharmonic.models.experiment import StabilityRecord
from pybiharmonic.models.fields import ScalarField
from pybiharmonic.models.reconstruction import QMode
from pybiharmonic.models.scenario import Scenario

from tests.conftest import stability_record

# Test constants
REAL_VALUES = np.arange(24, dtype=float).reshape(2, 3, 4) / 7.0


@pytest.fixture
def dtn():
    """Small hand-made DtN matrix."""
    return PartialDtnMatrix(
        matrix=np.array([[1 + 2j, 0.5], [-3.0, 1j / 3]]),
        weights_in=np.array([2.0, 5.0]),
        weights_out=np.array([1.5, 3.0]),
    )


def test_field_encoding_keeps_real_values():
    """Test that real payloads stay float64."""
    decoded = decode_field(encode_field(REAL_VALUES))
    assert decoded.dtype == np.float64
    assert np.array_equal(decoded, REAL_VALUES)


def test_field_encoding_keeps_complex_values():
    """Test complex payloads and the real fallback for zero imaginary parts."""
    values = REAL_VALUES * (1 - 0.25j)
    decoded = decode_field(encode_field(values))
    assert decoded.dtype == np.complex128
    assert np.array_equal(decoded, values)
    assert decode_field(encode_field(REAL_VALUES + 0j)).dtype == np.float64


def test_field_decoding_errors():
    """Test magic, truncation and trailing-byte checks."""
    payload = encode_field(REAL_VALUES)
    with pytest.raises(ValueError, match="not a BHFLD1"):
        decode_field(b"BHDTN1" + payload[6:])
    with pytest.raises(ValueError, match="truncated"):
        decode_field(payload[:-8])
    with pytest.raises(ValueError, match="trailing bytes"):
        decode_field(payload + b"\x00")


def test_field_file_round_trip(tmp_path, grid):
    """Test writing a field and reading it onto matching and other grids."""
    field = ScalarField(grid=grid, values=np.full(grid.shape, 2.5))
    path = tmp_path / "q.bhfld"
    write_field(field, path)
    assert np.array_equal(read_field(path, grid).values, field.values)
    with pytest.raises(ValueError, match="does not match grid"):
        read_field(path, build_grid(3, 10))


def test_dtn_file_round_trip(tmp_path, dtn):
    """Test the DtN dump layout."""
    path = tmp_path / "dtn.bhdtn"
    write_dtn(dtn, path)
    loaded = read_dtn(path)
    assert np.array_equal(loaded.matrix, dtn.matrix)
    assert np.array_equal(loaded.weights_in, dtn.weights_in)
    assert np.array_equal(loaded.weights_out, dtn.weights_out)
    assert loaded.orders_in == dtn.orders_in
    assert loaded.orders_out == dtn.orders_out


def test_dtn_decoding_errors(dtn):
    """Test the DtN magic and payload length checks."""
    payload = encode_dtn(dtn)
    with pytest.raises(ValueError, match="not a BHDTN1"):
        decode_dtn(encode_field(REAL_VALUES))
    with pytest.raises(ValueError, match="truncated"):
        decode_dtn(payload[:-1])
    with pytest.raises(ValueError, match="trailing bytes"):
        decode_dtn(payload + b"\x00")


def test_records_frame_flattens_rows():
    """Test columns for complex values, tuples, nested mappings and enums."""
    frame = records_frame(
        [{"z": 1 + 2j, "index": (1, 0, -1), "fit": {"a": 3.0}, "mode": QMode.A_ZERO}]
    )
    assert list(frame.columns) == ["z.re", "z.im", "index", "fit.a", "mode"]
    row = frame.iloc[0]
    assert row["z.re"] == 1.0
    assert row["z.im"] == 2.0
    assert row["index"] == "1 0 -1"
    assert row["fit.a"] == 3.0
    assert row["mode"] == "A_zero"


def test_stability_records_round_trip(tmp_path):
    """Test that records with missing A errors survive the CSV."""
    records = [
        stability_record(1e-3 / 3.0, 0.123456789012345, mode=QMode.A_ZERO),
        stability_record(2e-2, 0.5, h=0.05, above_threshold=True, mode=QMode.A_ZERO),
    ]
    path = tmp_path / "sweep.csv"
    frame = write_csv(records, path)
    assert len(frame) == 2
    loaded = read_csv_models(path, StabilityRecord)
    assert loaded == records
    assert loaded[0].err_A_Linf is None


def test_format_summary():
    """Test section layout and the trailing configuration block."""
    text = format_summary(Scenario(), {"fit": {"exponent": 0.123456789, "count": 4}})
    assert text.startswith("scenario: calibration\n")
    assert "[fit]\nexponent = 0.123457\ncount = 4\n" in text
    assert "[configuration]" in text
    assert text.index("[fit]") < text.index("[configuration]")


def test_ensure_dir(tmp_path):
    """Test nested directory creation."""
    out = ensure_dir(tmp_path / "runs" / "small" / "fit")
    assert out.is_dir()
    assert ensure_dir(out) == out

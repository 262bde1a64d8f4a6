"""Binary field and DtN dumps, CSV tables and plain-text run summaries.

Binary layouts, all little-endian:

* fields: ``b"BHFLD1"``, uint32 n, n × uint32 dims, uint8 complex flag,
  then the row-major payload as float64 or complex128;
* DtN matrices: ``b"BHDTN1"``, uint32 rows, uint32 cols, cols × float64
  input weights, rows × float64 output weights, 4 × float64 orders, then the
  row-major complex128 matrix.
"""

import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Tuple, Type, TypeVar, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from pybiharmonic.models.dtn import PartialDtnMatrix
from pybiharmonic.models.fields import ScalarField
from pybiharmonic.models.grid import GridSpec
from pybiharmonic.models.scenario import Scenario

logger = logging.getLogger(__name__)

FIELD_MAGIC = b"BHFLD1"
DTN_MAGIC = b"BHDTN1"
FLOAT_FORMAT = "%.17g"

PathLike = Union[str, Path]
ModelT = TypeVar("ModelT", bound=BaseModel)


def _take(buffer: bytes, offset: int, dtype: str, count: int) -> Tuple[np.ndarray, int]:
    size = np.dtype(dtype).itemsize * count
    if offset + size > len(buffer):
        raise ValueError("truncated file")
    return np.frombuffer(buffer, dtype=dtype, count=count, offset=offset), offset + size


def encode_field(values: np.ndarray) -> bytes:
    values = np.asarray(values)
    is_complex = np.iscomplexobj(values) and bool(np.any(values.imag != 0))
    payload = values.astype("<c16" if is_complex else "<f8")
    header = (
        FIELD_MAGIC
        + np.array([values.ndim], dtype="<u4").tobytes()
        + np.array(values.shape, dtype="<u4").tobytes()
        + np.array([is_complex], dtype="u1").tobytes()
    )
    return header + np.ascontiguousarray(payload).tobytes()


def decode_field(buffer: bytes) -> np.ndarray:
    """Inverse of :func:`encode_field`.

    Raises:
        ValueError: On a wrong magic, a truncated payload or trailing bytes
    """
    if not buffer.startswith(FIELD_MAGIC):
        raise ValueError("not a BHFLD1 field file")
    offset = len(FIELD_MAGIC)
    ndim, offset = _take(buffer, offset, "<u4", 1)
    dims, offset = _take(buffer, offset, "<u4", int(ndim[0]))
    flag, offset = _take(buffer, offset, "u1", 1)
    shape = tuple(int(d) for d in dims)
    count = int(np.prod(shape))
    data, offset = _take(buffer, offset, "<c16" if flag[0] else "<f8", count)
    if offset != len(buffer):
        raise ValueError("trailing bytes after field payload")
    return data.reshape(shape).copy()


def write_field(field: ScalarField, path: PathLike) -> None:
    Path(path).write_bytes(encode_field(field.values))


def read_field(path: PathLike, grid: GridSpec) -> ScalarField:
    """Read a field file onto ``grid``.

    Raises:
        ValueError: If the stored shape does not match the grid
    """
    values = decode_field(Path(path).read_bytes())
    if values.shape != grid.shape:
        raise ValueError(f"field shape {values.shape} does not match grid {grid.shape}")
    return ScalarField(grid=grid, values=values)


def encode_dtn(dtn: PartialDtnMatrix) -> bytes:
    rows, cols = dtn.shape
    parts = [
        DTN_MAGIC,
        np.array([rows, cols], dtype="<u4").tobytes(),
        dtn.weights_in.astype("<f8").tobytes(),
        dtn.weights_out.astype("<f8").tobytes(),
        np.array(dtn.orders_in + dtn.orders_out, dtype="<f8").tobytes(),
        np.ascontiguousarray(dtn.matrix.astype("<c16")).tobytes(),
    ]
    return b"".join(parts)


def decode_dtn(buffer: bytes) -> PartialDtnMatrix:
    if not buffer.startswith(DTN_MAGIC):
        raise ValueError("not a BHDTN1 matrix file")
    offset = len(DTN_MAGIC)
    dims, offset = _take(buffer, offset, "<u4", 2)
    rows, cols = int(dims[0]), int(dims[1])
    weights_in, offset = _take(buffer, offset, "<f8", cols)
    weights_out, offset = _take(buffer, offset, "<f8", rows)
    orders, offset = _take(buffer, offset, "<f8", 4)
    matrix, offset = _take(buffer, offset, "<c16", rows * cols)
    if offset != len(buffer):
        raise ValueError("trailing bytes after matrix payload")
    return PartialDtnMatrix(
        matrix=matrix.reshape(rows, cols),
        weights_in=weights_in,
        weights_out=weights_out,
        orders_in=(float(orders[0]), float(orders[1])),
        orders_out=(float(orders[2]), float(orders[3])),
    )


def write_dtn(dtn: PartialDtnMatrix, path: PathLike) -> None:
    Path(path).write_bytes(encode_dtn(dtn))


def read_dtn(path: PathLike) -> PartialDtnMatrix:
    return decode_dtn(Path(path).read_bytes())


def _flatten(row: Mapping[str, Any]) -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for key, value in row.items():
        if isinstance(value, Mapping):
            for inner, item in _flatten(value).items():
                flat[f"{key}.{inner}"] = item
        elif isinstance(value, Enum):
            flat[key] = value.value
        elif isinstance(value, complex):
            flat[f"{key}.re"] = value.real
            flat[f"{key}.im"] = value.imag
        elif isinstance(value, (list, tuple)):
            flat[key] = " ".join(str(v) for v in value)
        else:
            flat[key] = value
    return flat


def records_frame(records: Iterable[Union[BaseModel, Mapping[str, Any]]]) -> pd.DataFrame:
    """One row per record; nested models become dotted columns."""
    rows = [
        _flatten(r.model_dump(mode="python") if isinstance(r, BaseModel) else r)
        for r in records
    ]
    return pd.DataFrame(rows)


def write_csv(records: Iterable[Union[BaseModel, Mapping[str, Any]]], path: PathLike) -> pd.DataFrame:
    """Write records with round-trip float precision and return the frame."""
    frame = records_frame(records)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.debug("Wrote %d rows to %s", len(frame), path)
    return frame


def read_csv_models(path: PathLike, model: Type[ModelT]) -> List[ModelT]:
    """Read a CSV of flat records back into ``model`` instances."""
    frame = pd.read_csv(path, float_precision="round_trip")
    frame = frame.astype(object).where(frame.notna(), None)
    return [model.model_validate(row) for row in frame.to_dict(orient="records")]


def format_summary(
    scenario: Scenario, sections: Mapping[str, Mapping[str, Any]]
) -> str:
    """Plain-text summary: every result section, then the full configuration."""
    lines = [f"scenario: {scenario.name}", ""]
    for title, values in sections.items():
        lines.append(f"[{title}]")
        for key, value in values.items():
            if isinstance(value, float):
                value = f"{value:.6g}"
            lines.append(f"{key} = {value}")
        lines.append("")
    lines.append("[configuration]")
    lines.append(scenario.model_dump_json(indent=2))
    return "\n".join(lines) + "\n"


def write_summary(
    scenario: Scenario, sections: Mapping[str, Mapping[str, Any]], path: PathLike
) -> None:
    Path(path).write_text(format_summary(scenario, sections), encoding="utf-8")


def ensure_dir(path: PathLike) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


"""Model for assembled partial Dirichlet-to-Neumann matrices."""

from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _frozen(value: np.ndarray, dtype: type) -> np.ndarray:
    array = np.array(value, dtype=dtype, copy=True)
    if not np.all(np.isfinite(array)):
        raise ValueError("DtN data contain non-finite entries")
    array.setflags(write=False)
    return array


class PartialDtnMatrix(BaseModel):
    """Λ^{γ₁,γ₂}: γ₁ input coefficients to γ₂ output coefficients.

    Rows list the ∂_νu coefficients of every γ₂ face, then the ∂_νΔu
    coefficients; columns follow the input basis order.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray
    weights_in: np.ndarray = Field(..., description="(1+λ)^{t/2}, t = 7/2 or 3/2")
    weights_out: np.ndarray = Field(..., description="(1+λ)^{t/2}, t = 5/2 or 1/2")
    orders_in: Tuple[float, float] = (3.5, 1.5)
    orders_out: Tuple[float, float] = (2.5, 0.5)
    residuals: Tuple[float, ...] = Field(default=(), description="Per-column solve residuals")

    @field_validator("matrix")
    @classmethod
    def _check_matrix(cls, value: np.ndarray) -> np.ndarray:
        return _frozen(value, np.complex128)

    @field_validator("weights_in", "weights_out")
    @classmethod
    def _check_weights(cls, value: np.ndarray) -> np.ndarray:
        array = _frozen(value, float)
        if np.any(array <= 0):
            raise ValueError("DtN weights must be positive")
        return array

    @model_validator(mode="after")
    def _check_shapes(self) -> "PartialDtnMatrix":
        rows, cols = self.matrix.shape
        if self.weights_in.shape != (cols,) or self.weights_out.shape != (rows,):
            raise ValueError(
                f"Weights {self.weights_out.shape}/{self.weights_in.shape} do not "
                f"fit a {rows}x{cols} matrix"
            )
        return self

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape  # type: ignore[return-value]

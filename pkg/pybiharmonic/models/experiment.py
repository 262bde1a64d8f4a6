"""Records produced by stability sweeps and curve fits."""

from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from pybiharmonic.models.reconstruction import QMode, TheoremExponents


class StabilityRecord(BaseModel):
    """Errors of one (t, h) reconstruction against the DtN difference δ.

    ``err_A_Linf`` and ``err_dA_Linf`` are absent in ``A_zero`` mode.
    ``q_linf_bound`` is M^{1−θ}·err_q_Hminus1^θ.
    """

    model_config = ConfigDict(frozen=True)

    t: float = Field(..., ge=0)
    h: float = Field(..., gt=0)
    delta: float = Field(..., ge=0)
    err_A_Linf: Optional[float] = Field(None, ge=0)
    err_dA_Linf: Optional[float] = Field(None, ge=0)
    err_q_Hminus1: float = Field(..., ge=0)
    err_q_Linf: float = Field(..., ge=0)
    q_linf_bound: float = Field(..., ge=0)
    rho_dA: float = Field(..., gt=0)
    rho_q: float = Field(..., gt=0)
    lam: float = Field(..., gt=0)
    tau: float = Field(..., gt=0)
    above_threshold: bool = False
    mode: QMode = QMode.WITH_A
    q_frequencies: int = Field(..., ge=1)
    cgo_residual: float = Field(0.0, ge=0)
    mu1: float
    mu2: float
    mu_prime: float

    @model_validator(mode="after")
    def _check_tau(self) -> "StabilityRecord":
        if self.tau != self.lam * self.h:
            raise ValueError(f"tau={self.tau} differs from lam*h={self.lam * self.h}")
        return self


class CellFailure(BaseModel):
    """A (t, h) cell that aborted; ``h`` is None when the DtN stage failed."""

    model_config = ConfigDict(frozen=True)

    t: float
    h: Optional[float] = None
    stage: str
    error: str


class SweepReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    scenario: str
    records: List[StabilityRecord]
    failures: List[CellFailure] = Field(default_factory=list)
    deltas: List[Tuple[float, float]] = Field(
        default_factory=list, description="(t, delta) in sweep order"
    )
    exponents: TheoremExponents

    @property
    def ok(self) -> bool:
        return not self.failures


class FitModel(str, Enum):
    """Regressor for log(err): log|log δ| or log|log|log δ||."""

    LOG_POWER = "log_power"
    LOGLOG_POWER = "loglog_power"


class StabilityFit(BaseModel):
    """Least-squares power law err ≈ C·x^{exponent}."""

    model_config = ConfigDict(frozen=True)

    model: FitModel
    column: str
    exponent: float
    intercept: float
    residual: float = Field(..., ge=0, description="RMS of the log residuals")
    stderr: float = Field(..., ge=0, description="Standard error of the exponent")
    count: int = Field(..., ge=2)
    reference: Optional[float] = Field(
        None, description="Predicted exponent printed beside the fit"
    )

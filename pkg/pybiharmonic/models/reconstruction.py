"""Models for Fourier extraction, low-pass inversion and the A decomposition."""

from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from pybiharmonic.models.fields import ScalarField, TwoFormField, VectorField


class SampleKind(str, Enum):
    DA = "dA"
    Q = "q"
    PHI = "phi"


class QMode(str, Enum):
    """``with_A`` subtracts the measured A-term; ``A_zero`` requires A₁ = A₂ = 0."""

    WITH_A = "with_A"
    A_ZERO = "A_zero"


class IntegralEvidence(BaseModel):
    """Both sides of the integral identity for one CGO pair.

    ``lhs`` is ∫(A·Du₂ + qu₂)ū₁ and ``commutator_term`` is ∫ū₁P(x,D)u with
    P(x,D)u = 𝓛₁(χu) − χ𝓛₁u; the identity reads lhs = −commutator_term.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lhs: complex
    commutator_term: complex
    identity_residual: float = Field(..., ge=0, description="|lhs + commutator_term|")
    dtn_bound: Optional[float] = Field(
        None, description="Right side of the DtN bound with measured norms"
    )
    solve_residual: float = Field(0.0, ge=0)


class FrequencySample(BaseModel):
    """Extracted Fourier values at one dual-lattice point ξ = π·index."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    index: Tuple[int, ...]
    values: np.ndarray = Field(..., description="One value per (j, k) pair, or one for q/φ")
    budgets: np.ndarray
    degenerate: bool = False
    cgo_residual: float = Field(0.0, ge=0)
    identity_residual: Optional[float] = None

    @field_validator("values")
    @classmethod
    def _complex(cls, value: np.ndarray) -> np.ndarray:
        array = np.array(np.ravel(value), dtype=np.complex128, copy=True)
        array.setflags(write=False)
        return array

    @field_validator("budgets")
    @classmethod
    def _budgets(cls, value: np.ndarray) -> np.ndarray:
        array = np.array(np.ravel(value), dtype=float, copy=True)
        if np.any(array < 0):
            raise ValueError("Error budgets must be nonnegative")
        array.setflags(write=False)
        return array

    @property
    def xi(self) -> np.ndarray:
        return np.pi * np.asarray(self.index, dtype=float)


class FourierSamples(BaseModel):
    """Samples over the dual lattice ball |ξ| ≤ radius, in lattice order.

    ``rho`` is the h-coupled cutoff before clamping, ``radius`` the one used.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: SampleKind
    samples: Tuple[FrequencySample, ...]
    tau: float = Field(..., gt=0)
    h: float = Field(..., gt=0)
    lam: float = Field(..., gt=0)
    rho: float = Field(..., gt=0)
    nyquist: float = Field(..., gt=0)

    @property
    def radius(self) -> float:
        return min(self.rho, self.nyquist)

    @property
    def indices(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(s.index for s in self.samples)

    def value_table(self) -> np.ndarray:
        """Values stacked as (frequency, component)."""
        return np.stack([s.values for s in self.samples])


class LowpassResult(BaseModel):
    """Band-limited field rebuilt from Fourier samples."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    field: Union[TwoFormField, ScalarField]
    rho: float = Field(..., gt=0)
    nyquist: float = Field(..., gt=0)
    h: float = Field(..., gt=0)
    count: int = Field(..., ge=1, description="Lattice points used")


class DecompositionResult(BaseModel):
    """A = A_sol + ∇φ with φ = 0 on ∂Ω."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    phi: ScalarField
    A_sol: VectorField
    div_residual: float = Field(..., ge=0)
    boundary_residual: float = Field(..., ge=0)
    h: Optional[float] = None


class TheoremExponents(BaseModel):
    """Predicted stability exponents for given (n, s)."""

    model_config = ConfigDict(frozen=True)

    n: int
    s: float
    eta: float
    eta_tilde: float
    mu1: float
    mu2: float
    mu_prime: float
    a_zero_power: float = Field(2.0 / 3.0, description="Hölder exponent when A = 0")
    a_zero_log: float
    linf_theta: float


class AEstimateReport(BaseModel):
    """Measured L∞ norms of the reconstructed A and its pieces."""

    model_config = ConfigDict(frozen=True)

    h: Optional[float]
    dA_linf: float = Field(..., ge=0)
    A_sol_bound: float = Field(..., ge=0)
    grad_phi_bound: float = Field(..., ge=0)
    A_bound: float = Field(..., ge=0)
    solenoidal_ratio: float = Field(..., ge=0, description="‖A_sol‖∞ / ‖dA‖∞")
    triangle_ok: bool
    exponents: TheoremExponents


class ParameterCoupling(BaseModel):
    """Exponents of the two terms in the integral bound after τ = λh."""

    model_config = ConfigDict(frozen=True)

    alpha1: float
    alpha2: float
    lam: float = Field(..., gt=0)
    R: float = Field(..., gt=0)
    alpha3: float
    alpha4: float

    @property
    def decaying(self) -> bool:
        """Whether e^{−α₃/h} decays, i.e. 4R/λ < α₁/3."""
        return self.alpha3 > 0


class ReconstructionResult(BaseModel):
    """Everything one (pair, h, λ) reconstruction produces.

    The A-side entries are absent in ``A_zero`` mode.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    q_samples: FourierSamples
    q: LowpassResult
    dA_samples: Optional[FourierSamples] = None
    phi_samples: Optional[FourierSamples] = None
    dA: Optional[LowpassResult] = None
    A: Optional[VectorField] = None
    decomposition: Optional[DecompositionResult] = None

    @model_validator(mode="after")
    def _same_h(self) -> "ReconstructionResult":
        for other in (self.dA_samples, self.phi_samples):
            if other is not None and other.h != self.q_samples.h:
                raise ValueError("Samples come from different h")
        return self

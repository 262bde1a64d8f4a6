"""Domain models for grids, fields, operators and experiment records."""

from pybiharmonic.models.carleman import (
    CarlemanWeight,
    InequalityReport,
    UcCell,
    UniqueContinuationReport,
)
from pybiharmonic.models.cgo import AmplitudeKind, CgoDirections, CgoRole, CgoSolution
from pybiharmonic.models.coefficients import (
    CoefficientSet,
    ConditionFlag,
    FieldTraces,
    NavierProblem,
    NavierSolution,
    SolveReport,
)
from pybiharmonic.models.dtn import PartialDtnMatrix
from pybiharmonic.models.experiment import (
    CellFailure,
    FitModel,
    StabilityFit,
    StabilityRecord,
    SweepReport,
)
from pybiharmonic.models.fields import (
    FaceCoefficients,
    InterpolationReport,
    NormKind,
    PeriodicField,
    ScalarField,
    SobolevIndex,
    TwoFormField,
    VectorField,
)
from pybiharmonic.models.grid import (
    BoundaryPatch,
    Cutoff,
    Face,
    GridSpec,
    NeighborhoodChain,
    PatchFace,
)
from pybiharmonic.models.reconstruction import (
    AEstimateReport,
    DecompositionResult,
    FourierSamples,
    FrequencySample,
    IntegralEvidence,
    LowpassResult,
    ParameterCoupling,
    QMode,
    ReconstructionResult,
    SampleKind,
    TheoremExponents,
)
from pybiharmonic.models.scenario import (
    Bump,
    BumpTerm,
    CarlemanSettings,
    CoefficientRecipe,
    CoefficientSettings,
    GeometrySettings,
    PatchSpec,
    RunConfig,
    Scenario,
    SweepSettings,
)
from pybiharmonic.models.settings import CgoSettings, SolverSettings

__all__ = [
    "AEstimateReport",
    "AmplitudeKind",
    "BoundaryPatch",
    "Bump",
    "BumpTerm",
    "CarlemanSettings",
    "CarlemanWeight",
    "CellFailure",
    "CgoDirections",
    "CgoRole",
    "CgoSettings",
    "CgoSolution",
    "CoefficientRecipe",
    "CoefficientSet",
    "CoefficientSettings",
    "ConditionFlag",
    "Cutoff",
    "DecompositionResult",
    "Face",
    "FaceCoefficients",
    "FieldTraces",
    "FitModel",
    "FourierSamples",
    "FrequencySample",
    "GeometrySettings",
    "GridSpec",
    "InequalityReport",
    "IntegralEvidence",
    "InterpolationReport",
    "LowpassResult",
    "NavierProblem",
    "NavierSolution",
    "NeighborhoodChain",
    "NormKind",
    "ParameterCoupling",
    "PartialDtnMatrix",
    "PatchFace",
    "PatchSpec",
    "PeriodicField",
    "QMode",
    "ReconstructionResult",
    "RunConfig",
    "SampleKind",
    "ScalarField",
    "Scenario",
    "SobolevIndex",
    "SolveReport",
    "SolverSettings",
    "StabilityFit",
    "StabilityRecord",
    "SweepReport",
    "SweepSettings",
    "TheoremExponents",
    "TwoFormField",
    "UcCell",
    "UniqueContinuationReport",
    "VectorField",
]

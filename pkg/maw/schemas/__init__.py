# maw/schemas/__init__.py
from .change_points import CHANGE_POINT_RANGES, INTEGRATOR_DISTANCE_KM, ChangePoints, range_violation
from .ingest import IngestConfig, SynthConfig
from .metrics import (
    HISTOGRAM_BINS,
    ComparisonReport,
    ComparisonRow,
    MemorySample,
    MobilityMetrics,
    RecoveryScore,
    RunProfile,
    ScalingPoint,
    ScalingReport,
    StageTiming,
)
from .workflow import (
    Diagnostic,
    IntegratorRules,
    StageKind,
    StageSpec,
    ValidationReport,
    WorkflowSpec,
)

"""The six comparison workflows plus the integrated GPS + cellular workflow."""

from __future__ import annotations

from ..errors import UsageError
from ..schemas import ChangePoints, StageKind, StageSpec, WorkflowSpec

PRESET_PREFIX = "preset:"

# cellular workflows: "Distance <= threshold = 1 km"
CELLULAR_CP = ChangePoints(duration_min_threshold=5.0, distance_km_threshold=1.0, osc_window_min=5.0)
GPS_CP = ChangePoints(duration_min_threshold=5.0, distance_km_threshold=0.2, osc_window_min=5.0)


def _stage(kind: StageKind, cp: ChangePoints, target: str = "auto") -> StageSpec:
    return StageSpec(kind=kind, change_points=cp, target=target)


def workflow1() -> WorkflowSpec:
    return WorkflowSpec(
        name="workflow1",
        input="cellular",
        stages=[
            _stage(StageKind.INCREMENTAL, CELLULAR_CP, "records"),
            _stage(StageKind.STAY_DURATION, CELLULAR_CP),
        ],
    )


def workflow2() -> WorkflowSpec:
    """Oscillation corrected after clustering."""
    return WorkflowSpec(
        name="workflow2",
        input="cellular",
        stages=[
            _stage(StageKind.INCREMENTAL, CELLULAR_CP, "records"),
            _stage(StageKind.STAY_DURATION, CELLULAR_CP),
            _stage(StageKind.OSC_CORRECTOR, CELLULAR_CP, "stays"),
            _stage(StageKind.STAY_DURATION, CELLULAR_CP),
        ],
    )


def workflow3() -> WorkflowSpec:
    """Oscillation corrected on raw records before clustering."""
    return WorkflowSpec(
        name="workflow3",
        input="cellular",
        stages=[
            _stage(StageKind.OSC_CORRECTOR, CELLULAR_CP, "records"),
            _stage(StageKind.INCREMENTAL, CELLULAR_CP, "records"),
            _stage(StageKind.STAY_DURATION, CELLULAR_CP),
        ],
    )


def workflow4() -> WorkflowSpec:
    return WorkflowSpec(
        name="workflow4",
        input="gps",
        stages=[
            _stage(StageKind.INCREMENTAL, GPS_CP, "records"),
            _stage(StageKind.STAY_DURATION, GPS_CP),
        ],
    )


def workflow5() -> WorkflowSpec:
    return WorkflowSpec(
        name="workflow5",
        input="gps",
        stages=[
            _stage(StageKind.TRACE_SEG, GPS_CP),
            _stage(StageKind.STAY_DURATION, GPS_CP),
        ],
    )


def workflow6() -> WorkflowSpec:
    return WorkflowSpec(
        name="workflow6",
        input="gps",
        stages=[
            _stage(StageKind.TRACE_SEG, GPS_CP),
            _stage(StageKind.INCREMENTAL, GPS_CP, "stays"),
            _stage(StageKind.STAY_DURATION, GPS_CP),
        ],
    )


def integrated() -> WorkflowSpec:
    """GPS stays from workflow 6 and cellular stays from workflow 2, fused."""
    integrator = StageSpec(
        kind=StageKind.STAY_INTEGRATOR,
        change_points=GPS_CP,
        gps=workflow6().stages,
        cellular=workflow2().stages,
    )
    return WorkflowSpec(name="integrated", input="both", stages=[integrator])


PRESETS = {
    "workflow1": workflow1,
    "workflow2": workflow2,
    "workflow3": workflow3,
    "workflow4": workflow4,
    "workflow5": workflow5,
    "workflow6": workflow6,
    "integrated": integrated,
}


def get_preset(name: str) -> WorkflowSpec:
    key = name[len(PRESET_PREFIX):] if name.startswith(PRESET_PREFIX) else name
    try:
        return PRESETS[key]()
    except KeyError:
        raise UsageError(f"unknown preset '{key}'; choose from {', '.join(PRESETS)}")

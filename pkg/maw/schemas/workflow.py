from __future__ import annotations

from enum import Enum
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from .change_points import ChangePoints


class StageKind(str, Enum):
    TRACE_SEG = "TRACE_SEG"
    INCREMENTAL = "INCREMENTAL"
    STAY_DURATION = "STAY_DURATION"
    OSC_CORRECTOR = "OSC_CORRECTOR"
    STAY_INTEGRATOR = "STAY_INTEGRATOR"


# change points each kind reads; anything else in ChangePoints is ignored by it
REQUIRED_CHANGE_POINTS = {
    StageKind.TRACE_SEG: ("distance_km_threshold", "duration_min_threshold"),
    StageKind.INCREMENTAL: ("distance_km_threshold", "duration_min_threshold"),
    StageKind.STAY_DURATION: ("duration_min_threshold",),
    StageKind.OSC_CORRECTOR: ("osc_window_min",),
    StageKind.STAY_INTEGRATOR: ("duration_min_threshold", "osc_window_min"),
}

Target = Literal["records", "stays", "auto"]
InputStream = Literal["gps", "cellular", "both", "all"]


class IntegratorRules(BaseModel):
    model_config = ConfigDict(frozen=True)

    merge_contained: bool = True
    drop_contained: bool = True
    merge_intersecting: bool = True
    split_intersecting: bool = True


class StageSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: StageKind
    change_points: ChangePoints = Field(default_factory=ChangePoints)
    # INCREMENTAL: records|stays, OSC_CORRECTOR: records|stays|auto
    target: Target = "auto"
    per_day: bool = False
    gps: Optional[List[StageSpec]] = None
    cellular: Optional[List[StageSpec]] = None
    rules: IntegratorRules = Field(default_factory=IntegratorRules)

    @property
    def label(self) -> str:
        if self.kind in (StageKind.INCREMENTAL, StageKind.OSC_CORRECTOR) and self.target != "auto":
            return f"{self.kind.value}({self.target})"
        return self.kind.value


class WorkflowSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    stages: List[StageSpec]
    input: InputStream = "gps"

    def with_change_points(self, **updates) -> WorkflowSpec:
        """Copy with the given change points forced on every stage, branches included."""

        def rewrite(stages):
            out = []
            for stage in stages:
                values = stage.change_points.model_dump()
                values.update({k: v for k, v in updates.items() if v is not None})
                patch = {"change_points": ChangePoints(**values)}
                if stage.gps is not None:
                    patch["gps"] = rewrite(stage.gps)
                if stage.cellular is not None:
                    patch["cellular"] = rewrite(stage.cellular)
                out.append(stage.model_copy(update=patch))
            return out

        return self.model_copy(update={"stages": rewrite(self.stages)})

    def renamed(self, name: str) -> WorkflowSpec:
        return self.model_copy(update={"name": name})


class Diagnostic(BaseModel):
    code: str
    severity: Literal["error", "warning"]
    stage_index: Optional[int] = None
    message: str


class ValidationReport(BaseModel):
    diagnostics: List[Diagnostic] = []

    @property
    def ok(self) -> bool:
        return not self.errors

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "warning"]


StageSpec.model_rebuild()

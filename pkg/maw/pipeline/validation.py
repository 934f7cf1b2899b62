"""Stage-order type rules for workflows.

Errors:
    E001  stage needs stays but no upstream stage produces them
    E002  STAY_INTEGRATOR not fed by exactly two stay streams
    E004  workflow has no stages
    E005  input stream does not fit the workflow shape

Warnings:
    W101  OSC_CORRECTOR runs first, on raw records
    W102  TRACE_SEG on the cellular stream
    W103  a stage re-derives stays from records, discarding upstream stays
    W104  the same stage twice in a row
    W105  change points outside the documented ranges (override set)
"""

from __future__ import annotations

from typing import Optional, Sequence

from loguru import logger

from ..errors import WorkflowValidationError
from ..schemas import Diagnostic, StageKind, StageSpec, ValidationReport, WorkflowSpec


def resolve_targets(stages: Sequence[StageSpec]) -> list[Optional[str]]:
    """Concrete ``records``/``stays`` target per stage; None for kinds without one.

    ``auto`` means stays when an upstream stage produced them, else records.
    """
    targets: list[Optional[str]] = []
    has_stays = False
    for stage in stages:
        target = None
        if stage.kind in (StageKind.INCREMENTAL, StageKind.OSC_CORRECTOR):
            target = stage.target if stage.target != "auto" else ("stays" if has_stays else "records")
        targets.append(target)
        has_stays = has_stays or produces_stays([stage])
    return targets


def produces_stays(stages: Sequence[StageSpec]) -> bool:
    return any(s.kind in (StageKind.TRACE_SEG, StageKind.INCREMENTAL, StageKind.STAY_INTEGRATOR) for s in stages)


class _Checker:
    def __init__(self):
        self.diagnostics: list[Diagnostic] = []

    def error(self, code: str, index: Optional[int], message: str):
        self.diagnostics.append(Diagnostic(code=code, severity="error", stage_index=index, message=message))

    def warn(self, code: str, index: Optional[int], message: str):
        self.diagnostics.append(Diagnostic(code=code, severity="warning", stage_index=index, message=message))

    def linear(self, stages: Sequence[StageSpec], stream: str, where: str = "", owner: Optional[int] = None):
        has_stays = False
        previous = None
        for pos, (stage, target) in enumerate(zip(stages, resolve_targets(stages))):
            index = owner if owner is not None else pos
            label = f"{where}stage {pos} ({stage.label})"

            if stage.kind == StageKind.STAY_INTEGRATOR:
                if owner is not None:
                    self.error("E002", index, f"{label}: STAY_INTEGRATOR cannot be nested in a branch")
                elif pos != 0:
                    self.error("E002", index, f"{label}: STAY_INTEGRATOR must be the first stage")
                else:
                    self.integrator(stage, stream, index)
            elif stage.kind == StageKind.TRACE_SEG:
                if has_stays:
                    self.warn("W103", index, f"{label}: re-segments records and discards upstream stays")
                if stream == "cellular":
                    self.warn("W102", index, f"{label}: trace segmentation on cellular records")
            elif stage.kind == StageKind.INCREMENTAL:
                if target == "stays" and not has_stays:
                    self.error("E001", index, f"{label}: clustering stays needs an upstream stay producer")
                elif target == "records" and has_stays:
                    self.warn("W103", index, f"{label}: re-clusters records and discards upstream stays")
            elif stage.kind == StageKind.STAY_DURATION:
                if not has_stays:
                    self.error("E001", index, f"{label}: no upstream stay producer")
            elif stage.kind == StageKind.OSC_CORRECTOR:
                if target == "stays" and not has_stays:
                    self.error("E001", index, f"{label}: correcting stays needs an upstream stay producer")
                if pos == 0:
                    self.warn("W101", index, f"{label}: oscillation corrected before any clustering")

            if previous is not None and stage == previous:
                self.warn("W104", index, f"{label}: same stage as the one before it")
            outside = stage.change_points.out_of_range
            if outside:
                self.warn("W105", index, f"{label}: {', '.join(outside)} outside documented ranges")

            has_stays = has_stays or produces_stays([stage])
            previous = stage

    def integrator(self, stage: StageSpec, stream: str, index: int):
        if stream != "both":
            self.error("E002", index, f"STAY_INTEGRATOR needs input 'both', got '{stream}'")
        for name in ("gps", "cellular"):
            branch = getattr(stage, name)
            if not branch:
                self.error("E002", index, f"STAY_INTEGRATOR has no {name} stay stream")
                continue
            if not produces_stays(branch):
                self.error("E002", index, f"{name} branch produces no stays")
            self.linear(branch, name, where=f"{name} branch ", owner=index)


def validate_workflow(spec: WorkflowSpec) -> ValidationReport:
    checker = _Checker()
    if not spec.stages:
        checker.error("E004", None, "workflow has no stages")
        return ValidationReport(diagnostics=checker.diagnostics)

    starts_with_integrator = spec.stages[0].kind == StageKind.STAY_INTEGRATOR
    if spec.input == "both" and not starts_with_integrator:
        checker.error("E005", None, "input 'both' needs STAY_INTEGRATOR as the first stage")
    checker.linear(spec.stages, spec.input)
    return ValidationReport(diagnostics=checker.diagnostics)


def ensure_valid(spec: WorkflowSpec) -> ValidationReport:
    """Validate, log warnings and raise on errors."""
    report = validate_workflow(spec)
    for diagnostic in report.warnings:
        logger.warning(f"{spec.name}: {diagnostic.code} {diagnostic.message}")
    if not report.ok:
        for diagnostic in report.errors:
            logger.error(f"{spec.name}: {diagnostic.code} {diagnostic.message}")
        raise WorkflowValidationError(report.errors)
    return report

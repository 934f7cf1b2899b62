"""Side-by-side workflow comparison on a shared user cohort."""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

from loguru import logger

from ..config import get_settings
from ..errors import EmptyCohort, UsageError
from ..metrics import aggregate_metrics, users_with_stays
from ..schemas import ComparisonReport, ComparisonRow, StageKind, WorkflowSpec
from .engine import Corpus, WorkflowResult, execute_workflow

SWEEP_DISTANCES_KM = (0.05, 0.2, 0.5)
SWEEP_DURATIONS_MIN = (0.5, 5.0, 30.0)
OSC_WINDOWS_MIN = (1 / 6, 5.0, 11.0)


def shared_cohort(results: Iterable[WorkflowResult]) -> set[str]:
    """Users with at least one stay under every compared workflow."""
    cohort: Optional[set[str]] = None
    for result in results:
        users = users_with_stays(result.stays)
        cohort = users if cohort is None else cohort & users
    return cohort or set()


def compare_workflows(
    specs: Sequence[WorkflowSpec],
    corpus: Corpus,
    workers: Optional[int] = None,
    utc_offset_min: Optional[int] = None,
    accuracy_split_m: Optional[float] = None,
) -> tuple[ComparisonReport, list[WorkflowResult]]:
    if len(specs) < 2:
        raise UsageError(f"comparison needs at least 2 workflows, got {len(specs)}")

    results = [
        execute_workflow(spec, corpus, workers=workers, utc_offset_min=utc_offset_min, accuracy_split_m=accuracy_split_m)
        for spec in specs
    ]
    cohort = shared_cohort(results)
    if not cohort:
        raise EmptyCohort("no user has a stay under every compared workflow")
    logger.info(f"comparing {len(specs)} workflow(s) on a cohort of {len(cohort)} user(s)")

    offset = get_settings().utc_offset_min if utc_offset_min is None else utc_offset_min
    rows = []
    for result in results:
        metrics = aggregate_metrics(result.stays, cohort=cohort, utc_offset_min=offset)
        rows.append(ComparisonRow(
            name=result.workflow,
            metrics=metrics,
            stays=sum(len(result.stays[user]) for user in cohort),
            profile=result.profile,
        ))
    return ComparisonReport(cohort_size=len(cohort), rows=rows), results


def _has_oscillation(spec: WorkflowSpec) -> bool:
    # the integrator tail always corrects oscillations
    return any(s.kind in (StageKind.OSC_CORRECTOR, StageKind.STAY_INTEGRATOR) for s in spec.stages)


def expand_osc_windows(specs: Sequence[WorkflowSpec], windows_min: Sequence[float] = OSC_WINDOWS_MIN) -> list[WorkflowSpec]:
    """One variant per time window for every spec that corrects oscillations."""
    expanded = []
    for spec in specs:
        if not _has_oscillation(spec):
            expanded.append(spec)
            continue
        for window in windows_min:
            variant = spec.with_change_points(osc_window_min=window)
            expanded.append(variant.renamed(f"{spec.name}@w={window:g}"))
    return expanded


def sweep_variants(
    spec: WorkflowSpec,
    distances_km: Sequence[float] = SWEEP_DISTANCES_KM,
    durations_min: Sequence[float] = SWEEP_DURATIONS_MIN,
) -> list[WorkflowSpec]:
    return [
        spec.with_change_points(distance_km_threshold=d, duration_min_threshold=t).renamed(f"{spec.name}@d={d:g},t={t:g}")
        for d in distances_km
        for t in durations_min
    ]


def sweep_change_points(
    spec: WorkflowSpec,
    corpus: Corpus,
    distances_km: Sequence[float] = SWEEP_DISTANCES_KM,
    durations_min: Sequence[float] = SWEEP_DURATIONS_MIN,
    workers: Optional[int] = None,
    utc_offset_min: Optional[int] = None,
) -> tuple[ComparisonReport, list[WorkflowResult]]:
    """Run one workflow across the distance x duration grid on a shared cohort."""
    variants = sweep_variants(spec, distances_km, durations_min)
    return compare_workflows(variants, corpus, workers=workers, utc_offset_min=utc_offset_min)

"""Per-user stage adapters: how each stage kind reads and rewrites one user's state."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

from ..errors import StageError
from ..models import (
    LabeledRecord,
    LocationRecord,
    Stay,
    StaySource,
    check_sorted,
    local_day,
    split_days,
)
from ..schemas import StageKind, StageSpec
from ..stages.integrator import integrate_stays
from ..stages.oscillation import correct_oscillations, correct_oscillations_detailed
from ..stages.stay_detection import (
    collect_stays,
    incremental_cluster_records,
    incremental_cluster_stays,
    kmeans_refine,
    label_cluster_runs,
    stay_duration_filter,
    stays_by_index,
    trace_segmentation,
)
from .validation import resolve_targets


@dataclass(frozen=True)
class StageContext:
    utc_offset_min: int = 0
    accuracy_split_m: float = 100.0


@dataclass
class UserState:
    """One user's data between stages.

    ``records`` and ``labeled`` are parallel and time-sorted; ``labeled`` stays None
    until a stage produces stays. ``stays`` is derived from ``labeled`` except after
    the Stay Integrator, whose stay intervals are kept as computed.
    """

    device_id: str
    records: list[LocationRecord]
    labeled: Optional[list[LabeledRecord]] = None
    stays: Optional[list[Stay]] = None

    @property
    def labeled_or_transient(self) -> list[LabeledRecord]:
        if self.labeled is not None:
            return self.labeled
        return [LabeledRecord(record) for record in self.records]


def stay_sources(labeled: Sequence[LabeledRecord], accuracy_split_m: float) -> dict[int, StaySource]:
    """A stay is cellular when every member record is at or above the accuracy split."""
    cellular: dict[int, bool] = {}
    for item in labeled:
        if not item.is_transient:
            is_cell = item.record.accuracy >= accuracy_split_m
            cellular[item.stay_index] = cellular.get(item.stay_index, True) and is_cell
    return {index: StaySource.CELLULAR if flag else StaySource.GPS for index, flag in cellular.items()}


def _with_labels(state: UserState, labeled: list[LabeledRecord], ctx: StageContext) -> UserState:
    stays = collect_stays(labeled, stay_sources(labeled, ctx.accuracy_split_m))
    return replace(state, labeled=labeled, stays=stays)


def _next_index(labeled: Sequence[LabeledRecord], default: int) -> int:
    return max((item.stay_index + 1 for item in labeled if not item.is_transient), default=default)


def run_trace_segmentation(stage: StageSpec, state: UserState, ctx: StageContext) -> UserState:
    labeled: list[LabeledRecord] = []
    offset = 0
    for day in split_days(state.device_id, state.records, ctx.utc_offset_min):
        for item in trace_segmentation(day, stage.change_points):
            labeled.append(item if item.is_transient else replace(item, stay_index=item.stay_index + offset))
        offset = _next_index(labeled, offset)
    return _with_labels(state, labeled, ctx)


def run_incremental_records(stage: StageSpec, state: UserState, ctx: StageContext) -> UserState:
    if stage.per_day:
        groups = [list(day.records) for day in split_days(state.device_id, state.records, ctx.utc_offset_min)]
    else:
        groups = [state.records] if state.records else []
    labeled: list[LabeledRecord] = []
    for group in groups:
        assignment = kmeans_refine(incremental_cluster_records(group, stage.change_points))
        labeled.extend(label_cluster_runs(group, assignment, first_index=_next_index(labeled, 0)))
    return _with_labels(state, labeled, ctx)


def run_incremental_stays(stage: StageSpec, state: UserState, ctx: StageContext) -> UserState:
    labeled = state.labeled_or_transient
    by_index = stays_by_index(labeled, StaySource.GPS)
    ordered = sorted(by_index.items(), key=lambda pair: (pair[1].start, pair[1].end))
    kept = [(index, stay) for index, stay in ordered if stay.duration_s >= stage.change_points.duration_s]
    relabeled = incremental_cluster_stays([stay for _, stay in kept], stage.change_points)
    location = {index: stay.centroid for (index, _), stay in zip(kept, relabeled)}

    out = []
    for item in labeled:
        if item.is_transient:
            out.append(item)
        elif item.stay_index in location:
            lat, lon = location[item.stay_index]
            out.append(item.labeled(lat, lon, item.stay_duration_min, item.stay_index))
        else:
            out.append(item.transient())
    return _with_labels(state, out, ctx)


def run_stay_duration(stage: StageSpec, state: UserState, ctx: StageContext) -> UserState:
    return _with_labels(state, stay_duration_filter(state.labeled_or_transient, stage.change_points), ctx)


def run_oscillation_records(stage: StageSpec, state: UserState, ctx: StageContext) -> UserState:
    records = correct_oscillations(state.records, stage.change_points.osc_window_min, ctx.utc_offset_min)
    if state.labeled is None:
        return replace(state, records=records)
    labeled = [replace(item, record=record) for item, record in zip(state.labeled, records)]
    return replace(_with_labels(state, labeled, ctx), records=records)


def run_oscillation_stays(stage: StageSpec, state: UserState, ctx: StageContext) -> UserState:
    """Correct stay locations, then merge consecutive same-day stays that end up at
    one location when at least one of them was moved."""
    labeled = state.labeled_or_transient
    ordered = sorted(stays_by_index(labeled, StaySource.GPS).items(), key=lambda pair: (pair[1].start, pair[1].end))
    if not ordered:
        return _with_labels(state, list(labeled), ctx)
    indices = [index for index, _ in ordered]
    corrected, moved = correct_oscillations_detailed(
        [stay for _, stay in ordered], stage.change_points.osc_window_min, ctx.utc_offset_min
    )

    groups: list[list[int]] = []
    for pos, stay in enumerate(corrected):
        if groups:
            prev = corrected[groups[-1][-1]]
            same_day = local_day(prev.start, ctx.utc_offset_min) == local_day(stay.start, ctx.utc_offset_min)
            if same_day and prev.centroid == stay.centroid:
                groups[-1].append(pos)
                continue
        groups.append([pos])

    # stay index -> (new index, lat, lon, duration or None to keep)
    target: dict[int, tuple[int, float, float, Optional[float]]] = {}
    for group in groups:
        if len(group) > 1 and any(moved[pos] for pos in group):
            head = corrected[group[0]]
            duration = (corrected[group[-1]].end - head.start) / 60.0
            for pos in group:
                target[indices[pos]] = (indices[group[0]], head.centroid_lat, head.centroid_lon, duration)
        else:
            for pos in group:
                stay = corrected[pos]
                target[indices[pos]] = (indices[pos], stay.centroid_lat, stay.centroid_lon, None)

    out = []
    for item in labeled:
        if item.is_transient:
            out.append(item)
            continue
        index, lat, lon, duration = target[item.stay_index]
        out.append(item.labeled(lat, lon, item.stay_duration_min if duration is None else duration, index))
    return _with_labels(state, out, ctx)


def relabel_by_stays(records: Sequence[LocationRecord], stays: Sequence[Stay]) -> list[LabeledRecord]:
    """Label each record with the first stay whose closed interval contains it."""
    ordered = sorted(stays, key=lambda s: (s.start, s.end))
    out = []
    pos = 0
    for record in records:
        while pos < len(ordered) and ordered[pos].end < record.timestamp:
            pos += 1
        if pos < len(ordered) and ordered[pos].start <= record.timestamp:
            stay = ordered[pos]
            out.append(LabeledRecord(record, stay.centroid_lat, stay.centroid_lon, stay.duration_min, pos))
        else:
            out.append(LabeledRecord(record))
    return out


def run_integrator(stage: StageSpec, state: UserState, ctx: StageContext) -> UserState:
    gps = UserState(state.device_id, [r for r in state.records if r.accuracy < ctx.accuracy_split_m])
    cellular = UserState(state.device_id, [r for r in state.records if r.accuracy >= ctx.accuracy_split_m])
    gps = run_stages(stage.gps or [], gps, ctx)
    cellular = run_stages(stage.cellular or [], cellular, ctx)
    stays = integrate_stays(
        gps.stays or [], cellular.stays or [], stage.change_points, stage.rules, ctx.utc_offset_min
    )
    records = sorted(gps.records + cellular.records, key=lambda r: (r.timestamp, r.accuracy))
    return UserState(state.device_id, records, relabel_by_stays(records, stays), stays)


def apply_stage(stage: StageSpec, target: Optional[str], state: UserState, ctx: StageContext) -> UserState:
    if stage.kind == StageKind.TRACE_SEG:
        return run_trace_segmentation(stage, state, ctx)
    if stage.kind == StageKind.INCREMENTAL:
        if target == "stays":
            return run_incremental_stays(stage, state, ctx)
        return run_incremental_records(stage, state, ctx)
    if stage.kind == StageKind.STAY_DURATION:
        return run_stay_duration(stage, state, ctx)
    if stage.kind == StageKind.OSC_CORRECTOR:
        if target == "stays":
            return run_oscillation_stays(stage, state, ctx)
        return run_oscillation_records(stage, state, ctx)
    return run_integrator(stage, state, ctx)


def run_stages(stages: Sequence[StageSpec], state: UserState, ctx: StageContext) -> UserState:
    for stage, target in zip(stages, resolve_targets(stages)):
        state = apply_stage(stage, target, state, ctx)
    return state


def check_state(state: UserState) -> None:
    """Runtime contract between stages; raises ValueError on a violation."""
    check_sorted(state.records)
    if state.labeled is not None:
        if len(state.labeled) != len(state.records):
            raise ValueError(f"{len(state.labeled)} labels for {len(state.records)} records")
        check_sorted(state.labeled)
    previous = None
    for stay in state.stays or []:
        if stay.device_id != state.device_id:
            raise ValueError(f"stay of device '{stay.device_id}' in the wrong partition")
        if previous is not None and stay.start < previous.end:
            raise ValueError(f"stays overlap at {stay.start} (previous ends {previous.end})")
        previous = stay


def tag_failure(exc: Exception, state: UserState, index: int, stage: StageSpec) -> StageError:
    detail = getattr(exc, "detail", None) or str(exc) or type(exc).__name__
    return StageError(detail, state.device_id, index, stage.label)

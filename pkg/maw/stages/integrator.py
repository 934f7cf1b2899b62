"""Stay Integrator: folds higher-uncertainty (cellular) stays into GPS stays and
then runs the fixed tail Oscillation Corrector -> Stay Duration Calculator ->
Incremental Clustering (stays) -> Stay Duration Calculator.

Pinned rule table, cellular stay c against GPS stay g:

    c inside g,  contiguous       merge: c absorbed, g keeps its location
    c inside g,  not contiguous   c dropped
    intersecting, contiguous      merge: g stretched to the union of both intervals
    intersecting, not contiguous  split: c cut to the part outside g, kept if long enough
    separate                      both kept

A cellular stay inside one GPS stay follows the inside rules even when it touches
another at an endpoint. Otherwise one overlapping several GPS stays is cut at
every GPS interval; each free piece joins the GPS stay before it if that one is
contiguous, else the one after it if contiguous, else stays a truncated cellular
stay.
"""

from __future__ import annotations

from dataclasses import replace
from enum import Enum
from typing import Sequence

from loguru import logger

from ..errors import DeviceMismatch
from ..geo import haversine_km
from ..models import Stay, StaySource, check_sorted
from ..schemas import INTEGRATOR_DISTANCE_KM, ChangePoints, IntegratorRules
from .oscillation import correct_oscillations
from .stay_detection import incremental_cluster_stays


class TemporalKind(str, Enum):
    SEPARATE = "SEPARATE"
    CONTAINED = "CONTAINED"
    INTERSECTING = "INTERSECTING"


class TemporalRelation:
    """Interval relation of (a, b). For CONTAINED, ``container`` says which side holds the other."""

    __slots__ = ("kind", "container")

    def __init__(self, kind: TemporalKind, container: str | None = None):
        self.kind = kind
        self.container = container

    def __eq__(self, other):
        return isinstance(other, TemporalRelation) and (self.kind, self.container) == (other.kind, other.container)

    def __repr__(self):
        suffix = f", container={self.container!r}" if self.container else ""
        return f"TemporalRelation({self.kind.value}{suffix})"


class SpatialRelation(str, Enum):
    CONTIGUOUS = "CONTIGUOUS"
    NOT_CONTIGUOUS = "NOT_CONTIGUOUS"


def classify_temporal(a: Stay, b: Stay) -> TemporalRelation:
    if a.end < b.start or b.end < a.start:
        return TemporalRelation(TemporalKind.SEPARATE)
    if a.start <= b.start and b.end <= a.end:
        return TemporalRelation(TemporalKind.CONTAINED, "a")
    if b.start <= a.start and a.end <= b.end:
        return TemporalRelation(TemporalKind.CONTAINED, "b")
    return TemporalRelation(TemporalKind.INTERSECTING)


def classify_spatial(a: Stay, b: Stay, threshold_km: float = INTEGRATOR_DISTANCE_KM) -> SpatialRelation:
    if haversine_km(a.centroid, b.centroid) <= threshold_km:
        return SpatialRelation.CONTIGUOUS
    return SpatialRelation.NOT_CONTIGUOUS


def _check_device(stays: Sequence[Stay]) -> str | None:
    devices = {s.device_id for s in stays}
    if len(devices) > 1:
        raise DeviceMismatch(f"stays from several devices passed together: {sorted(devices)}")
    return next(iter(devices), None)


def _free_pieces(c: Stay, covers: Sequence[Stay]) -> list[tuple[int, int, int, int]]:
    """Parts of c outside every GPS interval in ``covers`` (sorted by start).

    Each piece is (start, end, index of GPS stay before it or -1, index after it or -1).
    """
    pieces = []
    cursor = c.start
    before = -1
    for pos, g in enumerate(covers):
        if g.start > cursor:
            pieces.append((cursor, min(g.start, c.end), before, pos))
        cursor = max(cursor, g.end)
        before = pos
        if cursor >= c.end:
            break
    if cursor < c.end:
        pieces.append((cursor, c.end, before, -1))
    return pieces


def merge_cellular(
    gps: Sequence[Stay],
    cellular: Sequence[Stay],
    cp: ChangePoints,
    rules: IntegratorRules | None = None,
) -> list[Stay]:
    """Apply the rule table; returns the combined stays sorted by start."""
    rules = rules or IntegratorRules()
    current = sorted(gps, key=lambda s: (s.start, s.end))
    kept_cellular: list[Stay] = []
    stats = {"separate": 0, "absorbed": 0, "dropped": 0, "merged": 0, "split": 0}

    for c in sorted(cellular, key=lambda s: (s.start, s.end)):
        overlapping = [pos for pos, g in enumerate(current) if classify_temporal(g, c).kind != TemporalKind.SEPARATE]
        if not overlapping:
            kept_cellular.append(c)
            stats["separate"] += 1
            continue

        # containment in one GPS stay wins over endpoint contact with its neighbours
        holder = next((pos for pos in overlapping if classify_temporal(current[pos], c).container == "a"), None)
        if holder is not None:
            g = current[holder]
            contiguous = classify_spatial(g, c) == SpatialRelation.CONTIGUOUS
            if contiguous and rules.merge_contained:
                current[holder] = replace(g, record_count=g.record_count + c.record_count, source=StaySource.MERGED)
                stats["absorbed"] += 1
            elif not contiguous and rules.drop_contained:
                stats["dropped"] += 1
            else:
                kept_cellular.append(c)
            continue

        covers = [current[pos] for pos in overlapping]
        contiguous = [classify_spatial(g, c) == SpatialRelation.CONTIGUOUS for g in covers]
        gained = [0] * len(covers)
        span = max(c.end - c.start, 1)
        for start, end, before, after in _free_pieces(c, covers):
            if before >= 0 and contiguous[before] and rules.merge_intersecting:
                g = covers[before]
                covers[before] = replace(g, end=max(g.end, end))
                gained[before] += 1
            elif after >= 0 and contiguous[after] and rules.merge_intersecting:
                g = covers[after]
                covers[after] = replace(g, start=min(g.start, start))
                gained[after] += 1
            elif rules.split_intersecting:
                if end - start >= cp.duration_s:
                    share = max(1, round(c.record_count * (end - start) / span))
                    kept_cellular.append(replace(c, start=start, end=end, record_count=share))
                stats["split"] += 1
            else:
                kept_cellular.append(replace(c, start=start, end=end))

        # the covered parts of c fold into contiguous GPS stays; records go to the first of them
        absorber = next((pos for pos, flag in enumerate(contiguous) if flag), None)
        if absorber is not None and rules.merge_intersecting:
            gained[absorber] += 1
        for pos, g in enumerate(covers):
            if gained[pos]:
                extra = c.record_count if pos == absorber else 0
                covers[pos] = replace(g, record_count=g.record_count + extra, source=StaySource.MERGED)
                stats["merged"] += 1
            current[overlapping[pos]] = covers[pos]

    logger.debug(f"integration outcome: {stats}")
    combined = current + kept_cellular
    combined.sort(key=lambda s: (s.start, s.end))
    return combined


def integration_tail(stays: Sequence[Stay], cp: ChangePoints, utc_offset_min: int = 0) -> list[Stay]:
    """Oscillation Corrector -> Stay Duration Calculator -> Incremental Clustering
    (stays) -> Stay Duration Calculator, at 0.2 km."""
    tail_cp = ChangePoints(
        duration_min_threshold=cp.duration_min_threshold,
        distance_km_threshold=INTEGRATOR_DISTANCE_KM,
        osc_window_min=cp.osc_window_min,
        override=True,
    )
    ordered = sorted(stays, key=lambda s: (s.start, s.end))
    corrected = correct_oscillations(ordered, tail_cp.osc_window_min, utc_offset_min)
    filtered = [s for s in corrected if s.duration_s >= tail_cp.duration_s]
    clustered = incremental_cluster_stays(filtered, tail_cp)
    return [s for s in clustered if s.duration_s >= tail_cp.duration_s]


def integrate_stays(
    gps: Sequence[Stay],
    cellular: Sequence[Stay],
    cp: ChangePoints,
    rules: IntegratorRules | None = None,
    utc_offset_min: int = 0,
) -> list[Stay]:
    check_sorted(gps, key=lambda s: s.start)
    check_sorted(cellular, key=lambda s: s.start)
    _check_device(list(gps) + list(cellular))
    merged = merge_cellular(gps, cellular, cp, rules)
    return integration_tail(merged, cp, utc_offset_min)

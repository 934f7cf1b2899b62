"""Oscillation Corrector.

Finds short runs of stays or records that contain a circular event (X ... Y ... X)
and moves every item of such a run to the location where the user spends the
most time overall. Works on stays (post-processing) or raw records
(pre-processing).
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from math import pi
from typing import Hashable, Sequence, TypeVar

from loguru import logger

from ..geo import EARTH_RADIUS_KM
from ..models import LocationRecord, Stay, check_sorted, local_day

SNAP_M = 10.0
SNAP_DEG = (SNAP_M / 1000.0) / (EARTH_RADIUS_KM * pi / 180.0)
MIN_RUN = 3

Item = TypeVar("Item", Stay, LocationRecord)


@dataclass(frozen=True)
class OscillationWindow:
    indices: tuple[int, ...]
    circular_event_present: bool
    dwell_by_location: dict[Hashable, float] = field(default_factory=dict)


def location_key(item: Stay | LocationRecord) -> Hashable:
    if isinstance(item, Stay):
        return (item.centroid_lat, item.centroid_lon)
    return (round(item.lat / SNAP_DEG), round(item.lon / SNAP_DEG))


def _start(item: Stay | LocationRecord) -> int:
    return item.start if isinstance(item, Stay) else item.timestamp


def _coords(item: Stay | LocationRecord) -> tuple[float, float]:
    return item.centroid if isinstance(item, Stay) else item.point


def dwell_by_location(items: Sequence[Stay | LocationRecord], utc_offset_min: int = 0) -> dict[Hashable, float]:
    """Total seconds spent at each location across all days.

    Stays contribute their duration. A raw record contributes the gap to the next
    record of the same local day; the last record of a day contributes nothing.
    """
    dwell: dict[Hashable, float] = {}
    for pos, item in enumerate(items):
        key = location_key(item)
        if isinstance(item, Stay):
            seconds = float(item.duration_s)
        else:
            seconds = 0.0
            if pos + 1 < len(items):
                nxt = items[pos + 1]
                if local_day(nxt.timestamp, utc_offset_min) == local_day(item.timestamp, utc_offset_min):
                    seconds = float(nxt.timestamp - item.timestamp)
        dwell[key] = dwell.get(key, 0.0) + seconds
    return dwell


def has_circular_event(keys: Sequence[Hashable]) -> bool:
    """True when some location is left for another one and later revisited."""
    seen = set()
    previous = None
    for key in keys:
        if key != previous and key in seen:
            return True
        seen.add(key)
        previous = key
    return False


def _scan(keys: Sequence[Hashable], starts: Sequence[int], window_s: float) -> list[tuple[int, int]]:
    runs = []
    n = len(keys)
    i = 0
    while i < n:
        j = bisect_right(starts, starts[i] + window_s) - 1
        if j - i + 1 >= MIN_RUN and has_circular_event(keys[i:j + 1]):
            runs.append((i, j))
            i = j + 1
        else:
            i += 1
    return runs


def detect_oscillation_windows(
    items: Sequence[Stay | LocationRecord],
    window_min: float,
    utc_offset_min: int = 0,
) -> list[OscillationWindow]:
    check_sorted(items, key=_start)
    if not items:
        return []
    keys = [location_key(item) for item in items]
    starts = [_start(item) for item in items]
    dwell = dwell_by_location(items, utc_offset_min)
    windows = []
    for i, j in _scan(keys, starts, round(window_min * 60.0, 6)):
        present = {keys[k] for k in range(i, j + 1)}
        windows.append(OscillationWindow(tuple(range(i, j + 1)), True, {k: dwell[k] for k in present}))
    return windows


def correct_oscillations_detailed(
    items: Sequence[Item],
    window_min: float,
    utc_offset_min: int = 0,
) -> tuple[list[Item], list[bool]]:
    """Correct oscillations; also report which items were moved.

    Detection and rewriting repeat until no flagged window remains. The location
    ranking (dwell descending, earliest first observation on ties) is fixed from
    the input, so every rewrite moves an item to a strictly better ranked location
    and the loop terminates.
    """
    check_sorted(items, key=_start)
    if not items:
        return [], []

    keys = [location_key(item) for item in items]
    starts = [_start(item) for item in items]
    dwell = dwell_by_location(items, utc_offset_min)
    first_seen: dict[Hashable, int] = {}
    representative: dict[Hashable, tuple[float, float]] = {}
    for pos, (key, item) in enumerate(zip(keys, items)):
        if key not in first_seen:
            first_seen[key] = pos
            representative[key] = _coords(item)
    rank = {key: (-dwell[key], first_seen[key]) for key in first_seen}

    current = list(keys)
    window_s = round(window_min * 60.0, 6)
    passes = 0
    while True:
        runs = _scan(current, starts, window_s)
        if not runs:
            break
        passes += 1
        for i, j in runs:
            best = min({current[k] for k in range(i, j + 1)}, key=rank.__getitem__)
            for k in range(i, j + 1):
                current[k] = best
    if passes > 1:
        logger.debug(f"oscillation correction settled after {passes} passes")

    out: list[Item] = []
    moved: list[bool] = []
    for item, before, after in zip(items, keys, current):
        if before == after:
            out.append(item)
            moved.append(False)
            continue
        lat, lon = representative[after]
        out.append(item.relocated(lat, lon) if isinstance(item, Stay) else item.moved_to(lat, lon))
        moved.append(True)
    return out, moved


def correct_oscillations(items: Sequence[Item], window_min: float, utc_offset_min: int = 0) -> list[Item]:
    corrected, _ = correct_oscillations_detailed(items, window_min, utc_offset_min)
    return corrected

import numpy as np
import pytest

from maw.errors import UnsortedInput
from maw.stages.oscillation import (
    correct_oscillations,
    correct_oscillations_detailed,
    detect_oscillation_windows,
    dwell_by_location,
    has_circular_event,
    location_key,
)
from maw.tests.conftest import make_record, make_stay

A = (0.0, 0.0)
B = (0.0, 0.02)
C = (0.0, 0.04)


def stays_at(*spans):
    return [make_stay(start, end, *where) for where, start, end in spans]


def test_circular_event():
    assert has_circular_event(["a", "b", "a"])
    assert not has_circular_event(["a", "a", "b", "b"])
    assert not has_circular_event(["a", "b", "c"])


def test_detects_a_b_a_window():
    items = stays_at((A, 0, 300), (B, 310, 330), (A, 340, 640))
    windows = detect_oscillation_windows(items, window_min=11)
    assert len(windows) == 1
    assert windows[0].indices == (0, 1, 2)
    assert windows[0].circular_event_present
    assert windows[0].dwell_by_location == {A: 600.0, B: 20.0}


def test_distinct_locations_have_no_window():
    items = stays_at((A, 0, 300), (B, 310, 330), (C, 340, 640))
    assert detect_oscillation_windows(items, window_min=11) == []


def test_window_shorter_than_gaps():
    records = [make_record(t, *where) for t, where in zip((0, 60, 120), (A, B, A))]
    assert detect_oscillation_windows(records, window_min=1 / 6) == []


def test_detect_rejects_unsorted():
    with pytest.raises(UnsortedInput):
        detect_oscillation_windows(stays_at((A, 300, 400), (B, 0, 100)), window_min=5)


def test_correction_moves_short_visit_home():
    items = stays_at((A, 0, 300), (B, 310, 330), (A, 340, 640))
    corrected, moved = correct_oscillations_detailed(items, window_min=11)
    assert corrected[1].centroid == A
    assert (corrected[1].start, corrected[1].end) == (310, 330)
    assert moved == [False, True, False]


def test_dwell_tie_goes_to_first_observed():
    tie = stays_at((B, 0, 100), (A, 110, 310), (B, 320, 420))
    assert dwell_by_location(tie) == {A: 200.0, B: 200.0}
    corrected = correct_oscillations(tie, window_min=6)
    assert [s.centroid for s in corrected] == [B, B, B]


def test_no_window_is_identity():
    items = stays_at((A, 0, 300), (B, 400, 700))
    assert correct_oscillations(items, window_min=5) == items


def test_record_dwell_stops_at_day_end():
    records = [make_record(86400 - 60, *A), make_record(86400 + 60, *B), make_record(86400 + 120, *A)]
    dwell = dwell_by_location(records)
    assert dwell[location_key(records[0])] == 0.0
    assert dwell[location_key(records[1])] == 60.0


def test_records_within_snap_share_a_location():
    near = make_record(0, 0.0, 0.00001)
    assert location_key(near) == location_key(make_record(0, 0.0, 0.0))


def test_ping_pong_records_are_corrected():
    records = [make_record(t, *A) for t in range(0, 240, 60)]
    records.insert(2, make_record(65, *B))
    records.sort(key=lambda r: r.timestamp)
    corrected = correct_oscillations(records, window_min=5)
    assert {r.point for r in corrected} == {A}
    assert [r.timestamp for r in corrected] == [r.timestamp for r in records]


def _random_items(rng):
    places = [(0.0, 0.01 * k) for k in range(4)]
    n = int(rng.integers(1, 12))
    starts = np.cumsum(rng.integers(5, 400, size=n))
    items = []
    for start in starts:
        lat, lon = places[int(rng.integers(len(places)))]
        items.append(make_stay(int(start), int(start + rng.integers(0, 4)), lat, lon))
    return items


def test_correction_is_idempotent_and_conserving():
    rng = np.random.default_rng(11)
    for _ in range(500):
        items = _random_items(rng)
        window = float(rng.choice([1 / 6, 5.0, 11.0]))
        once = correct_oscillations(items, window)
        assert correct_oscillations(once, window) == once
        assert len(once) == len(items)
        assert [(s.start, s.end, s.record_count) for s in once] == [(s.start, s.end, s.record_count) for s in items]
        assert {s.centroid for s in once} <= {s.centroid for s in items}

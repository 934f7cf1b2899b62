import numpy as np
import pytest

from maw.errors import DeviceMismatch
from maw.models import StaySource
from maw.schemas import ChangePoints, IntegratorRules
from maw.stages.integrator import (
    SpatialRelation,
    TemporalKind,
    TemporalRelation,
    classify_spatial,
    classify_temporal,
    integrate_stays,
    integration_tail,
    merge_cellular,
)
from maw.tests.conftest import east_km, make_stay


def gps_stay(start=0, end=600, km=0.0, count=5):
    return make_stay(start, end, lon=east_km(km), count=count)


def cell_stay(start, end, km, count=3):
    return make_stay(start, end, lon=east_km(km), count=count, source=StaySource.CELLULAR)


def spans(stays):
    return [(s.start, s.end) for s in stays]


def test_classify_temporal():
    assert classify_temporal(make_stay(0, 10), make_stay(20, 30)).kind == TemporalKind.SEPARATE
    assert classify_temporal(make_stay(0, 10), make_stay(2, 8)) == TemporalRelation(TemporalKind.CONTAINED, "a")
    assert classify_temporal(make_stay(2, 8), make_stay(0, 10)) == TemporalRelation(TemporalKind.CONTAINED, "b")
    assert classify_temporal(make_stay(0, 10), make_stay(5, 15)).kind == TemporalKind.INTERSECTING


def test_touching_intervals_intersect():
    assert classify_temporal(make_stay(0, 10), make_stay(10, 20)).kind == TemporalKind.INTERSECTING


def test_classify_spatial():
    assert classify_spatial(gps_stay(), cell_stay(0, 1, 0.1)) == SpatialRelation.CONTIGUOUS
    assert classify_spatial(gps_stay(), cell_stay(0, 1, 0.3)) == SpatialRelation.NOT_CONTIGUOUS
    assert classify_spatial(gps_stay(), gps_stay()) == SpatialRelation.CONTIGUOUS


def test_contained_contiguous_is_absorbed():
    out = integrate_stays([gps_stay()], [cell_stay(300, 480, 0.05)], ChangePoints())
    assert spans(out) == [(0, 600)]
    assert out[0].centroid == (0.0, 0.0)
    assert out[0].source == StaySource.MERGED
    assert out[0].record_count == 8


def test_contained_far_is_dropped():
    out = integrate_stays([gps_stay()], [cell_stay(120, 480, 0.5)], ChangePoints())
    assert spans(out) == [(0, 600)]
    assert out[0].source == StaySource.GPS


def test_disabled_drop_keeps_both():
    rules = IntegratorRules(drop_contained=False)
    out = integrate_stays([gps_stay()], [cell_stay(120, 480, 0.5)], ChangePoints(), rules)
    assert spans(out) == [(0, 600), (120, 480)]


def test_separate_cellular_is_kept():
    cellular = cell_stay(1200, 1800, 1.0)
    out = integrate_stays([gps_stay()], [cellular], ChangePoints())
    assert out == [gps_stay(), cellular]


def test_intersecting_contiguous_extends_gps():
    out = integrate_stays([gps_stay()], [cell_stay(300, 900, 0.05)], ChangePoints())
    assert spans(out) == [(0, 900)]
    assert out[0].centroid == (0.0, 0.0)
    assert out[0].source == StaySource.MERGED


def test_intersecting_far_is_truncated():
    out = integrate_stays([gps_stay()], [cell_stay(300, 900, 0.5, count=6)], ChangePoints())
    assert spans(out) == [(0, 600), (600, 900)]
    assert out[1].source == StaySource.CELLULAR
    assert out[1].record_count == 3


def test_short_truncated_piece_is_dropped():
    cp = ChangePoints(duration_min_threshold=10)
    out = integrate_stays([gps_stay()], [cell_stay(300, 900, 0.5)], cp)
    assert spans(out) == [(0, 600)]


def test_piece_between_two_gps_stays_joins_contiguous_one():
    gps = [gps_stay(0, 600), gps_stay(1200, 1800, km=1.0)]
    merged = merge_cellular(gps, [cell_stay(300, 1500, 0.05)], ChangePoints())
    assert spans(merged) == [(0, 1200), (1200, 1800)]
    assert merged[0].source == StaySource.MERGED
    assert merged[1].source == StaySource.GPS


def test_disabled_merge_falls_through_to_split():
    rules = IntegratorRules(merge_intersecting=False)
    merged = merge_cellular([gps_stay()], [cell_stay(300, 900, 0.05)], ChangePoints(), rules)
    assert spans(merged) == [(0, 600), (600, 900)]


def test_mixed_devices_are_rejected():
    other = make_stay(1200, 1800, device="d2", source=StaySource.CELLULAR)
    with pytest.raises(DeviceMismatch):
        integrate_stays([gps_stay()], [other], ChangePoints())


def test_output_never_overlaps():
    gps = [gps_stay(0, 600), gps_stay(2000, 2600, km=2.0)]
    cellular = [cell_stay(500, 1100, 0.5), cell_stay(1500, 2100, 3.0), cell_stay(2500, 3400, 2.05)]
    out = integrate_stays(gps, cellular, ChangePoints())
    for a, b in zip(out, out[1:]):
        assert a.end <= b.start


def test_contained_far_stay_touching_a_neighbour_is_still_dropped():
    gps = [gps_stay(0, 600), gps_stay(600, 1200, km=0.5)]
    merged = merge_cellular(gps, [cell_stay(300, 600, 0.5)], ChangePoints())
    assert merged == gps


def test_contained_near_stay_touching_a_neighbour_joins_its_holder():
    gps = [gps_stay(0, 600), gps_stay(600, 1200, km=0.5)]
    merged = merge_cellular(gps, [cell_stay(300, 600, 0.05)], ChangePoints())
    assert spans(merged) == [(0, 600), (600, 1200)]
    assert [s.record_count for s in merged] == [8, 5]
    assert [s.source for s in merged] == [StaySource.MERGED, StaySource.GPS]


def _random_stays(rng, make, places=(0.0, 0.1, 0.5, 2.0)):
    out, cursor = [], int(rng.integers(0, 600))
    for _ in range(int(rng.integers(0, 5))):
        start = cursor + int(rng.integers(0, 900))
        end = start + int(rng.integers(60, 2400))
        out.append(make(start, end, float(rng.choice(places))))
        cursor = end + 1
    return out


def _union(stays):
    blocks = []
    for s in sorted(stays, key=lambda s: s.start):
        if blocks and s.start <= blocks[-1][1]:
            blocks[-1][1] = max(blocks[-1][1], s.end)
        else:
            blocks.append([s.start, s.end])
    return blocks


def test_without_cellular_only_the_tail_runs():
    rng = np.random.default_rng(4)
    cp = ChangePoints()
    for _ in range(200):
        gps = _random_stays(rng, lambda start, end, km: gps_stay(start, end, km))
        assert integrate_stays(gps, [], cp) == integration_tail(gps, cp)


def test_output_stays_within_input_intervals():
    rng = np.random.default_rng(6)
    cp = ChangePoints()
    for _ in range(500):
        gps = _random_stays(rng, lambda start, end, km: gps_stay(start, end, km))
        cellular = _random_stays(rng, cell_stay)
        blocks = _union(gps + cellular)
        for stay in integrate_stays(gps, cellular, cp):
            assert any(lo <= stay.start and stay.end <= hi for lo, hi in blocks), (stay, blocks)

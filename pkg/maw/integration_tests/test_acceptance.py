# maw/integration_tests/test_acceptance.py
"""End-to-end behaviour of the comparison workflows on constructed and synthetic data."""

import os
from math import pi

import pytest

from maw.config import get_settings
from maw.geo import EARTH_RADIUS_KM
from maw.integration_tests.conftest import comparison_rows, stay_intervals, stays_of, synthetic_records
from maw.io.synth import generate_synthetic
from maw.pipeline.presets import get_preset
from maw.pipeline.scaling import scaling_probe
from maw.schemas import SynthConfig

DEG_PER_KM = 180.0 / (pi * EARTH_RADIUS_KM)
MORNING = 1_699_948_800  # 2023-11-14 08:00 UTC
SLOW = pytest.mark.skipif(not os.getenv("MAW_SLOW_TESTS"), reason="set MAW_SLOW_TESTS=1 for full-size corpora")


def _row(t, north_km, east_km):
    return f"d1,{MORNING + t},{north_km * DEG_PER_KM!r},{east_km * DEG_PER_KM!r},250\n"


@pytest.fixture
def interrupted_dwells(tmp_path):
    """Two 8-minute cellular dwells, each broken mid-way by one ping from a tower
    2 km away, then a plain 20-minute dwell elsewhere."""
    rows = []
    for start, east, ping in ((0, 0.0, 245), (1200, 5.0, 1445)):
        rows += [_row(start + t, 0.0, east) for t in range(0, 481, 60)]
        rows.append(_row(ping, 2.0, east))
    rows += [_row(t, 0.0, 10.0) for t in range(2400, 3601, 60)]
    path = tmp_path / "records.csv"
    path.write_text("device_id,timestamp,lat,lon,accuracy_m\n" + "".join(rows))
    return path


def test_pings_split_dwells_unless_corrected_first(cli, interrupted_dwells, tmp_path):
    for preset in ("workflow1", "workflow3"):
        assert cli("run", "-w", f"preset:{preset}", "-i", interrupted_dwells, "-o", tmp_path / preset,
                   "--no-profile") == 0

    uncorrected = stays_of(tmp_path / "workflow1")["d1"]
    assert [(s.start - MORNING, s.end - MORNING) for s in uncorrected] == [(2400, 3600)]

    corrected = stays_of(tmp_path / "workflow3")["d1"]
    assert [(s.start - MORNING, s.end - MORNING) for s in corrected] == [(0, 480), (1200, 1680), (2400, 3600)]
    assert corrected[0].record_count == 10


@pytest.mark.parametrize("n_users, days", [(30, 2), pytest.param(100, 3, marks=SLOW)])
def test_trips_fall_as_duration_threshold_grows(cli, tmp_path, n_users, days):
    records = synthetic_records(
        tmp_path / "corpus", seed=100, n_users=n_users, days=days, gps_fraction=1.0, gps_noise_m=2.0
    )
    assert cli("compare", "-w", "preset:workflow5", "--sweep", "-i", records, "-o", tmp_path) == 0
    rows = comparison_rows(tmp_path)
    for distance in ("0.05", "0.2", "0.5"):
        trips = [
            rows[f"workflow5@d={distance},t={duration}"]["metrics"]["trips_per_person_day"]
            for duration in ("0.5", "5", "30")
        ]
        assert trips[0] >= trips[1] >= trips[2], distance


def test_post_correction_never_adds_trips(cli, cellular_records, tmp_path):
    assert cli("compare", "-w", "preset:workflow1", "preset:workflow2", "-i", cellular_records, "-o", tmp_path) == 0
    rows = comparison_rows(tmp_path)
    assert rows["workflow2"]["metrics"]["trips_per_person_day"] <= rows["workflow1"]["metrics"]["trips_per_person_day"]
    assert rows["workflow2"]["stays"] <= rows["workflow1"]["stays"]


@pytest.mark.parametrize("corpus", ["gps_records", "mixed_records"])
def test_stay_clustering_only_relabels(cli, request, tmp_path, corpus):
    records = request.getfixturevalue(corpus)
    for preset in ("workflow5", "workflow6"):
        assert cli("run", "-w", f"preset:{preset}", "-i", records, "-o", tmp_path / preset, "--no-profile") == 0
    intervals = stay_intervals(tmp_path / "workflow5")
    assert intervals
    assert stay_intervals(tmp_path / "workflow6") == intervals


def test_integrated_stays_never_overlap(cli, mixed_records, tmp_path, monkeypatch):
    monkeypatch.setenv("MAW_DEBUG_CHECKS", "1")
    get_settings.cache_clear()
    assert cli("run", "-w", "preset:integrated", "-i", mixed_records, "-o", tmp_path, "--no-profile") == 0
    stays = stays_of(tmp_path)
    assert stays
    for device_stays in stays.values():
        for earlier, later in zip(device_stays, device_stays[1:]):
            assert earlier.end <= later.start


@SLOW
@pytest.mark.parametrize("preset", ["workflow2", "integrated"])
def test_full_cohort_output_ignores_worker_count(cli, tmp_path, preset):
    records = synthetic_records(tmp_path / "corpus", seed=9, n_users=100, days=3, oscillation_rate=0.1)
    for workers in (1, 8):
        assert cli("run", "-w", f"preset:{preset}", "-i", records, "-o", tmp_path / str(workers), "-j", workers,
                   "--no-profile") == 0
    for name in ("labeled.csv", "stays.csv", "metrics.json", "histogram.csv"):
        assert (tmp_path / "8" / name).read_bytes() == (tmp_path / "1" / name).read_bytes(), name


@SLOW
def test_runtime_grows_linearly_with_input():
    base = generate_synthetic(SynthConfig(seed=0, n_users=20)).records
    report = scaling_probe(get_preset("workflow5"), [10_000_000, 20_000_000, 40_000_000], base)
    assert not report.degenerate
    assert report.r2 >= 0.95

# maw/tests/conftest.py
from math import pi

import pytest

from maw.config import get_settings
from maw.geo import EARTH_RADIUS_KM
from maw.models import LocationRecord, Stay, StaySource
from maw.schemas import ChangePoints

# degrees of longitude per km on the equator
DEG_PER_KM = 180.0 / (pi * EARTH_RADIUS_KM)


def make_record(t, lat=0.0, lon=0.0, accuracy=10.0, device="d1"):
    return LocationRecord(device, t, lat, lon, accuracy)


def make_stay(start, end, lat=0.0, lon=0.0, count=5, source=StaySource.GPS, device="d1"):
    return Stay(device, lat, lon, start, end, count, source)


def east_km(km):
    """Longitude on the equator ``km`` east of (0, 0)."""
    return km * DEG_PER_KM


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    for name in ("MAW_UTC_OFFSET_MIN", "MAW_ACCURACY_SPLIT_M", "MAW_WORKERS", "MAW_DEBUG_CHECKS", "MAW_PROGRESS"):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def cp():
    return ChangePoints(duration_min_threshold=5.0, distance_km_threshold=0.1, osc_window_min=5.0)


@pytest.fixture
def dwell_pair_records():
    """Two ten-minute dwells 1 km apart joined by a single in-transit record."""
    home = [make_record(t) for t in range(0, 601, 60)]
    transit = [make_record(900, lon=east_km(0.5))]
    work = [make_record(t, lon=east_km(1.0)) for t in range(1200, 1801, 60)]
    return home + transit + work

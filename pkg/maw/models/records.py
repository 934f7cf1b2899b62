"""Location records, their stay labels and per-day trajectories."""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import date, datetime, timedelta, timezone
from itertools import groupby

from ..errors import RangeError, UnsortedInput

TRANSIENT = -1


def local_day(timestamp: int, utc_offset_min: int = 0) -> date:
    """Calendar day of an epoch timestamp under a fixed UTC offset."""
    shifted = datetime.fromtimestamp(timestamp, tz=timezone.utc) + timedelta(minutes=utc_offset_min)
    return shifted.date()


def minutes_since_local_midnight(timestamp: int, utc_offset_min: int = 0) -> float:
    return ((timestamp + utc_offset_min * 60) % 86400) / 60.0


@dataclass(frozen=True, slots=True)
class LocationRecord:
    """One timestamped observation of one device.

    Attributes:
        device_id: Opaque device identifier.
        timestamp: UTC epoch seconds.
        lat: Latitude in decimal degrees (WGS84).
        lon: Longitude in decimal degrees (WGS84).
        accuracy: Horizontal accuracy in meters.
    """

    device_id: str
    timestamp: int
    lat: float
    lon: float
    accuracy: float

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise RangeError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise RangeError(f"longitude {self.lon} outside [-180, 180]")
        if self.accuracy < 0:
            raise RangeError(f"accuracy {self.accuracy} is negative")
        if self.timestamp < 0:
            raise RangeError(f"timestamp {self.timestamp} is negative")

    @property
    def point(self) -> tuple[float, float]:
        return (self.lat, self.lon)

    def moved_to(self, lat: float, lon: float) -> LocationRecord:
        return replace(self, lat=lat, lon=lon)


@dataclass(frozen=True, slots=True)
class LabeledRecord:
    """A record with its stay assignment, or the -1 sentinels when transient."""

    record: LocationRecord
    stay_lat: float = TRANSIENT
    stay_lon: float = TRANSIENT
    stay_duration_min: float = TRANSIENT
    stay_index: int = TRANSIENT

    def __post_init__(self):
        # stay_index is authoritative: -1 is also a legal latitude/longitude
        if self.stay_index == TRANSIENT:
            consistent = self.stay_lat == self.stay_lon == self.stay_duration_min == TRANSIENT
        else:
            consistent = self.stay_index >= 0 and self.stay_duration_min >= 0
        if not consistent:
            raise RangeError(
                f"record at {self.record.timestamp} is partially labeled "
                f"({self.stay_lat}, {self.stay_lon}, {self.stay_duration_min}, #{self.stay_index})"
            )

    @property
    def is_transient(self) -> bool:
        return self.stay_index == TRANSIENT

    @property
    def timestamp(self) -> int:
        return self.record.timestamp

    def transient(self) -> LabeledRecord:
        return LabeledRecord(self.record)

    def labeled(self, lat: float, lon: float, duration_min: float, stay_index: int) -> LabeledRecord:
        return LabeledRecord(self.record, lat, lon, duration_min, stay_index)


@dataclass(frozen=True, slots=True)
class DayTrajectory:
    device_id: str
    local_day: date
    records: tuple[LocationRecord, ...]

    def __post_init__(self):
        check_sorted(self.records)


def check_sorted(items, key=lambda r: r.timestamp) -> None:
    previous = None
    for item in items:
        current = key(item)
        if previous is not None and current < previous:
            raise UnsortedInput(f"items out of time order at {current} (after {previous})")
        previous = current


def split_days(device_id: str, records, utc_offset_min: int = 0) -> list[DayTrajectory]:
    """Cut one device's time-sorted records into local-day trajectories."""
    return [
        DayTrajectory(device_id, day, tuple(day_records))
        for day, day_records in groupby(records, key=lambda r: local_day(r.timestamp, utc_offset_min))
    ]

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from ..errors import RangeError


class StaySource(str, Enum):
    GPS = "GPS"
    CELLULAR = "CELLULAR"
    MERGED = "MERGED"


@dataclass(frozen=True, slots=True)
class Stay:
    """An inferred dwell. Duration is derived from the interval, never stored apart."""

    device_id: str
    centroid_lat: float
    centroid_lon: float
    start: int
    end: int
    record_count: int
    source: StaySource

    def __post_init__(self):
        if self.end < self.start:
            raise RangeError(f"stay ends ({self.end}) before it starts ({self.start})")
        if self.record_count < 1:
            raise RangeError(f"stay record_count must be positive, got {self.record_count}")

    @property
    def duration_min(self) -> float:
        return (self.end - self.start) / 60.0

    @property
    def duration_s(self) -> int:
        return self.end - self.start

    @property
    def centroid(self) -> tuple[float, float]:
        return (self.centroid_lat, self.centroid_lon)

    def relocated(self, lat: float, lon: float) -> Stay:
        return replace(self, centroid_lat=lat, centroid_lon=lon)

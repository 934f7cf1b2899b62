from datetime import date
from pathlib import Path
from typing import List, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class IngestConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    paths: List[Path] = []
    accuracy_split_m: float = Field(default=100.0, gt=0)
    utc_offset_min: int = Field(default=0, ge=-14 * 60, le=14 * 60)
    # "sort": reorder rows by time; "require": reject input that is not already ordered
    sort_policy: Literal["sort", "require"] = "sort"
    iso_timestamps: bool = False


class SynthConfig(BaseModel):
    """Parameters of the synthetic itinerary generator."""

    model_config = ConfigDict(frozen=True)

    seed: int = 0
    n_users: int = Field(default=10, ge=1)
    days: int = Field(default=3, ge=1)
    start_date: date = date(2019, 3, 4)
    utc_offset_min: int = 0

    places_per_user: int = Field(default=5, ge=2)
    area_km: float = Field(default=10.0, gt=0)
    min_place_separation_km: float = Field(default=1.5, gt=0)
    center_lat: float = Field(default=47.61, ge=-80, le=80)
    center_lon: float = Field(default=-122.33, ge=-179, le=179)

    visits_per_day: tuple[int, int] = (2, 4)
    dwell_min_range: tuple[float, float] = (15.0, 120.0)
    # home dwell before the first trip, in hours after local midnight
    leave_home_hours: tuple[float, float] = (7.0, 9.0)
    travel_speed_kmh: float = Field(default=30.0, gt=0)
    sample_interval_s: int = Field(default=60, ge=1)

    gps_fraction: float = Field(default=0.5, ge=0, le=1)
    gps_noise_m: float = Field(default=5.0, ge=0)
    cellular_noise_m: float = Field(default=150.0, ge=0)
    gps_accuracy_m: tuple[float, float] = (5.0, 50.0)
    cellular_accuracy_m: tuple[float, float] = (100.0, 1500.0)

    oscillation_rate: float = Field(default=0.0, ge=0, le=1)
    tower_pair_distance_km: float = Field(default=2.0, gt=0)

    @model_validator(mode="after")
    def check_pairs(self):
        for name in ("visits_per_day", "dwell_min_range", "leave_home_hours", "gps_accuracy_m", "cellular_accuracy_m"):
            low, high = getattr(self, name)
            if low > high or low < 0:
                raise ValueError(f"{name} must be a non-negative (low, high) pair, got ({low}, {high})")
        if self.leave_home_hours[1] >= 24:
            raise ValueError("leave_home_hours must be before midnight")
        if self.gps_accuracy_m[1] >= 100 or self.cellular_accuracy_m[0] < 100:
            raise ValueError("accuracy ranges must sit on their side of the 100 m split")
        return self

"""Mobility metrics: trips per person-day, radius of gyration, departure times."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date
from math import floor, sqrt
from typing import Iterable, Mapping, Sequence

from .errors import EmptyCohort, Undefined
from .geo import haversine_km, mean_centroid
from .models import Stay, local_day, minutes_since_local_midnight
from .schemas import HISTOGRAM_BINS, MobilityMetrics


def stays_by_day(stays: Sequence[Stay], utc_offset_min: int = 0) -> dict[date, list[Stay]]:
    """Group a user's stays by the local day they start on."""
    days: dict[date, list[Stay]] = defaultdict(list)
    for stay in sorted(stays, key=lambda s: (s.start, s.end)):
        days[local_day(stay.start, utc_offset_min)].append(stay)
    return dict(days)


def trips_per_day(stays: Sequence[Stay], day: date, utc_offset_min: int = 0) -> int:
    starting = sum(1 for s in stays if local_day(s.start, utc_offset_min) == day)
    return max(0, starting - 1)


def radius_of_gyration(stays: Sequence[Stay]) -> float:
    """Root-mean-square haversine distance of stays from their center of mass, km."""
    if not stays:
        raise Undefined("radius of gyration needs at least one stay")
    center = mean_centroid(s.centroid for s in stays)
    return sqrt(sum(haversine_km(s.centroid, center) ** 2 for s in stays) / len(stays))


def departure_bin(timestamp: int, utc_offset_min: int = 0) -> int:
    return min(HISTOGRAM_BINS - 1, floor(minutes_since_local_midnight(timestamp, utc_offset_min) / 30))


def departure_histogram(stays: Sequence[Stay], utc_offset_min: int = 0) -> list[int]:
    """Departures of one user: for every pair of consecutive stays starting on the
    same local day, the origin's end time is binned into half hours."""
    counts = [0] * HISTOGRAM_BINS
    for day_stays in stays_by_day(stays, utc_offset_min).values():
        for origin in day_stays[:-1]:
            counts[departure_bin(origin.end, utc_offset_min)] += 1
    return counts


@dataclass
class UserSummary:
    """Per-user partial sums; summaries add up associatively."""

    person_days: int = 0
    trips: int = 0
    rg_sum_km: float = 0.0
    histogram: list[int] = field(default_factory=lambda: [0] * HISTOGRAM_BINS)

    def __add__(self, other: UserSummary) -> UserSummary:
        return UserSummary(
            self.person_days + other.person_days,
            self.trips + other.trips,
            self.rg_sum_km + other.rg_sum_km,
            [a + b for a, b in zip(self.histogram, other.histogram)],
        )

    @property
    def rg_km(self) -> float:
        """Per-user radius of gyration: mean of daily values over days with a stay."""
        return self.rg_sum_km / self.person_days if self.person_days else 0.0


def summarize_user(stays: Sequence[Stay], utc_offset_min: int = 0) -> UserSummary:
    summary = UserSummary(histogram=departure_histogram(stays, utc_offset_min))
    for day_stays in stays_by_day(stays, utc_offset_min).values():
        summary.person_days += 1
        summary.trips += len(day_stays) - 1
        summary.rg_sum_km += radius_of_gyration(day_stays)
    return summary


def users_with_stays(per_user: Mapping[str, Sequence[Stay]]) -> set[str]:
    return {device for device, stays in per_user.items() if stays}


def aggregate_metrics(
    per_user: Mapping[str, Sequence[Stay]],
    cohort: Iterable[str] | None = None,
    utc_offset_min: int = 0,
) -> MobilityMetrics:
    """Pool trips/day and daily r_g over the cohort's person-days with a stay.

    ``cohort`` restricts the users considered; by default every user with a stay.
    """
    members = users_with_stays(per_user) if cohort is None else set(cohort)
    total = UserSummary()
    included = 0
    for device in sorted(members):
        stays = per_user.get(device, ())
        if not stays:
            continue
        total = total + summarize_user(stays, utc_offset_min)
        included += 1
    if total.person_days == 0:
        raise EmptyCohort("no person-day with a stay in the cohort")
    return MobilityMetrics(
        trips_per_person_day=total.trips / total.person_days,
        rg_km_per_person_day=total.rg_sum_km / total.person_days,
        departure_histogram=total.histogram,
        users_included=included,
        person_days=total.person_days,
    )

"""Seeded synthetic itineraries with ground-truth stays.

Every user has a home and a few other places. Each day starts at home at local
midnight, visits some places, and ends at home at the end of the day. Observations
are taken on a fixed interval, each one GPS or cellular at random with
sensor-specific noise. Optional ping-pong events add a cellular record a few
seconds after a stationary cellular one, located at the place's paired tower.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from math import cos, pi, radians
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from loguru import logger

from ..errors import UsageError
from ..geo import EARTH_RADIUS_KM, LatLon, haversine_km
from ..models import LocationRecord, Stay, StaySource, local_day
from ..schemas import RecoveryScore, SynthConfig
from .ingest import RECORD_COLUMNS
from .writers import prepare_dir, record_line, write_records, write_stays

KM_PER_DEG = EARTH_RADIUS_KM * pi / 180.0
MIN_HOME_DWELL_S = 15 * 60
PLACEMENT_ATTEMPTS = 10_000

Corpus = dict[str, list[LocationRecord]]


@dataclass(frozen=True)
class SyntheticCorpus:
    records: Corpus
    truth: dict[str, list[Stay]]

    @property
    def record_count(self) -> int:
        return sum(len(v) for v in self.records.values())


def _shift(origin: LatLon, north_km, east_km):
    lat, lon = origin
    return lat + north_km / KM_PER_DEG, lon + east_km / (KM_PER_DEG * cos(radians(lat)))


def _places(rng: np.random.Generator, cfg: SynthConfig) -> list[LatLon]:
    half = cfg.area_km / 2
    places: list[LatLon] = []
    for _ in range(PLACEMENT_ATTEMPTS):
        north, east = rng.uniform(-half, half, size=2)
        candidate = _shift((cfg.center_lat, cfg.center_lon), float(north), float(east))
        if all(haversine_km(candidate, p) >= cfg.min_place_separation_km for p in places):
            places.append(candidate)
            if len(places) == cfg.places_per_user:
                return places
    raise UsageError(
        f"cannot place {cfg.places_per_user} places {cfg.min_place_separation_km} km apart "
        f"in a {cfg.area_km} km square"
    )


def _towers(rng: np.random.Generator, cfg: SynthConfig, places: Sequence[LatLon]) -> list[LatLon]:
    bearings = rng.uniform(0, 2 * pi, size=len(places))
    d = cfg.tower_pair_distance_km
    return [_shift(p, float(d * np.cos(b)), float(d * np.sin(b))) for p, b in zip(places, bearings)]


def _travel_s(cfg: SynthConfig, a: LatLon, b: LatLon) -> int:
    return int(round(haversine_km(a, b) / cfg.travel_speed_kmh * 3600))


def _itinerary(rng: np.random.Generator, cfg: SynthConfig, places: Sequence[LatLon], day_start: int):
    """(place index, start, end) per true stay; place 0 is home."""
    day_end = day_start + 86400 - 1
    leave = day_start + int(rng.uniform(*cfg.leave_home_hours) * 3600)
    visits = int(rng.integers(cfg.visits_per_day[0], cfg.visits_per_day[1] + 1))
    stays = [(0, day_start, leave)]
    current, clock = 0, leave
    for _ in range(visits):
        options = [p for p in range(1, len(places)) if p != current]
        nxt = options[int(rng.integers(len(options)))]
        arrive = clock + _travel_s(cfg, places[current], places[nxt])
        depart = arrive + int(rng.uniform(*cfg.dwell_min_range) * 60)
        if depart + _travel_s(cfg, places[nxt], places[0]) + MIN_HOME_DWELL_S > day_end:
            break
        stays.append((nxt, arrive, depart))
        current, clock = nxt, depart
    if current == 0:
        return [(0, day_start, day_end)]
    stays.append((0, clock + _travel_s(cfg, places[current], places[0]), day_end))
    return stays


def _observe(rng, cfg: SynthConfig, device: str, times, lats, lons, tower: LatLon | None) -> list[LocationRecord]:
    n = len(times)
    if n == 0:
        return []
    gps = rng.random(n) < cfg.gps_fraction
    sigma_km = np.where(gps, cfg.gps_noise_m, cfg.cellular_noise_m) / 1000.0
    north = rng.normal(0.0, 1.0, n) * sigma_km
    east = rng.normal(0.0, 1.0, n) * sigma_km
    accuracy = np.where(gps, rng.uniform(*cfg.gps_accuracy_m, n), rng.uniform(*cfg.cellular_accuracy_m, n))

    records = []
    for k in range(n):
        lat, lon = _shift((float(lats[k]), float(lons[k])), float(north[k]), float(east[k]))
        records.append(LocationRecord(device, int(times[k]), round(lat, 7), round(lon, 7), round(float(accuracy[k]), 1)))

    if tower is not None and cfg.oscillation_rate > 0:
        pings = (~gps) & (rng.random(n) < cfg.oscillation_rate)
        lag = max(1, min(5, cfg.sample_interval_s // 2))
        for k in np.flatnonzero(pings):
            t_north, t_east = rng.normal(0.0, cfg.cellular_noise_m / 1000.0, 2)
            lat, lon = _shift(tower, float(t_north), float(t_east))
            acc = round(float(rng.uniform(*cfg.cellular_accuracy_m)), 1)
            records.append(LocationRecord(device, int(times[k]) + lag, round(lat, 7), round(lon, 7), acc))
    return records


def _stay_times(cfg: SynthConfig, start: int, end: int) -> np.ndarray:
    times = np.arange(start, end, cfg.sample_interval_s, dtype=np.int64)
    return np.append(times, end)


def _user(rng: np.random.Generator, cfg: SynthConfig, device: str, first_day_start: int):
    places = _places(rng, cfg)
    towers = _towers(rng, cfg, places)
    records: list[LocationRecord] = []
    truth: list[Stay] = []
    for day in range(cfg.days):
        itinerary = _itinerary(rng, cfg, places, first_day_start + day * 86400)
        previous = None
        for place, start, end in itinerary:
            if previous is not None:
                p_place, p_end = previous
                times = np.arange(p_end + cfg.sample_interval_s, start, cfg.sample_interval_s, dtype=np.int64)
                frac = (times - p_end) / max(start - p_end, 1)
                (a_lat, a_lon), (b_lat, b_lon) = places[p_place], places[place]
                records += _observe(rng, cfg, device, times, a_lat + frac * (b_lat - a_lat),
                                    a_lon + frac * (b_lon - a_lon), None)
            times = _stay_times(cfg, start, end)
            lat, lon = places[place]
            records += _observe(rng, cfg, device, times, np.full(len(times), lat), np.full(len(times), lon), towers[place])
            truth.append(Stay(device, lat, lon, start, end, len(times), StaySource.GPS))
            previous = (place, end)

    records.sort(key=lambda r: r.timestamp)
    unique = [r for pos, r in enumerate(records) if pos == 0 or r.timestamp != records[pos - 1].timestamp]
    return unique, truth


def generate_synthetic(cfg: SynthConfig) -> SyntheticCorpus:
    """Fully determined by ``cfg`` (seed included)."""
    rng = np.random.default_rng(cfg.seed)
    midnight = datetime(cfg.start_date.year, cfg.start_date.month, cfg.start_date.day, tzinfo=timezone.utc)
    first_day_start = int(midnight.timestamp()) - cfg.utc_offset_min * 60
    records: Corpus = {}
    truth: dict[str, list[Stay]] = {}
    width = max(4, len(str(cfg.n_users - 1)))
    for user in range(cfg.n_users):
        device = f"u{user:0{width}d}"
        records[device], truth[device] = _user(rng, cfg, device, first_day_start)
    corpus = SyntheticCorpus(records, truth)
    logger.info(f"synthesized {corpus.record_count} record(s) for {cfg.n_users} user(s) over {cfg.days} day(s)")
    return corpus


def write_synthetic(corpus: SyntheticCorpus, out_dir: Path | str) -> dict[str, Path]:
    out_dir = prepare_dir(out_dir)
    records = [r for device in sorted(corpus.records) for r in corpus.records[device]]
    return {
        "records": write_records(records, out_dir / "records.csv"),
        "truth": write_stays(corpus.truth, out_dir / "truth.csv"),
    }


def build_corpus_of_size(base: Mapping[str, Sequence[LocationRecord]], target_bytes: int) -> Corpus:
    """Add whole users from ``base`` in a fixed cycle until the records CSV reaches
    ``target_bytes``. Repeated users get a ``#k`` suffix."""
    devices = sorted(device for device in base if base[device])
    if not devices or target_bytes <= 0:
        return {}
    sizes = {d: sum(len(record_line(r).encode("utf-8")) + 1 for r in base[d]) for d in devices}
    total = len(",".join(RECORD_COLUMNS)) + 1
    out: Corpus = {}
    cycle = 0
    while total < target_bytes:
        for device in devices:
            if total >= target_bytes:
                break
            if cycle == 0:
                out[device] = list(base[device])
                total += sizes[device]
            else:
                name = f"{device}#{cycle}"
                out[name] = [replace(r, device_id=name) for r in base[device]]
                total += sizes[device] + len(f"#{cycle}") * len(base[device])
        cycle += 1
    return dict(sorted(out.items()))


def score_stay_recovery(
    detected: Mapping[str, Sequence[Stay]],
    truth: Mapping[str, Sequence[Stay]],
    utc_offset_min: int = 0,
) -> RecoveryScore:
    """Compare per person-day stay counts with the ground truth."""

    def per_day(stays_by_user):
        counts = defaultdict(int)
        for device, stays in stays_by_user.items():
            for stay in stays:
                counts[(device, local_day(stay.start, utc_offset_min))] += 1
        return counts

    found, expected = per_day(detected), per_day(truth)
    keys = set(found) | set(expected)
    return RecoveryScore(
        person_days=len(keys),
        exact_days=sum(1 for key in keys if found.get(key, 0) == expected.get(key, 0)),
        missing_stays=sum(max(0, expected.get(key, 0) - found.get(key, 0)) for key in keys),
        extra_stays=sum(max(0, found.get(key, 0) - expected.get(key, 0)) for key in keys),
    )

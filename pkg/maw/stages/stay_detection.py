"""Trace segmentation, incremental clustering (+ k-means refinement) and the
Stay Duration Calculator.

Boundary semantics: trace segmentation accepts a pair at distance == threshold
(``<=``); incremental clustering joins a cluster only strictly below it (``<``).
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from loguru import logger

from ..errors import EmptyInput
from ..geo import LatLon, haversine_km, haversine_km_many, haversine_km_matrix, mean_centroid
from ..models import TRANSIENT, DayTrajectory, LabeledRecord, LocationRecord, Stay, StaySource, check_sorted
from ..schemas import ChangePoints

KMEANS_TOL_KM = 1e-6
KMEANS_MAX_ITER = 100


@dataclass(frozen=True)
class ClusterAssignment:
    """Per-point cluster labels (-1 transient), cluster centers and member lists."""

    points: tuple[LatLon, ...]
    labels: tuple[int, ...]
    centers: tuple[LatLon, ...]
    members: tuple[tuple[int, ...], ...]

    @property
    def k(self) -> int:
        return len(self.centers)

    def center_of(self, index: int) -> LatLon:
        return self.centers[self.labels[index]]


def _assignment(points, labels) -> ClusterAssignment:
    """Build an assignment from labels; clusters are renumbered in ascending label
    order and every center is the mean of its members."""
    groups: dict[int, list[int]] = {}
    for idx, label in enumerate(labels):
        if label != TRANSIENT:
            groups.setdefault(int(label), []).append(idx)
    order = sorted(groups)
    remap = {old: new for new, old in enumerate(order)}
    members = tuple(tuple(groups[old]) for old in order)
    centers = tuple(mean_centroid(points[i] for i in group) for group in members)
    new_labels = tuple(remap[int(label)] if label != TRANSIENT else TRANSIENT for label in labels)
    return ClusterAssignment(tuple(points), new_labels, centers, members)


# ---------------------------------------------------------------------------
# Trace segmentation
# ---------------------------------------------------------------------------

def trace_segmentation(day: DayTrajectory, cp: ChangePoints) -> list[LabeledRecord]:
    """Greedy leftmost-maximal segmentation of one day.

    From the anchor, the segment grows while every pairwise distance stays within
    the distance threshold. A segment lasting at least the duration threshold
    becomes a stay and the scan resumes after it; otherwise the anchor alone is
    transient and the scan resumes at the next record.
    """
    records = day.records
    check_sorted(records)
    n = len(records)
    if n == 0:
        return []

    lats = np.fromiter((r.lat for r in records), dtype=float, count=n)
    lons = np.fromiter((r.lon for r in records), dtype=float, count=n)
    times = np.fromiter((r.timestamp for r in records), dtype=np.int64, count=n)
    threshold = cp.distance_km_threshold

    labeled: list[LabeledRecord | None] = [None] * n
    stay_index = 0
    # records i..known_end are already known to be pairwise within the threshold
    known_end = -1
    i = 0
    while i < n:
        j = max(i, known_end)
        while j + 1 < n:
            distances = haversine_km_many(lats[j + 1], lons[j + 1], lats[i:j + 1], lons[i:j + 1])
            if np.any(distances > threshold):
                break
            j += 1
        known_end = j

        if times[j] - times[i] >= cp.duration_s:
            lat, lon = mean_centroid(zip(lats[i:j + 1].tolist(), lons[i:j + 1].tolist()))
            duration = (int(times[j]) - int(times[i])) / 60.0
            for k in range(i, j + 1):
                labeled[k] = LabeledRecord(records[k], lat, lon, duration, stay_index)
            stay_index += 1
            i = j + 1
        else:
            labeled[i] = LabeledRecord(records[i])
            i += 1

    return labeled  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# Incremental clustering
# ---------------------------------------------------------------------------

def incremental_cluster_points(points: Sequence[LatLon], distance_km: float) -> ClusterAssignment:
    """One pass: each point joins the nearest running-mean center strictly closer
    than ``distance_km``, otherwise it seeds a new cluster."""
    n = len(points)
    if n == 0:
        raise EmptyInput("incremental clustering needs at least one point")

    c_lat = np.empty(n)
    c_lon = np.empty(n)
    counts = np.zeros(n, dtype=np.int64)
    labels = np.empty(n, dtype=np.int64)
    k = 0
    for idx, (lat, lon) in enumerate(points):
        if k:
            distances = haversine_km_many(lat, lon, c_lat[:k], c_lon[:k])
            nearest = int(np.argmin(distances))
            if distances[nearest] < distance_km:
                counts[nearest] += 1
                c_lat[nearest] += (lat - c_lat[nearest]) / counts[nearest]
                c_lon[nearest] += (lon - c_lon[nearest]) / counts[nearest]
                labels[idx] = nearest
                continue
        c_lat[k], c_lon[k] = lat, lon
        counts[k] = 1
        labels[idx] = k
        k += 1

    return _assignment(list(points), labels.tolist())


def incremental_cluster_records(records: Sequence[LocationRecord], cp: ChangePoints) -> ClusterAssignment:
    if not records:
        raise EmptyInput("incremental clustering needs at least one record")
    check_sorted(records)
    return incremental_cluster_points([r.point for r in records], cp.distance_km_threshold)


def _nearest_centers(pts: np.ndarray, centers: np.ndarray, chunk: int = 4096) -> np.ndarray:
    out = np.empty(len(pts), dtype=np.int64)
    for lo in range(0, len(pts), chunk):
        block = pts[lo:lo + chunk]
        distances = haversine_km_matrix(block[:, 0], block[:, 1], centers[:, 0], centers[:, 1])
        out[lo:lo + chunk] = np.argmin(distances, axis=1)
    return out


def kmeans_refine(
    assignment: ClusterAssignment,
    tol_km: float = KMEANS_TOL_KM,
    max_iter: int = KMEANS_MAX_ITER,
) -> ClusterAssignment:
    """Lloyd iterations seeded at the incremental centers (k = their number).

    Every member point goes to its nearest center; clusters left empty are dropped.
    Stops once no center moves more than ``tol_km`` or after ``max_iter`` rounds.
    """
    member_idx = [i for i, label in enumerate(assignment.labels) if label != TRANSIENT]
    if not member_idx or assignment.k == 0:
        return assignment

    pts = np.asarray([assignment.points[i] for i in member_idx], dtype=float)
    centers = np.asarray(assignment.centers, dtype=float)
    nearest = np.zeros(len(member_idx), dtype=np.int64)

    for _ in range(max_iter):
        nearest = _nearest_centers(pts, centers)
        used = np.unique(nearest)
        if len(used) < len(centers):
            logger.debug(f"k-means dropped {len(centers) - len(used)} empty cluster(s)")
        nearest = np.searchsorted(used, nearest)
        new_centers = np.asarray(
            [mean_centroid(map(tuple, pts[nearest == c])) for c in range(len(used))],
            dtype=float,
        )
        shift = haversine_km_many(centers[used, 0], centers[used, 1], new_centers[:, 0], new_centers[:, 1])
        centers = new_centers
        if float(np.max(shift)) <= tol_km:
            break
    else:
        logger.debug(f"k-means stopped at the {max_iter}-iteration cap")

    labels = [TRANSIENT] * len(assignment.points)
    for pos, idx in enumerate(member_idx):
        labels[idx] = int(nearest[pos])
    return _assignment(list(assignment.points), labels)


def within_cluster_sse(assignment: ClusterAssignment) -> float:
    """Sum of squared haversine distances of members to their centers (km^2)."""
    total = 0.0
    for center, group in zip(assignment.centers, assignment.members):
        for idx in group:
            total += haversine_km(assignment.points[idx], center) ** 2
    return total


def incremental_cluster_stays(stays: Sequence[Stay], cp: ChangePoints) -> list[Stay]:
    """Cluster stay centroids like records and relabel each stay with its center.

    Stays shorter than the duration threshold are dropped; the rest keep their
    count, times and durations.
    """
    kept = [stay for stay in stays if stay.duration_s >= cp.duration_s]
    if not kept:
        return []
    refined = kmeans_refine(incremental_cluster_points([s.centroid for s in kept], cp.distance_km_threshold))
    return [stay.relocated(*refined.center_of(i)) for i, stay in enumerate(kept)]


def label_cluster_runs(
    records: Sequence[LocationRecord],
    assignment: ClusterAssignment,
    first_index: int = 0,
) -> list[LabeledRecord]:
    """Turn a record clustering into stays: each maximal run of consecutive
    records in the same cluster is one stay labeled with the cluster center."""
    labeled: list[LabeledRecord] = []
    n = len(records)
    stay_index = first_index
    start = 0
    while start < n:
        label = assignment.labels[start]
        end = start
        while end + 1 < n and assignment.labels[end + 1] == label:
            end += 1
        if label == TRANSIENT:
            labeled.extend(LabeledRecord(records[k]) for k in range(start, end + 1))
        else:
            lat, lon = assignment.centers[label]
            duration = (records[end].timestamp - records[start].timestamp) / 60.0
            labeled.extend(LabeledRecord(records[k], lat, lon, duration, stay_index) for k in range(start, end + 1))
            stay_index += 1
        start = end + 1
    return labeled


# ---------------------------------------------------------------------------
# Stay Duration Calculator
# ---------------------------------------------------------------------------

def _stay_spans(labeled: Sequence[LabeledRecord]) -> "OrderedDict[int, tuple[int, int]]":
    spans: OrderedDict[int, tuple[int, int]] = OrderedDict()
    for item in labeled:
        if item.is_transient:
            continue
        first, last = spans.get(item.stay_index, (item.timestamp, item.timestamp))
        spans[item.stay_index] = (min(first, item.timestamp), max(last, item.timestamp))
    return spans


def stay_duration_filter(labeled: Sequence[LabeledRecord], cp: ChangePoints) -> list[LabeledRecord]:
    """Recompute stay durations from member records and demote short stays."""
    check_sorted(labeled)
    spans = _stay_spans(labeled)
    out: list[LabeledRecord] = []
    for item in labeled:
        if item.is_transient:
            out.append(item)
            continue
        first, last = spans[item.stay_index]
        if last - first < cp.duration_s:
            out.append(item.transient())
        else:
            out.append(item.labeled(item.stay_lat, item.stay_lon, (last - first) / 60.0, item.stay_index))
    return out


def collect_stays(
    labeled: Sequence[LabeledRecord],
    source: StaySource | Mapping[int, StaySource],
) -> list[Stay]:
    """Stays implied by labeled records, ordered by start time."""
    stays = list(stays_by_index(labeled, source).values())
    stays.sort(key=lambda s: (s.start, s.end))
    return stays


def stays_by_index(
    labeled: Sequence[LabeledRecord],
    source: StaySource | Mapping[int, StaySource],
) -> dict[int, Stay]:
    counts: dict[int, int] = {}
    centroid: dict[int, LatLon] = {}
    device: dict[int, str] = {}
    for item in labeled:
        if item.is_transient:
            continue
        counts[item.stay_index] = counts.get(item.stay_index, 0) + 1
        centroid.setdefault(item.stay_index, (item.stay_lat, item.stay_lon))
        device.setdefault(item.stay_index, item.record.device_id)
    stays: dict[int, Stay] = {}
    for index, (first, last) in _stay_spans(labeled).items():
        stay_source = source if isinstance(source, StaySource) else source.get(index, StaySource.GPS)
        lat, lon = centroid[index]
        stays[index] = Stay(device[index], lat, lon, first, last, counts[index], stay_source)
    return stays

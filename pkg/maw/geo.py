"""Great-circle distance and centroid helpers shared by every stage.

Distances are haversine on a sphere of radius 6371.0088 km (mean Earth radius).
Centroids are the plain arithmetic mean of degrees, which is fine for the small
extents of a stay; clusters spanning the antimeridian are not supported.
"""

from __future__ import annotations

from math import asin, cos, radians, sin, sqrt
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInput

EARTH_RADIUS_KM = 6371.0088

LatLon = tuple[float, float]


def haversine_km(a: LatLon, b: LatLon) -> float:
    lat1, lon1, lat2, lon2 = map(radians, (a[0], a[1], b[0], b[1]))
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = sin(dlat / 2) ** 2 + cos(lat1) * cos(lat2) * sin(dlon / 2) ** 2
    # clamp: rounding can push h a hair above 1 for antipodes
    return 2 * EARTH_RADIUS_KM * asin(sqrt(min(1.0, h)))


def haversine_km_many(lat: float, lon: float, lats, lons) -> np.ndarray:
    """Broadcasting haversine in km: one point against arrays, or arrays elementwise."""
    lat1, lon1 = np.radians(lat), np.radians(lon)
    lats2, lons2 = np.radians(np.asarray(lats, dtype=float)), np.radians(np.asarray(lons, dtype=float))
    h = np.sin((lats2 - lat1) / 2) ** 2 + np.cos(lat1) * np.cos(lats2) * np.sin((lons2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.minimum(1.0, h)))


def haversine_km_matrix(lats_a, lons_a, lats_b, lons_b) -> np.ndarray:
    """Pairwise distance matrix of shape (len(a), len(b)), in km."""
    la = np.radians(np.asarray(lats_a, dtype=float))[:, None]
    oa = np.radians(np.asarray(lons_a, dtype=float))[:, None]
    lb = np.radians(np.asarray(lats_b, dtype=float))[None, :]
    ob = np.radians(np.asarray(lons_b, dtype=float))[None, :]
    h = np.sin((lb - la) / 2) ** 2 + np.cos(la) * np.cos(lb) * np.sin((ob - oa) / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.minimum(1.0, h)))


def mean_centroid(points: Sequence[LatLon] | Iterable[LatLon]) -> LatLon:
    points = list(points)
    if not points:
        raise EmptyInput("mean_centroid needs at least one point")
    arr = np.asarray(points, dtype=float)
    return (float(arr[:, 0].mean()), float(arr[:, 1].mean()))

from math import pi

import numpy as np
import pytest

from maw.errors import EmptyInput
from maw.geo import EARTH_RADIUS_KM, haversine_km, haversine_km_many, haversine_km_matrix, mean_centroid


def test_haversine_identity():
    assert haversine_km((0, 0), (0, 0)) == 0.0


def test_haversine_small_step():
    assert haversine_km((0, 0), (0, 0.001)) == pytest.approx(0.111195, abs=1e-6)


def test_haversine_half_circumference():
    # 20015.114 km with the mean radius 6371.0088
    assert haversine_km((0, 0), (0, 180)) == pytest.approx(pi * EARTH_RADIUS_KM, abs=1e-3)
    assert haversine_km((0, 0), (0, 180)) == pytest.approx(20015.114, abs=1e-3)


def test_haversine_is_symmetric():
    a, b = (47.61, -122.33), (47.65, -122.30)
    assert haversine_km(a, b) == pytest.approx(haversine_km(b, a))


def test_haversine_triangle_inequality():
    rng = np.random.default_rng(17)
    for _ in range(2000):
        a, b, c = (tuple(p) for p in rng.normal([47.6, -122.3], 0.2, size=(3, 2)).tolist())
        assert haversine_km(a, c) <= haversine_km(a, b) + haversine_km(b, c) + 1e-9


def test_vectorised_forms_agree_with_scalar():
    lats, lons = [0.0, 10.0, -33.9], [0.0, 20.0, 151.2]
    many = haversine_km_many(1.0, 2.0, lats, lons)
    matrix = haversine_km_matrix([1.0], [2.0], lats, lons)
    for k in range(3):
        expected = haversine_km((1.0, 2.0), (lats[k], lons[k]))
        assert many[k] == pytest.approx(expected)
        assert matrix[0, k] == pytest.approx(expected)


def test_mean_centroid():
    assert mean_centroid([(10, 20)]) == (10, 20)
    assert mean_centroid([(0, 0), (0, 0.002)]) == pytest.approx((0, 0.001))


def test_mean_centroid_ignores_order():
    rng = np.random.default_rng(5)
    for _ in range(200):
        points = [tuple(p) for p in rng.normal([47.6, -122.3], 0.05, size=(int(rng.integers(1, 20)), 2)).tolist()]
        shuffled = [points[i] for i in rng.permutation(len(points))]
        assert mean_centroid(shuffled) == pytest.approx(mean_centroid(points), rel=1e-12, abs=1e-12)


def test_mean_centroid_empty():
    with pytest.raises(EmptyInput):
        mean_centroid([])

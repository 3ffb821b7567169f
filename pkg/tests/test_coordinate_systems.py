import numpy as np
import pytest

from svindex.core.exceptions import InvalidGeometryError
from svindex.coordinate_systems.coordinate_system_conversions import KM_PER_DEGREE_LAT, geographic_to_local_km, \
    km_side_to_spans, local_km_to_geographic


class TestGeographic:

    def test_local_frame_round_trip(self):
        origin = np.array([44.5, -93.2])
        points = np.array([[44.5, -93.2], [44.6, -93.0], [44.1, -94.0]])
        local = geographic_to_local_km(points, origin)
        np.testing.assert_allclose(local[0], [0.0, 0.0])
        np.testing.assert_allclose(local[1, 0], 0.1 * KM_PER_DEGREE_LAT)
        np.testing.assert_allclose(local_km_to_geographic(local, origin), points)

    def test_shape_checked(self):
        with pytest.raises(InvalidGeometryError):
            geographic_to_local_km(np.zeros(3), np.zeros(2))
        with pytest.raises(InvalidGeometryError):
            local_km_to_geographic(np.zeros((2, 3)), np.zeros(2))

    def test_pole_rejected(self):
        with pytest.raises(InvalidGeometryError):
            local_km_to_geographic(np.zeros((1, 2)), np.array([90.0, 0.0]))


class TestRangeSpans:

    def test_plane(self):
        assert km_side_to_spans(6.18) == (6.18, 6.18)
        assert km_side_to_spans(2.0, plane_units_per_km=0.5) == (1.0, 1.0)

    def test_degrees_widen_longitude_away_from_equator(self):
        lat_span, lon_span = km_side_to_spans(10.0, "degrees", latitude=0.0)
        assert lat_span == pytest.approx(10.0 / KM_PER_DEGREE_LAT)
        assert lon_span == pytest.approx(lat_span)
        lat_span, lon_span = km_side_to_spans(10.0, "degrees", latitude=60.0)
        assert lon_span == pytest.approx(2.0 * lat_span)

    @pytest.mark.parametrize("kwargs", [{"side_km": -1.0}, {"side_km": 1.0, "units": "miles"},
                                        {"side_km": 1.0, "plane_units_per_km": 0.0}])
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidGeometryError):
            km_side_to_spans(**kwargs)

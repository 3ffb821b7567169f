import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svindex.core.distance import distances_to, euclidean_distance
from svindex.core.exceptions import DimensionError, FormatError, InvalidGeometryError
from svindex.core.geo_image import GeoDataset, GeoImage
from svindex.core.query import SpatialVisualRangeQuery
from svindex.core.rect import Rect, expand_rect, rect_contains
from svindex.core.sampling import derive_seed, sample_in_ball

coords = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)
vectors = st.lists(coords, min_size=3, max_size=3)


class TestRect:

    def test_inclusive_boundary(self):
        r = Rect(0.0, 0.0, 2.0, 1.0)
        assert rect_contains(r, (0.0, 0.0))
        assert rect_contains(r, (2.0, 1.0))
        assert not rect_contains(r, (2.0000001, 0.5))

    def test_inverted_corners_rejected(self):
        with pytest.raises(InvalidGeometryError):
            Rect(1.0, 0.0, 0.0, 1.0)

    def test_contains_points_matches_scalar(self):
        r = Rect(-1.0, -1.0, 1.0, 1.0)
        points = np.array([[0.0, 0.0], [1.0, 1.0], [1.5, 0.0], [-1.0, -1.01]])
        np.testing.assert_array_equal(r.contains_points(points), [r.contains(p) for p in points])

    def test_contains_points_shape(self):
        with pytest.raises(InvalidGeometryError):
            Rect(0, 0, 1, 1).contains_points(np.zeros((3, 3)))

    def test_expand_zero_is_identity(self):
        r = Rect(30.0, -116.0, 34.0, -104.0)
        assert expand_rect(r, 0.0) == r

    def test_expand_scales_sides(self):
        r = Rect(30.0, -116.0, 34.0, -104.0).expanded(0.5)
        assert r.width == pytest.approx(6.0)
        assert r.height == pytest.approx(18.0)
        assert r.center == pytest.approx((32.0, -110.0))

    def test_expand_negative_rejected(self):
        with pytest.raises(InvalidGeometryError):
            Rect(0, 0, 1, 1).expanded(-0.1)

    @given(coords, coords, st.floats(0.0, 100.0), st.floats(0.0, 100.0), st.floats(0.0, 5.0), st.floats(0.0, 5.0))
    def test_expand_monotone(self, x, y, w, h, small, extra):
        r = Rect(x, y, x + w, y + h)
        inner = r.expanded(small)
        outer = r.expanded(small + extra)
        for corner in (r.min, r.max):
            assert inner.contains(corner)
        assert outer.min_x <= inner.min_x and outer.min_y <= inner.min_y
        assert outer.max_x >= inner.max_x and outer.max_y >= inner.max_y

    def test_from_center(self):
        assert Rect.from_center((1.0, 2.0), 4.0, 2.0) == Rect(-1.0, 1.0, 3.0, 3.0)

    def test_overlap_area_disjoint(self):
        assert Rect(0, 0, 1, 1).overlap_area(Rect(2, 2, 3, 3)) == 0.0
        assert Rect(0, 0, 2, 2).overlap_area(Rect(1, 1, 3, 3)) == pytest.approx(1.0)


class TestDistance:

    def test_known_value(self):
        assert euclidean_distance([0.0, 0.0], [3.0, 4.0]) == 5.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            euclidean_distance([0.0, 0.0], [1.0, 2.0, 3.0])

    @given(vectors, vectors, vectors)
    def test_triangle_inequality(self, a, b, c):
        ab = euclidean_distance(a, b)
        bc = euclidean_distance(b, c)
        ac = euclidean_distance(a, c)
        assert ac <= ab + bc + 1e-9 * (1.0 + ab + bc)

    @given(vectors, vectors)
    def test_symmetric(self, a, b):
        assert euclidean_distance(a, b) == euclidean_distance(b, a)

    def test_vectorized_agrees_bitwise(self):
        rng = np.random.default_rng(0)
        points = rng.standard_normal((50, 7))
        q = rng.standard_normal(7)
        batch = distances_to(points, q)
        assert all(batch[i] == euclidean_distance(points[i], q) for i in range(50))


class TestGeoImage:

    def test_vectors_are_read_only(self):
        image = GeoImage("I1", (1.0, 2.0), (0.5, 0.5, 0.5))
        with pytest.raises(ValueError):
            image.v[0] = 1.0

    def test_bad_identifier(self):
        with pytest.raises(FormatError):
            GeoImage("has space", (0, 0), (1,))

    def test_bad_spatial_shape(self):
        with pytest.raises(DimensionError):
            GeoImage("I1", (0, 0, 0), (1,))

    def test_dataset_mixed_dimensions(self):
        with pytest.raises(DimensionError):
            GeoDataset([GeoImage("a", (0, 0), (1, 2)), GeoImage("b", (0, 0), (1, 2, 3))])

    def test_dataset_ordinals(self, example_dataset):
        assert len(example_dataset) == 11
        assert example_dataset.ids[example_dataset.ordinal("I9")] == "I9"
        assert example_dataset.spatial.shape == (11, 2)


class TestQuery:

    def test_negative_sigma(self):
        with pytest.raises(InvalidGeometryError):
            SpatialVisualRangeQuery(Rect(0, 0, 1, 1), np.zeros(2), -0.1)

    def test_fractional_explore_visual(self):
        with pytest.raises(InvalidGeometryError):
            SpatialVisualRangeQuery(Rect(0, 0, 1, 1), np.zeros(2), 0.1, explore_visual=1.5)

    def test_with_exploration_keeps_identity(self, example_query):
        explored = example_query.with_exploration(explore_spatial=1.5)
        assert explored.qid == example_query.qid
        assert explored.explored_rect().contains(example_query.spatial.min)
        assert example_query.explore_spatial == 0.0


class TestSampling:

    @settings(max_examples=25)
    @given(st.integers(min_value=1, max_value=12), st.floats(0.0, 10.0), st.integers(min_value=0, max_value=2**32))
    def test_samples_inside_ball(self, d, radius, seed):
        center = np.linspace(-1.0, 1.0, d)
        for vector in sample_in_ball(center, radius, 20, seed):
            assert euclidean_distance(vector, center) <= radius

    def test_far_center_draws_pass_both_distance_checks(self):
        # large coordinates leave little headroom for rounding at the boundary
        center = np.full(64, 1.0e6)
        samples = sample_in_ball(center, 1.0e-3, 300, seed=11)
        assert all(euclidean_distance(v, center) <= 1.0e-3 for v in samples)
        assert (distances_to(np.vstack(samples), center) <= 1.0e-3).all()

    def test_deterministic_and_prefix_stable(self):
        first = sample_in_ball([0.0, 0.0, 0.0], 1.0, 5, seed=42)
        again = sample_in_ball([0.0, 0.0, 0.0], 1.0, 6, seed=42)
        for a, b in zip(first, again):
            np.testing.assert_array_equal(a, b)

    def test_zero_count(self):
        assert sample_in_ball([0.0], 1.0, 0, seed=0) == []

    def test_negative_radius(self):
        with pytest.raises(InvalidGeometryError):
            sample_in_ball([0.0], -1.0, 1, seed=0)

    def test_derive_seed(self):
        assert derive_seed(1, 2) == derive_seed(1, 2)
        assert derive_seed(1, 2) != derive_seed(2, 1)

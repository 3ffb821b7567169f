"""
The worked example: nine camera locations around the US southwest with 2-d
visual vectors at known distances from the query vector, plus two filler
images that share leaves with I1 and I2, and a two-table hash family placing
them in fixed buckets.

Inserted in this order with fan-out 3 the R*-tree has six leaves under two
internal nodes, and the query rectangle overlaps exactly two of the leaves.
"""
import numpy as np

from svindex.core.geo_image import GeoDataset, GeoImage
from svindex.core.query import SpatialVisualRangeQuery
from svindex.core.rect import Rect
from svindex.indexes.base import IndexConfig
from svindex.lsh.hash_family import HashFamily
from svindex.pagestore.config import PageStoreConfig
from svindex.rstar.tree import RTreeParams

DIAGONAL = np.sqrt(0.5)

# insertion order of the example tree
IMAGES = [
    ("I1", (33.0, -135.0), (1.5 * DIAGONAL, 1.5 * DIAGONAL)),
    ("I2", (33.0, -125.0), (-0.36, 0.48)),
    ("I5", (32.0, -95.0), (0.2, 0.0)),
    ("I6", (33.5, -85.0), (0.0, 0.8)),
    ("I10", (33.5, -133.0), (1.0, 1.2)),
    ("I11", (33.4, -122.0), (1.1, 1.0)),
    ("I4", (32.0, -107.0), (0.0, 0.3)),
    ("I7", (33.0, -106.0), (0.6, 0.0)),
    ("I8", (31.5, -118.0), (-0.4, 0.0)),
    ("I3", (31.0, -114.0), (0.1, 0.0)),
    ("I9", (31.5, -105.0), (0.4 * DIAGONAL, 0.4 * DIAGONAL)),
]
FILLERS = ("I10", "I11")

QUERY_RECT = Rect(30.0, -116.0, 34.0, -104.0)
QUERY_VECTOR = (0.0, 0.0)
QUERY_SIGMA = 0.5
WIDTH = 0.5


def running_example_dataset() -> GeoDataset:
    return GeoDataset([GeoImage(image_id, s, v) for image_id, s, v in IMAGES])


def running_example_family() -> HashFamily:
    """The first hash table projects on the first visual axis, the second on the other; one function each, W = 0.5."""
    a = np.array([[[1.0, 0.0]], [[0.0, 1.0]]])
    b = np.array([[0.25], [0.25]])
    return HashFamily.from_arrays(a, b, WIDTH)


def running_example_query(explore_spatial: float = 0.0, explore_visual: int = 0) -> SpatialVisualRangeQuery:
    return SpatialVisualRangeQuery(QUERY_RECT, np.array(QUERY_VECTOR), QUERY_SIGMA,
                                   explore_spatial=explore_spatial, explore_visual=explore_visual, qid="example")


def running_example_config() -> IndexConfig:
    """Fan-out 3 yields the example's six leaves under two internal nodes."""
    return IndexConfig(page_store=PageStoreConfig(page_size=4096), rtree=RTreeParams(fan_out=3),
                       tables=2, functions_per_table=1, width=WIDTH)

from dataclasses import dataclass
from typing import FrozenSet, Optional

import numpy as np

from svindex.core.distance import distances_to
from svindex.core.exceptions import ContractViolation, DimensionError
from svindex.core.geo_image import GeoDataset
from svindex.core.query import SpatialVisualRangeQuery
from svindex.core.rect import Rect


@dataclass(frozen=True)
class GroundTruth:
    """
    Exact answers of one query.

    Attributes:
    strict (frozenset): ids with s in Q.s and distance <= sigma.
    extended (frozenset): ids with s in Q.s enlarged by explore_spatial_max and distance <= sigma.
    explore_spatial_max (float): enlargement ratio of the extended rectangle.
    """

    strict: FrozenSet[str]
    extended: FrozenSet[str]
    explore_spatial_max: float = 0.0

    def __post_init__(self):
        if not self.strict <= self.extended:
            raise ContractViolation("GroundTruth: strict answer is not contained in the extended answer")


def _answer(dataset: GeoDataset, rect: Rect, relevant: np.ndarray) -> FrozenSet[str]:
    mask = rect.contains_points(dataset.spatial) & relevant
    ids = dataset.ids
    return frozenset(ids[i] for i in np.flatnonzero(mask))


def oracle_query(dataset: GeoDataset, q: SpatialVisualRangeQuery,
                 explore_spatial_max: Optional[float] = None) -> GroundTruth:
    """
    Linear-scan ground truth of a query.

    Parameters:
    dataset (GeoDataset): the indexed images.
    q (SpatialVisualRangeQuery): the query.
    explore_spatial_max (float): ratio of the extended rectangle; the query's own
        explore_spatial when None.

    Returns:
    GroundTruth: strict and extended answers.
    """
    if len(dataset) and q.dim != dataset.dim:
        raise DimensionError(f"oracle_query: dimension mismatch {q.dim} != {dataset.dim}")
    ratio = q.explore_spatial if explore_spatial_max is None else max(explore_spatial_max, q.explore_spatial)
    if len(dataset) == 0:
        return GroundTruth(frozenset(), frozenset(), ratio)
    relevant = distances_to(dataset.visual, q.query_vector) <= q.sigma
    strict = _answer(dataset, q.spatial, relevant)
    extended = _answer(dataset, q.spatial.expanded(ratio), relevant)
    return GroundTruth(strict, extended, ratio)


def explored_answer(dataset: GeoDataset, q: SpatialVisualRangeQuery) -> FrozenSet[str]:
    """Exact answer over the query's explored rectangle; equals the strict answer when E.s = 0."""
    return oracle_query(dataset, q).extended

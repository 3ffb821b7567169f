from dataclasses import dataclass, field
from typing import Optional
from enum import Enum

import numpy as np

from svindex.core.exceptions import InvalidGeometryError
from svindex.core.rect import Rect


class ResultClass(Enum):
    """Class of a relevant image with respect to one query."""

    SV_MATCH_REL = "SVMatchRel"
    S_UNMATCH_REL = "SUnmatchRel"
    V_UNMATCH_REL = "VUnmatchRel"


@dataclass(frozen=True)
class SpatialVisualRangeQuery:
    """
    A rectangle Q.s plus a query vector and similarity threshold Q.v.

    Attributes:
    spatial (Rect): the spatial range.
    query_vector (np.ndarray): d-dimensional query vector.
    sigma (float): inclusive visual distance threshold.
    explore_spatial (float): E.s, rectangle growth ratio for spatial exploration.
    explore_visual (int): E.v, number of in-ball sample vectors for visual exploration.
    seed (int): seed for the sample vectors.
    qid (str): query identifier used in workload and report files.
    """

    spatial: Rect
    query_vector: np.ndarray
    sigma: float
    explore_spatial: float = 0.0
    explore_visual: int = 0
    seed: int = 0
    qid: str = field(default="q0")

    def __post_init__(self):
        vector = np.asarray(self.query_vector, dtype=np.float64)
        vector.setflags(write=False)
        object.__setattr__(self, "query_vector", vector)
        if not self.sigma >= 0.0:
            raise InvalidGeometryError(f"SpatialVisualRangeQuery: sigma must be >= 0, got {self.sigma}")
        if not self.explore_spatial >= 0.0:
            raise InvalidGeometryError(
                f"SpatialVisualRangeQuery: explore_spatial must be >= 0, got {self.explore_spatial}")
        if int(self.explore_visual) != self.explore_visual or self.explore_visual < 0:
            raise InvalidGeometryError(
                f"SpatialVisualRangeQuery: explore_visual must be a non-negative integer, got {self.explore_visual}")
        object.__setattr__(self, "explore_visual", int(self.explore_visual))

    @property
    def dim(self) -> int:
        return self.query_vector.shape[0]

    def explored_rect(self) -> Rect:
        return self.spatial.expanded(self.explore_spatial)

    def with_exploration(self, explore_spatial: Optional[float] = None,
                         explore_visual: Optional[int] = None) -> "SpatialVisualRangeQuery":
        return SpatialVisualRangeQuery(
            spatial=self.spatial,
            query_vector=self.query_vector,
            sigma=self.sigma,
            explore_spatial=self.explore_spatial if explore_spatial is None else explore_spatial,
            explore_visual=self.explore_visual if explore_visual is None else explore_visual,
            seed=self.seed,
            qid=self.qid,
        )

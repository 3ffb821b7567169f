import logging
from enum import Enum
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from svindex.core.exceptions import FormatError, WorkloadError
from svindex.core.geo_image import GeoDataset
from svindex.core.query import SpatialVisualRangeQuery
from svindex.core.rect import Rect
from svindex.core.sampling import derive_seed

logger = logging.getLogger(__name__)

WORKLOAD_HEADER = "svx-workload,v1"
DENSITY_NEIGHBORS = 10
SIGMA_SAMPLE = 500


class DensityLevel(Enum):
    DENSE = 0
    UNIFORM = 1
    SPARSE = 2


class SelectivityGroup(Enum):
    """Workload class combining the spatial and visual density level of the query image."""

    SD_VD = "SD-VD"
    SD_VS = "SD-VS"
    SS_VD = "SS-VD"
    SS_VS = "SS-VS"
    SU_VU = "SU-VU"

    @property
    def levels(self) -> Tuple[DensityLevel, DensityLevel]:
        letter = {"D": DensityLevel.DENSE, "U": DensityLevel.UNIFORM, "S": DensityLevel.SPARSE}
        spatial, visual = self.value.split("-")
        return letter[spatial[1]], letter[visual[1]]

    @classmethod
    def parse(cls, name: str) -> "SelectivityGroup":
        for group in cls:
            if name.upper() in (group.value, group.name):
                return group
        raise WorkloadError(f"SelectivityGroup: unknown group {name!r}; expected one of {[g.value for g in cls]}")


def density_levels(points: np.ndarray, k: int = DENSITY_NEIGHBORS) -> np.ndarray:
    """
    Dense/uniform/sparse level of every point by the distance to its k-th
    nearest neighbor: the closest third is dense, the farthest third sparse.

    Parameters:
    points (np.ndarray): Nxm array.
    k (int): neighbor rank of the density statistic.

    Returns:
    np.ndarray: N DensityLevel values (as ints).
    """
    n = points.shape[0]
    k = min(k, n - 1)
    if k < 1:
        return np.full(n, DensityLevel.UNIFORM.value, dtype=np.int64)
    distances, _ = cKDTree(points).query(points, k=k + 1)
    kth = distances[:, k]
    ranks = np.empty(n, dtype=np.int64)
    ranks[np.argsort(kth, kind="stable")] = np.arange(n)
    return ranks * 3 // n


def sigma_quantiles(dataset: GeoDataset, quantiles: Sequence[float], seed: int = 0,
                    sample: int = SIGMA_SAMPLE) -> List[float]:
    """Visual thresholds at the given quantiles of sampled pairwise distances."""
    n = len(dataset)
    if n < 2:
        raise WorkloadError(f"sigma_quantiles: need at least two images, got {n}")
    rng = np.random.default_rng(seed)
    rows = rng.choice(n, size=min(sample, n), replace=False)
    distances = pdist(dataset.visual[np.sort(rows)])
    return [float(x) for x in np.quantile(distances, quantiles)]


def select_queries(dataset: GeoDataset, group: SelectivityGroup, count: int, seed: int,
                   spans: Tuple[float, float], sigma: float, explore_spatial: float = 0.0,
                   explore_visual: int = 0) -> List[SpatialVisualRangeQuery]:
    """
    Picks `count` query images of a selectivity group and turns each into a query.

    Parameters:
    dataset (GeoDataset): the indexed images.
    group (SelectivityGroup): spatial and visual density levels to draw from.
    count (int): number of queries.
    seed (int): selection seed; query i gets sampling seed derive_seed(seed, i).
    spans (tuple): (x, y) side lengths of the query rectangle, centered on the image.
    sigma (float): visual threshold.
    explore_spatial (float): E.s of every query.
    explore_visual (int): E.v of every query.

    Returns:
    list: SpatialVisualRangeQuery objects with qids `<group>-<i>`.
    """
    if count < 0:
        raise WorkloadError(f"select_queries: count must be >= 0, got {count}")
    if count == 0:
        return []
    if len(dataset) == 0:
        raise WorkloadError("select_queries: dataset is empty")

    spatial_level, visual_level = group.levels
    pool = np.flatnonzero((density_levels(dataset.spatial) == spatial_level.value)
                          & (density_levels(dataset.visual) == visual_level.value))
    if pool.size == 0:
        raise WorkloadError(f"select_queries: no image falls in group {group.value}")
    replace = count > pool.size
    if replace:
        logger.warning("select_queries: group %s holds %d images, drawing %d with replacement",
                       group.value, pool.size, count)
    chosen = np.random.default_rng(seed).choice(pool, size=count, replace=replace)

    queries = []
    for i, ordinal in enumerate(chosen):
        image = dataset[int(ordinal)]
        queries.append(SpatialVisualRangeQuery(
            spatial=Rect.from_center(image.s, spans[0], spans[1]),
            query_vector=image.v,
            sigma=sigma,
            explore_spatial=explore_spatial,
            explore_visual=explore_visual,
            seed=derive_seed(seed, i),
            qid=f"{group.value}-{i}",
        ))
    return queries


####################################################################
#Workload file format
####################################################################

def write_workload(queries: Sequence[SpatialVisualRangeQuery], path: Union[str, Path]):
    """
    Writes the `svx-workload,v1` header and one
    `qid,min_x,min_y,max_x,max_y,sigma,e_s,e_v,seed,v0,...` line per query.
    """
    lines = [WORKLOAD_HEADER]
    for q in queries:
        r = q.spatial
        fields = [q.qid] + [repr(x) for x in (r.min_x, r.min_y, r.max_x, r.max_y, float(q.sigma),
                                               float(q.explore_spatial))]
        fields += [str(q.explore_visual), str(q.seed)] + [repr(float(x)) for x in q.query_vector]
        lines.append(",".join(fields))
    Path(path).write_text("\n".join(lines) + "\n")


def read_workload(path: Union[str, Path]) -> List[SpatialVisualRangeQuery]:
    lines = [line for line in Path(path).read_text().splitlines() if line.strip()]
    if not lines or lines[0] != WORKLOAD_HEADER:
        raise FormatError(f"read_workload: {path} does not start with {WORKLOAD_HEADER!r}")
    queries = []
    dim = None
    for number, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) < 10:
            raise FormatError(f"read_workload: line {number} has {len(fields)} fields")
        try:
            min_x, min_y, max_x, max_y, sigma, e_s = (float(x) for x in fields[1:7])
            e_v, seed = int(fields[7]), int(fields[8])
            vector = [float(x) for x in fields[9:]]
        except ValueError:
            raise FormatError(f"read_workload: line {number} holds a malformed value") from None
        if dim is not None and len(vector) != dim:
            raise FormatError(f"read_workload: line {number} has dimension {len(vector)}, expected {dim}")
        dim = len(vector)
        queries.append(SpatialVisualRangeQuery(Rect(min_x, min_y, max_x, max_y), np.array(vector), sigma,
                                               e_s, e_v, seed, fields[0]))
    return queries

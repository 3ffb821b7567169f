import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from svindex.core.exceptions import ConfigError, FormatError
from svindex.core.geo_image import GeoDataset, GeoImage

logger = logging.getLogger(__name__)

DATASET_FORMAT = "svx-dataset"
DATASET_VERSION = "v1"


@dataclass(frozen=True)
class ClusterSpec:
    """
    One Gaussian component of a spatial or visual mixture.

    Attributes:
    spread (float): per-axis standard deviation, > 0.
    weight (float): mixture weight.
    center (tuple): cluster center; empty draws a visual center from the dataset seed.
    """

    spread: float
    weight: float
    center: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.spread > 0.0:
            raise ConfigError(f"ClusterSpec: spread must be > 0, got {self.spread}")
        if not self.weight >= 0.0:
            raise ConfigError(f"ClusterSpec: weight must be >= 0, got {self.weight}")


def _check_weights(name: str, clusters: Tuple[ClusterSpec, ...]):
    if not clusters:
        raise ConfigError(f"DatasetSpec: {name} needs at least one cluster")
    total = sum(c.weight for c in clusters)
    if not math.isclose(total, 1.0, rel_tol=0.0, abs_tol=1e-9):
        raise ConfigError(f"DatasetSpec: {name} weights sum to {total}, expected 1")


@dataclass(frozen=True)
class DatasetSpec:
    """
    Recipe of a synthetic geo-tagged dataset.

    Attributes:
    n (int): image count.
    d (int): visual dimension.
    spatial_clusters (tuple): ClusterSpecs with 2-d centers.
    visual_clusters (tuple): ClusterSpecs with d-dimensional (or empty) centers.
    coupling (float): fraction of images whose visual cluster index follows their spatial one.
    seed (int): generator seed.
    visual_scale (float): standard deviation of drawn visual centers.
    """

    n: int
    d: int = 150
    spatial_clusters: Tuple[ClusterSpec, ...] = (ClusterSpec(spread=10.0, weight=1.0, center=(0.0, 0.0)),)
    visual_clusters: Tuple[ClusterSpec, ...] = (ClusterSpec(spread=1.0, weight=1.0),)
    coupling: float = 0.0
    seed: int = 0
    visual_scale: float = 4.0

    def __post_init__(self):
        object.__setattr__(self, "spatial_clusters", tuple(self.spatial_clusters))
        object.__setattr__(self, "visual_clusters", tuple(self.visual_clusters))
        if self.n < 0:
            raise ConfigError(f"DatasetSpec: n must be >= 0, got {self.n}")
        if self.d < 1:
            raise ConfigError(f"DatasetSpec: d must be >= 1, got {self.d}")
        if not 0.0 <= self.coupling <= 1.0:
            raise ConfigError(f"DatasetSpec: coupling must be in [0, 1], got {self.coupling}")
        if not self.visual_scale > 0.0:
            raise ConfigError(f"DatasetSpec: visual_scale must be > 0, got {self.visual_scale}")
        _check_weights("spatial_clusters", self.spatial_clusters)
        _check_weights("visual_clusters", self.visual_clusters)
        for cluster in self.spatial_clusters:
            if len(cluster.center) != 2:
                raise ConfigError(f"DatasetSpec: spatial cluster center {cluster.center} is not 2-d")
        for cluster in self.visual_clusters:
            if cluster.center and len(cluster.center) != self.d:
                raise ConfigError(
                    f"DatasetSpec: visual cluster center has {len(cluster.center)} components, expected {self.d}")

    @classmethod
    def from_dict(cls, values: dict) -> "DatasetSpec":
        values = dict(values)
        try:
            for key in ("spatial_clusters", "visual_clusters"):
                if key in values:
                    values[key] = tuple(ClusterSpec(**c) for c in values[key])
            return cls(**values)
        except TypeError as e:
            raise ConfigError(f"DatasetSpec: {e}") from None

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "DatasetSpec":
        """Reads a JSON dataset spec; cluster lists are lists of ClusterSpec objects."""
        try:
            values = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"DatasetSpec: {path} is not valid JSON: {e}") from None
        return cls.from_dict(values)


def standard_spec(n: int = 2000, d: int = 32, seed: int = 0) -> DatasetSpec:
    """
    Clustered benchmark dataset: a tight, a medium and a wide spatial cluster
    over a 100x100 plane, three visual clusters, partially coupled.
    """
    return DatasetSpec(
        n=n,
        d=d,
        spatial_clusters=(
            ClusterSpec(spread=2.0, weight=0.4, center=(25.0, 25.0)),
            ClusterSpec(spread=6.0, weight=0.35, center=(70.0, 60.0)),
            ClusterSpec(spread=20.0, weight=0.25, center=(50.0, 50.0)),
        ),
        visual_clusters=(
            ClusterSpec(spread=0.6, weight=0.4),
            ClusterSpec(spread=1.0, weight=0.35),
            ClusterSpec(spread=1.8, weight=0.25),
        ),
        coupling=0.5,
        seed=seed,
    )


def generate_dataset(spec: DatasetSpec) -> GeoDataset:
    """
    Samples spec.n images from the cluster mixtures.

    Every draw comes from one generator seeded with spec.seed, so a spec
    always yields the same dataset. Ids are I1..In.
    """
    rng = np.random.default_rng(spec.seed)
    visual_centers = np.array([
        np.array(c.center) if c.center else rng.standard_normal(spec.d) * spec.visual_scale
        for c in spec.visual_clusters
    ])
    spatial_centers = np.array([c.center for c in spec.spatial_clusters])
    spatial_spread = np.array([c.spread for c in spec.spatial_clusters])
    visual_spread = np.array([c.spread for c in spec.visual_clusters])

    s_idx = rng.choice(len(spec.spatial_clusters), size=spec.n, p=[c.weight for c in spec.spatial_clusters])
    v_idx = rng.choice(len(spec.visual_clusters), size=spec.n, p=[c.weight for c in spec.visual_clusters])
    coupled = rng.random(spec.n) < spec.coupling
    v_idx = np.where(coupled, s_idx % len(spec.visual_clusters), v_idx)

    spatial = spatial_centers[s_idx] + rng.standard_normal((spec.n, 2)) * spatial_spread[s_idx][:, None]
    visual = visual_centers[v_idx] + rng.standard_normal((spec.n, spec.d)) * visual_spread[v_idx][:, None]

    images = [GeoImage(f"I{i + 1}", spatial[i], visual[i]) for i in range(spec.n)]
    logger.info("generated %d images (d=%d, seed=%d)", spec.n, spec.d, spec.seed)
    return GeoDataset(images, dim=spec.d)


####################################################################
#Dataset file format
####################################################################

def _num(x) -> str:
    # repr of a python float round-trips exactly
    return repr(float(x))


def write_dataset(dataset: GeoDataset, path: Union[str, Path]):
    """
    Writes `svx-dataset,v1,<n>,<d>` followed by one `id,x,y,v0,...` line per image.
    """
    lines = [f"{DATASET_FORMAT},{DATASET_VERSION},{len(dataset)},{dataset.dim}"]
    for image in dataset:
        lines.append(",".join([image.id] + [_num(x) for x in image.s] + [_num(x) for x in image.v]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_dataset(path: Union[str, Path]) -> GeoDataset:
    """Reads a dataset file written by write_dataset."""
    lines = [line for line in Path(path).read_text().splitlines() if line.strip()]
    if not lines:
        raise FormatError(f"read_dataset: {path} is empty")
    header = lines[0].split(",")
    if len(header) != 4 or header[0] != DATASET_FORMAT or header[1] != DATASET_VERSION:
        raise FormatError(f"read_dataset: bad header {lines[0]!r}")
    try:
        n, d = int(header[2]), int(header[3])
    except ValueError:
        raise FormatError(f"read_dataset: bad header {lines[0]!r}") from None
    if len(lines) - 1 != n:
        raise FormatError(f"read_dataset: header announces {n} images, file holds {len(lines) - 1}")

    images: List[GeoImage] = []
    for number, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 3 + d:
            raise FormatError(f"read_dataset: line {number} has {len(fields)} fields, expected {3 + d}")
        try:
            values = [float(x) for x in fields[1:]]
        except ValueError:
            raise FormatError(f"read_dataset: line {number} holds a non-numeric value") from None
        images.append(GeoImage(fields[0], values[:2], values[2:]))
    return GeoDataset(images, dim=d)

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.spatial.distance import pdist

from svindex.core.exceptions import ConfigError, DimensionError

logger = logging.getLogger(__name__)

BucketKey = Tuple[int, ...]

DEFAULT_TABLES = 3
DEFAULT_FUNCTIONS = 7
WIDTH_SAMPLE = 500
WIDTH_DIVISOR = 4.0


@dataclass(frozen=True)
class LshParams:
    """
    Euclidean LSH parameters.

    Attributes:
    dim (int): visual dimension d.
    width (float): bucket width W.
    tables (int): number of hash tables T.
    functions_per_table (int): concatenated functions per table F.
    seed (int): seed for the projection vectors and shifts.
    """

    dim: int
    width: float
    tables: int = DEFAULT_TABLES
    functions_per_table: int = DEFAULT_FUNCTIONS
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError(f"LshParams: dim must be >= 1, got {self.dim}")
        if not self.width > 0.0 or not np.isfinite(self.width):
            raise ConfigError(f"LshParams: width must be a finite value > 0, got {self.width}")
        if self.tables < 1:
            raise ConfigError(f"LshParams: tables must be >= 1, got {self.tables}")
        if self.functions_per_table < 1:
            raise ConfigError(f"LshParams: functions_per_table must be >= 1, got {self.functions_per_table}")


class HashFamily:
    """
    The T x F hash functions h(o) = floor((a . o + b) / W) of one structure.

    One family is shared by the primary LSH and every secondary LSH of a
    structure, so a vector's bucket key in a table does not depend on which
    LSH it is stored in.
    """

    def __init__(self, params: LshParams):
        rng = np.random.default_rng(params.seed)
        shape = (params.tables, params.functions_per_table)
        self.a = rng.standard_normal(shape + (params.dim,))
        self.b = rng.uniform(0.0, params.width, shape)
        self.width = float(params.width)
        self.params = params

    @classmethod
    def from_arrays(cls, a: np.ndarray, b: np.ndarray, width: float) -> "HashFamily":
        """
        Builds a family from explicit projections, for fixtures and tests.

        Parameters:
        a (np.ndarray): (T, F, d) projection vectors.
        b (np.ndarray): (T, F) shifts in [0, W).
        width (float): bucket width W.
        """
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if a.ndim != 3 or b.shape != a.shape[:2]:
            raise DimensionError(f"HashFamily.from_arrays: shapes {a.shape} and {b.shape} do not match")
        family = cls.__new__(cls)
        family.a = a
        family.b = b
        family.width = float(width)
        family.params = LshParams(dim=a.shape[2], width=width, tables=a.shape[0],
                                  functions_per_table=a.shape[1])
        return family

    @property
    def tables(self) -> int:
        return self.a.shape[0]

    @property
    def dim(self) -> int:
        return self.a.shape[2]

    def _check(self, o: np.ndarray):
        if o.shape[-1] != self.dim:
            raise DimensionError(f"hash_vector: dimension mismatch {o.shape[-1]} != {self.dim}")

    def hash_vector(self, table: int, o: np.ndarray) -> BucketKey:
        """
        Returns the F-tuple (h_1(o), ..., h_F(o)) of one table.

        Parameters:
        table (int): table index in [0, T).
        o (np.ndarray): d-dimensional vector.
        """
        o = np.asarray(o, dtype=np.float64)
        self._check(o)
        values = np.floor((self.a[table] @ o + self.b[table]) / self.width)
        return tuple(int(v) for v in values)

    def hash_all(self, o: np.ndarray) -> List[BucketKey]:
        """One key per table."""
        return [self.hash_vector(table, o) for table in range(self.tables)]


def default_width(visual: np.ndarray, seed: int = 0, sample: int = WIDTH_SAMPLE) -> float:
    """
    Bucket width for a dataset: median pairwise distance of a random sample, divided by 4.

    Parameters:
    visual (np.ndarray): N x d visual vectors.
    seed (int): sampling seed.
    sample (int): sample size.
    """
    visual = np.asarray(visual, dtype=np.float64)
    if visual.shape[0] < 2:
        return 1.0
    rng = np.random.default_rng(seed)
    count = min(sample, visual.shape[0])
    picked = visual[rng.choice(visual.shape[0], size=count, replace=False)]
    median = float(np.median(pdist(picked)))
    if median <= 0.0:
        logger.warning("default_width: sampled vectors coincide, falling back to width 1.0")
        return 1.0
    return median / WIDTH_DIVISOR


def collision_rate(dim: int, width: float, distance: float, pairs: int, seed: int) -> float:
    """
    Fraction of vector pairs at a fixed distance that collide under one
    randomly drawn hash function of the family.

    Parameters:
    dim (int): vector dimension.
    width (float): bucket width W.
    distance (float): Euclidean distance between the two vectors of each pair.
    pairs (int): number of sampled pairs.
    seed (int): seed for the function and the pairs.
    """
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(dim)
    b = rng.uniform(0.0, width)
    x = rng.standard_normal((pairs, dim))
    direction = rng.standard_normal((pairs, dim))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    y = x + distance * direction
    hx = np.floor((x @ a + b) / width)
    hy = np.floor((y @ a + b) / width)
    return float(np.mean(hx == hy))

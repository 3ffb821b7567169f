import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import ClassVar, Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from svindex.core.distance import euclidean_distance
from svindex.core.exceptions import ConfigError, DimensionError
from svindex.core.geo_image import GeoDataset
from svindex.core.query import SpatialVisualRangeQuery
from svindex.core.rect import Rect
from svindex.lsh.bucket import BucketEntry
from svindex.lsh.hash_family import DEFAULT_FUNCTIONS, DEFAULT_TABLES, BucketKey, HashFamily, LshParams, \
    default_width
from svindex.lsh.index import LshIndex, TableKey
from svindex.pagestore.config import PageStoreConfig
from svindex.pagestore.ledger import AccessLedger, PageCategory, query_cost
from svindex.pagestore.record_file import RecordFile, RecordPointer
from svindex.pagestore.records import SPATIAL_FILE, VISUAL_FILE, decode_spatial, decode_visual
from svindex.pagestore.store import PageStore
from svindex.rstar.node import LeafEntry
from svindex.rstar.tree import LeafSelection, RangeResult, RStarTree, RTreeParams

logger = logging.getLogger(__name__)

NODE_FILE = "rtree.nodes"
BUCKET_FILE = "lsh.buckets"


class IndexKind(Enum):
    """The seven spatial-visual index structures."""

    DI = "DI"
    AUG_RTREE = "AugRTree"
    AUG_LSH = "AugLSH"
    SFI = "SFI"
    VFI = "VFI"
    AUG_SFI = "AugSFI"
    AUG_VFI = "AugVFI"

    @property
    def is_hybrid(self) -> bool:
        return self in (IndexKind.SFI, IndexKind.VFI, IndexKind.AUG_SFI, IndexKind.AUG_VFI)

    @classmethod
    def parse(cls, name: str) -> "IndexKind":
        for kind in cls:
            if kind.value.lower() == name.lower() or kind.name.lower() == name.lower():
                return kind
        raise ConfigError(f"IndexKind: unknown structure {name!r}; expected one of {[k.value for k in cls]}")


@dataclass(frozen=True)
class IndexConfig:
    """
    Build parameters shared by every structure.

    Attributes:
    page_store (PageStoreConfig): page size, t_disk, padding.
    rtree (RTreeParams): fan_out and min_fill of primary and secondary trees.
    tables (int): LSH tables T.
    functions_per_table (int): LSH functions per table F.
    width (float): LSH bucket width W; None derives it from the dataset.
    lsh_seed (int): seed of the shared hash family.
    vfi_anchor_first_table (bool): VFI keeps secondary trees for first-table buckets only.
    """

    page_store: PageStoreConfig = field(default_factory=PageStoreConfig)
    rtree: RTreeParams = field(default_factory=RTreeParams)
    tables: int = DEFAULT_TABLES
    functions_per_table: int = DEFAULT_FUNCTIONS
    width: Optional[float] = None
    lsh_seed: int = 0
    vfi_anchor_first_table: bool = False

    def __post_init__(self):
        if self.tables < 1 or self.functions_per_table < 1:
            raise ConfigError(
                f"IndexConfig: tables and functions_per_table must be >= 1, "
                f"got {self.tables}, {self.functions_per_table}")
        if self.width is not None and not self.width > 0.0:
            raise ConfigError(f"IndexConfig: width must be > 0, got {self.width}")

    def lsh_params(self, dataset: GeoDataset) -> LshParams:
        width = self.width if self.width is not None else default_width(dataset.visual, self.lsh_seed)
        return LshParams(dim=dataset.dim, width=width, tables=self.tables,
                         functions_per_table=self.functions_per_table, seed=self.lsh_seed)


@dataclass(frozen=True)
class QueryOverhead:
    """CPU-side work of one query, reported next to its I/O."""

    hash_evaluations: int = 0
    distance_computations: int = 0
    merged_ids: int = 0


@dataclass(frozen=True)
class QueryStats:
    """
    Page accesses of one query, split by what the pages hold.

    Attributes:
    pages_rtree (int): R*-tree node pages (T_R).
    pages_lsh (int): LSH bucket pages (T_LSH).
    pages_data (int): spatial and visual data pages (T_Data).
    simulated_time (float): t_disk x total pages.
    intermediate_sizes (dict): candidate counts per query phase.
    overhead (QueryOverhead): hash, distance and merge work.
    """

    pages_rtree: int
    pages_lsh: int
    pages_data: int
    simulated_time: float
    intermediate_sizes: Dict[str, int] = field(default_factory=dict)
    overhead: QueryOverhead = field(default_factory=QueryOverhead)

    @property
    def total_pages(self) -> int:
        return self.pages_rtree + self.pages_lsh + self.pages_data

    @classmethod
    def from_ledger(cls, ledger: AccessLedger, cfg: PageStoreConfig,
                    intermediate_sizes: Dict[str, int]) -> "QueryStats":
        return cls(
            pages_rtree=ledger.pages_rtree,
            pages_lsh=ledger.pages_lsh,
            pages_data=ledger.pages_data,
            simulated_time=query_cost(ledger, cfg),
            intermediate_sizes=dict(intermediate_sizes),
            overhead=QueryOverhead(ledger.hash_evaluations, ledger.distance_computations, ledger.merged_ids),
        )


@dataclass
class QueryTrace:
    """
    What one query read, recorded independently of the page ledger.

    Attributes:
    kind (IndexKind): structure that ran the query.
    node_reads (list): (file id, page id) of every node read.
    visited_leaves (list): leaf pages read or selected.
    hashed_keys (list): (table, key) pairs the query hashed to.
    bucket_reads (list): pointers of the loaded buckets.
    spatial_reads (list): pointers of the loaded spatial records.
    visual_reads (list): pointers of the loaded visual records.
    """

    kind: IndexKind
    node_reads: List[Tuple[int, int]] = field(default_factory=list)
    visited_leaves: List[int] = field(default_factory=list)
    hashed_keys: List[TableKey] = field(default_factory=list)
    bucket_reads: List[RecordPointer] = field(default_factory=list)
    spatial_reads: List[RecordPointer] = field(default_factory=list)
    visual_reads: List[RecordPointer] = field(default_factory=list)


class QueryOutcome(NamedTuple):
    ids: FrozenSet[str]
    stats: QueryStats
    trace: QueryTrace


class QueryContext:
    """Per-query ledger and trace; every read of a structure goes through here."""

    def __init__(self, store: PageStore, kind: IndexKind):
        self.store = store
        self.ledger = AccessLedger()
        self.trace = QueryTrace(kind)

    def range_query(self, tree: RStarTree, rect: Rect) -> RangeResult:
        result = tree.range_query(rect, self.ledger)
        file_id = tree.node_file.file_id
        self.trace.node_reads.extend((file_id, page) for page in result.visited_pages)
        self.trace.visited_leaves.extend(page for page in result.visited_pages if tree.node(page).is_leaf)
        return result

    def overlapping_leaves(self, tree: RStarTree, rect: Rect) -> LeafSelection:
        selection = tree.overlapping_leaves(rect, self.ledger)
        file_id = tree.node_file.file_id
        self.trace.node_reads.extend((file_id, page) for page in selection.visited_pages)
        self.trace.visited_leaves.extend(selection.leaf_pages)
        return selection

    def hash_keys(self, family: HashFamily, vectors: Iterable[np.ndarray]) -> List[TableKey]:
        """Distinct (table, key) pairs of the lookup vectors, in input order."""
        seen = set()
        keys = []
        for vector in vectors:
            for table, key in enumerate(family.hash_all(vector)):
                if (table, key) not in seen:
                    seen.add((table, key))
                    keys.append((table, key))
            self.ledger.hash_evaluations += family.a.shape[0] * family.a.shape[1]
        self.trace.hashed_keys.extend(k for k in keys if k not in self.trace.hashed_keys)
        return keys

    def hash_table_key(self, family: HashFamily, table: int, vector: np.ndarray) -> TableKey:
        """Key of one table only; not recorded among the query's hashed keys."""
        self.ledger.hash_evaluations += family.a.shape[1]
        return table, family.hash_vector(table, vector)

    def read_bucket(self, lsh: LshIndex, table: int, key: BucketKey) -> List[BucketEntry]:
        ptr = lsh.bucket_pointer(table, key)
        if ptr is None:
            return []
        self.trace.bucket_reads.append(ptr)
        return lsh.read_bucket(table, key, self.ledger)

    def load_visual(self, ptr: RecordPointer) -> np.ndarray:
        self.trace.visual_reads.append(ptr)
        _, vector = decode_visual(self.store.file_by_id(ptr.file_id).read(ptr, self.ledger, PageCategory.DATA))
        return vector

    def load_spatial(self, ptr: RecordPointer) -> Tuple[float, float]:
        self.trace.spatial_reads.append(ptr)
        _, point = decode_spatial(self.store.file_by_id(ptr.file_id).read(ptr, self.ledger, PageCategory.DATA))
        return point

    def within(self, vector: np.ndarray, q: np.ndarray, sigma: float) -> bool:
        self.ledger.distance_computations += 1
        return euclidean_distance(vector, q) <= sigma

    def intersect(self, left: Iterable[int], right: Iterable[int]) -> List[int]:
        """Sorted-merge intersection of two ordinal sets."""
        left = sorted(set(left))
        right = sorted(set(right))
        self.ledger.merged_ids += len(left) + len(right)
        out = []
        i = j = 0
        while i < len(left) and j < len(right):
            if left[i] == right[j]:
                out.append(left[i])
                i += 1
                j += 1
            elif left[i] < right[j]:
                i += 1
            else:
                j += 1
        return out


class BuildInputs(NamedTuple):
    """Everything a structure needs to populate itself."""

    dataset: GeoDataset
    spatial_ptrs: List[RecordPointer]
    visual_ptrs: List[RecordPointer]
    keys: List[List[BucketKey]]


class IndexStructure(ABC):
    """
    Common interface of the seven structures.

    A structure owns a PageStore holding the spatial and visual data files, a
    node file for its R*-trees and a bucket file for its LSHs. After the build
    the store is frozen and queries only read from it.

    Attributes:
    tree (RStarTree): primary R*-tree, if any.
    lsh (LshIndex): primary LSH, if any.
    secondary_lsh (dict): leaf page -> secondary LSH (SFI, AugSFI).
    secondary_trees (dict): (table, key) -> secondary R*-tree (VFI, AugVFI).
    """

    kind: ClassVar[IndexKind]

    def __init__(self, store: PageStore, cfg: IndexConfig, family: HashFamily, ids: Sequence[str], dim: int):
        self.store = store
        self.cfg = cfg
        self.family = family
        self.ids = list(ids)
        self.dim = dim
        self.tree: Optional[RStarTree] = None
        self.lsh: Optional[LshIndex] = None
        self.secondary_lsh: Dict[int, LshIndex] = {}
        self.secondary_trees: Dict[TableKey, RStarTree] = {}
        self.build_seconds = 0.0

    @property
    def node_file(self) -> RecordFile:
        return self.store.file(NODE_FILE)

    @property
    def bucket_file(self) -> RecordFile:
        return self.store.file(BUCKET_FILE)

    @property
    def spatial_file(self) -> RecordFile:
        return self.store.file(SPATIAL_FILE)

    @property
    def visual_file(self) -> RecordFile:
        return self.store.file(VISUAL_FILE)

    def __len__(self) -> int:
        return len(self.ids)

    def trees(self) -> List[RStarTree]:
        trees = [self.tree] if self.tree is not None else []
        return trees + [self.secondary_trees[k] for k in sorted(self.secondary_trees)]

    def lsh_indexes(self) -> List[LshIndex]:
        indexes = [self.lsh] if self.lsh is not None else []
        return indexes + [self.secondary_lsh[k] for k in sorted(self.secondary_lsh)]

    def _new_tree(self, augmented: bool) -> RStarTree:
        return RStarTree(self.node_file, self.cfg.rtree, augmented=augmented)

    def _new_lsh(self, layout, scope: int = 0) -> LshIndex:
        return LshIndex(self.family, self.bucket_file, layout, self.visual_file, scope)

    @staticmethod
    def _leaf_entry(inputs: BuildInputs, ordinal: int, augmented: bool) -> LeafEntry:
        visual_ptr = inputs.visual_ptrs[ordinal] if augmented else None
        return LeafEntry(ordinal, inputs.dataset.spatial[ordinal], inputs.spatial_ptrs[ordinal], visual_ptr)

    @abstractmethod
    def populate(self, inputs: BuildInputs):
        """Builds the structure's trees and LSHs into the store."""

    @abstractmethod
    def _search(self, q: SpatialVisualRangeQuery, ctx: QueryContext) -> Tuple[Iterable[int], Dict[str, int]]:
        """Answers q; returns (result ordinals, intermediate sizes)."""

    def query(self, q: SpatialVisualRangeQuery) -> QueryOutcome:
        """
        Answers a spatial-visual range query.

        Returns:
        QueryOutcome: (result ids, QueryStats, QueryTrace).
        """
        if q.dim != self.dim:
            raise DimensionError(f"{self.kind.value}.query: dimension mismatch {q.dim} != {self.dim}")
        ctx = QueryContext(self.store, self.kind)
        ordinals, sizes = self._search(q, ctx)
        stats = QueryStats.from_ledger(ctx.ledger, self.cfg.page_store, sizes)
        ids = frozenset(self.ids[o] for o in ordinals)
        logger.debug("%s %s: %d results, %d pages", self.kind.value, q.qid, len(ids), stats.total_pages)
        return QueryOutcome(ids, stats, ctx.trace)

    def __repr__(self):
        return f"{type(self).__name__}(n={len(self.ids)}, d={self.dim}, files={list(self.store.page_counts())})"

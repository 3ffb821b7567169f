from enum import Enum
from typing import Dict, Iterable, Set, Tuple

from svindex.pagestore.config import PageStoreConfig

PageKey = Tuple[int, int]


class PageCategory(Enum):
    """What a touched page holds: R*-tree nodes, LSH buckets, or data records."""

    RTREE = "rtree"
    LSH = "lsh"
    DATA = "data"


class AccessLedger:
    """
    Per-query record of distinct pages touched, split by category.

    A page touched several times in one query counts once. Each in-flight
    query owns its own ledger. The ledger also counts the CPU-side work of
    the query (hash evaluations, distance computations, merged ids).
    """

    def __init__(self):
        self._pages: Dict[PageCategory, Set[PageKey]] = {category: set() for category in PageCategory}
        # index-overhead work, kept apart from I/O
        self.hash_evaluations = 0
        self.distance_computations = 0
        self.merged_ids = 0

    def touch(self, category: PageCategory, file_id: int, page_ids: Iterable[int]):
        pages = self._pages[category]
        for page_id in page_ids:
            pages.add((file_id, page_id))

    def pages(self, category: PageCategory) -> Set[PageKey]:
        return set(self._pages[category])

    @property
    def pages_rtree(self) -> int:
        return len(self._pages[PageCategory.RTREE])

    @property
    def pages_lsh(self) -> int:
        return len(self._pages[PageCategory.LSH])

    @property
    def pages_index(self) -> int:
        """Index-entity pages: nodes plus buckets."""
        return self.pages_rtree + self.pages_lsh

    @property
    def pages_data(self) -> int:
        return len(self._pages[PageCategory.DATA])

    @property
    def total(self) -> int:
        return self.pages_index + self.pages_data

    def __repr__(self):
        return f"AccessLedger(rtree={self.pages_rtree}, lsh={self.pages_lsh}, data={self.pages_data})"


def query_cost(ledger: AccessLedger, cfg: PageStoreConfig) -> float:
    """Simulated I/O seconds: t_disk * (index pages + data pages)."""
    return cfg.t_disk * (ledger.pages_index + ledger.pages_data)

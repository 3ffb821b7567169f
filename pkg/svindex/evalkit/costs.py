from typing import Iterable, NamedTuple, Set, Tuple

from svindex.core.exceptions import ContractViolation, TraceMismatchError
from svindex.indexes.base import BUCKET_FILE, NODE_FILE, IndexKind, IndexStructure, QueryTrace
from svindex.pagestore.record_file import RecordPointer
from svindex.pagestore.records import SPATIAL_FILE, SPATIAL_SIZE, VISUAL_FILE, visual_record_size


class SpaceCost(NamedTuple):
    """Pages per component: R*-tree nodes, LSH buckets, data records."""

    s_r: int
    s_lsh: int
    s_data: int

    @property
    def total(self) -> int:
        return self.s_r + self.s_lsh + self.s_data


class PredictedQueryCost(NamedTuple):
    t_r: int
    t_lsh: int
    t_data: int

    @property
    def total(self) -> int:
        return self.t_r + self.t_lsh + self.t_data


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def packed_pages(count: int, length: int, page_size: int, padded: bool) -> int:
    """
    Pages taken by `count` records of `length` bytes appended back to back.

    With padding a page holds floor(page_size / length) whole records, and a
    record longer than a page starts on a fresh page.
    """
    if count == 0:
        return 0
    if not padded:
        return _ceil_div(count * length, page_size)
    if length <= page_size:
        return _ceil_div(count, page_size // length)
    return count * _ceil_div(length, page_size)


def analytic_space_cost(index: IndexStructure) -> SpaceCost:
    """
    Predicted space of a built structure from its shape alone.

    S_R is one page per node over every tree, S_LSH the sum of ceil(C(b) / P)
    over every bucket, S_Data the packed pages of the spatial and visual files.
    """
    page_size = index.cfg.page_store.page_size
    padded = index.cfg.page_store.pad_records
    s_r = sum(tree.node_count for tree in index.trees())
    s_lsh = sum(_ceil_div(size, page_size) for lsh in index.lsh_indexes() for size in lsh.bucket_sizes())
    n = len(index)
    s_data = (packed_pages(n, SPATIAL_SIZE, page_size, padded)
              + packed_pages(n, visual_record_size(index.dim), page_size, padded))
    return SpaceCost(s_r, s_lsh, s_data)


def measured_space_cost(index: IndexStructure) -> SpaceCost:
    """Space read from the record files' page counts."""
    counts = index.store.page_counts()
    return SpaceCost(counts[NODE_FILE], counts[BUCKET_FILE], counts[SPATIAL_FILE] + counts[VISUAL_FILE])


# which trace components each structure may produce
_ALLOWED = {
    IndexKind.DI: {"nodes", "buckets", "visual"},
    IndexKind.AUG_RTREE: {"nodes", "visual"},
    IndexKind.AUG_LSH: {"buckets", "visual", "spatial"},
    IndexKind.SFI: {"nodes", "buckets", "visual"},
    IndexKind.VFI: {"nodes", "buckets", "visual"},
    IndexKind.AUG_SFI: {"nodes", "buckets", "visual"},
    IndexKind.AUG_VFI: {"nodes", "visual"},
}


def _record_pages(pointers: Iterable[RecordPointer], page_size: int) -> Set[Tuple[int, int]]:
    return {(ptr.file_id, page) for ptr in pointers for page in ptr.pages(page_size)}


def analytic_query_cost(kind: IndexKind, trace: QueryTrace, page_size: int) -> PredictedQueryCost:
    """
    Predicted (T_R, T_LSH, T_Data) pages of one query from its trace.

    T_R counts distinct node pages, T_LSH sums ceil(C(b) / P) over distinct
    loaded buckets, T_Data counts the distinct pages overlapped by the loaded
    spatial and visual records.

    Parameters:
    kind (IndexKind): structure the trace is evaluated for.
    trace (QueryTrace): what the query read.
    page_size (int): bytes per page.
    """
    if trace.kind is not kind:
        raise TraceMismatchError(f"analytic_query_cost: trace of {trace.kind.value} evaluated as {kind.value}")
    present = set()
    if trace.node_reads:
        present.add("nodes")
    if trace.bucket_reads:
        present.add("buckets")
    if trace.visual_reads:
        present.add("visual")
    if trace.spatial_reads:
        present.add("spatial")
    unexpected = present - _ALLOWED[kind]
    if unexpected:
        raise TraceMismatchError(f"analytic_query_cost: {kind.value} trace holds {sorted(unexpected)} reads")
    if kind is IndexKind.AUG_SFI and set(trace.visited_leaves) & {page for _, page in trace.node_reads}:
        raise TraceMismatchError("analytic_query_cost: AugSFI trace reads leaf pages")

    t_r = len(set(trace.node_reads))
    buckets = set(trace.bucket_reads)
    if any(ptr.offset for ptr in buckets):
        raise ContractViolation("analytic_query_cost: bucket records must start on a page boundary")
    t_lsh = sum(_ceil_div(ptr.length, page_size) for ptr in buckets)
    t_data = len(_record_pages(trace.spatial_reads + trace.visual_reads, page_size))
    return PredictedQueryCost(t_r, t_lsh, t_data)

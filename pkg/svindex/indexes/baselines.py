from typing import Dict, Iterable, List, Tuple

from svindex.core.query import SpatialVisualRangeQuery
from svindex.indexes.base import BuildInputs, IndexKind, IndexStructure, QueryContext
from svindex.lsh.bucket import BucketEntry, EntryLayout


class DualIndex(IndexStructure):
    """DI: an R*-tree and an LSH built independently; the two answers are intersected."""

    kind = IndexKind.DI

    def populate(self, inputs: BuildInputs):
        self.tree = self._new_tree(augmented=False)
        self.lsh = self._new_lsh(EntryLayout.PLAIN)
        for ordinal in range(len(inputs.dataset)):
            self.tree.insert(self._leaf_entry(inputs, ordinal, augmented=False))
            self.lsh.insert_keys(BucketEntry(ordinal, inputs.visual_ptrs[ordinal]), inputs.keys[ordinal])
        self.tree.flush()
        self.lsh.finalize()

    def _search(self, q: SpatialVisualRangeQuery, ctx: QueryContext) -> Tuple[Iterable[int], Dict[str, int]]:
        spatial = [e.ordinal for e in ctx.range_query(self.tree, q.spatial).entries]

        candidates: Dict[int, BucketEntry] = {}
        for table, key in ctx.hash_keys(self.family, [q.query_vector]):
            for entry in ctx.read_bucket(self.lsh, table, key):
                candidates.setdefault(entry.ordinal, entry)
        visual = [o for o, e in candidates.items()
                  if ctx.within(ctx.load_visual(e.visual_ptr), q.query_vector, q.sigma)]

        result = ctx.intersect(spatial, visual)
        return result, {"spatial": len(spatial), "candidates": len(candidates), "visual": len(visual)}


class AugmentedRTree(IndexStructure):
    """Aug R*-tree: leaves carry visual pointers; spatial hits are checked by exact distance."""

    kind = IndexKind.AUG_RTREE

    def populate(self, inputs: BuildInputs):
        self.tree = self._new_tree(augmented=True)
        for ordinal in range(len(inputs.dataset)):
            self.tree.insert(self._leaf_entry(inputs, ordinal, augmented=True))
        self.tree.flush()

    def _search(self, q: SpatialVisualRangeQuery, ctx: QueryContext) -> Tuple[Iterable[int], Dict[str, int]]:
        spatial = ctx.range_query(self.tree, q.spatial).entries
        result = [e.ordinal for e in spatial
                  if ctx.within(ctx.load_visual(e.visual_ptr), q.query_vector, q.sigma)]
        return result, {"spatial": len(spatial)}


class AugmentedLsh(IndexStructure):
    """Aug LSH: bucket entries carry spatial pointers; visual hits are filtered by location."""

    kind = IndexKind.AUG_LSH

    def populate(self, inputs: BuildInputs):
        self.lsh = self._new_lsh(EntryLayout.SPATIAL_POINTER)
        for ordinal in range(len(inputs.dataset)):
            entry = BucketEntry(ordinal, inputs.visual_ptrs[ordinal], inputs.spatial_ptrs[ordinal])
            self.lsh.insert_keys(entry, inputs.keys[ordinal])
        self.lsh.finalize()

    def _search(self, q: SpatialVisualRangeQuery, ctx: QueryContext) -> Tuple[Iterable[int], Dict[str, int]]:
        candidates: Dict[int, BucketEntry] = {}
        for table, key in ctx.hash_keys(self.family, [q.query_vector]):
            for entry in ctx.read_bucket(self.lsh, table, key):
                candidates.setdefault(entry.ordinal, entry)
        visual: List[BucketEntry] = [e for e in candidates.values()
                                     if ctx.within(ctx.load_visual(e.visual_ptr), q.query_vector, q.sigma)]
        result = [e.ordinal for e in visual if q.spatial.contains(ctx.load_spatial(e.spatial_ptr))]
        return result, {"candidates": len(candidates), "visual": len(visual)}

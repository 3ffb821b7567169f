from typing import Dict, Iterable, List, Set, Tuple

from svindex.core.exceptions import BuildError
from svindex.core.query import SpatialVisualRangeQuery
from svindex.core.sampling import derive_seed, sample_in_ball
from svindex.indexes.base import BuildInputs, IndexKind, IndexStructure, QueryContext
from svindex.lsh.bucket import BucketEntry, EntryLayout
from svindex.lsh.index import TableKey
from svindex.rstar.node import LeafEntry

####################################################################
#Spatial first: one primary R*-tree, one secondary LSH per leaf
####################################################################


class SpatialFirstIndex(IndexStructure):
    """
    SFI: the primary R*-tree selects leaves; each selected leaf's secondary
    LSH answers the visual part, and the spatial hits of those leaves are
    intersected with the visual hits.
    """

    kind = IndexKind.SFI
    secondary_layout = EntryLayout.PLAIN

    def _secondary_entry(self, inputs: BuildInputs, ordinal: int) -> BucketEntry:
        return BucketEntry(ordinal, inputs.visual_ptrs[ordinal])

    def populate(self, inputs: BuildInputs):
        self.tree = self._new_tree(augmented=False)
        for ordinal in range(len(inputs.dataset)):
            self.tree.insert(self._leaf_entry(inputs, ordinal, augmented=False))
        self.tree.flush()

        for leaf_page, entries in self.tree.leaf_iterate():
            if not entries:
                continue
            lsh = self._new_lsh(self.secondary_layout, scope=leaf_page)
            for leaf_entry in entries:
                lsh.insert_keys(self._secondary_entry(inputs, leaf_entry.ordinal), inputs.keys[leaf_entry.ordinal])
            lsh.finalize()
            self.secondary_lsh[leaf_page] = lsh

    def _search_leaves(self, leaves: Iterable[int], keys: List[TableKey],
                       ctx: QueryContext) -> Dict[int, BucketEntry]:
        candidates: Dict[int, BucketEntry] = {}
        for leaf_page in leaves:
            lsh = self.secondary_lsh.get(leaf_page)
            if lsh is None:
                continue
            for table, key in keys:
                for entry in ctx.read_bucket(lsh, table, key):
                    candidates.setdefault(entry.ordinal, entry)
        return candidates

    def _search(self, q: SpatialVisualRangeQuery, ctx: QueryContext) -> Tuple[Iterable[int], Dict[str, int]]:
        found = ctx.range_query(self.tree, q.spatial)
        spatial = [e.ordinal for e in found.entries]
        leaves = [page for page in found.visited_pages if self.tree.node(page).is_leaf]

        keys = ctx.hash_keys(self.family, [q.query_vector])
        candidates = self._search_leaves(leaves, keys, ctx)
        visual = [o for o, e in candidates.items()
                  if ctx.within(ctx.load_visual(e.visual_ptr), q.query_vector, q.sigma)]

        result = ctx.intersect(spatial, visual)
        return result, {"leaves": len(leaves), "spatial": len(spatial),
                        "candidates": len(candidates), "visual": len(visual)}


class AugmentedSpatialFirstIndex(SpatialFirstIndex):
    """
    Aug SFI: secondary bucket entries carry the image location, so leaves are
    selected from their parents' entries and candidates are filtered
    spatially before any visual record is read.

    With explore_visual = E.v > 0 every selected leaf is also searched with
    the keys of E.v vectors drawn from the ball of radius sigma around the
    query vector, seeded from (query seed, leaf page).
    """

    kind = IndexKind.AUG_SFI
    secondary_layout = EntryLayout.INLINE_POINT

    def _secondary_entry(self, inputs: BuildInputs, ordinal: int) -> BucketEntry:
        return BucketEntry(ordinal, inputs.visual_ptrs[ordinal], point=inputs.dataset.spatial[ordinal])

    def _search(self, q: SpatialVisualRangeQuery, ctx: QueryContext) -> Tuple[Iterable[int], Dict[str, int]]:
        leaves = ctx.overlapping_leaves(self.tree, q.spatial).leaf_pages
        query_keys = ctx.hash_keys(self.family, [q.query_vector])

        candidates: Dict[int, BucketEntry] = {}
        for leaf_page in leaves:
            keys = query_keys
            if q.explore_visual:
                samples = sample_in_ball(q.query_vector, q.sigma, q.explore_visual, derive_seed(q.seed, leaf_page))
                keys = query_keys + [k for k in ctx.hash_keys(self.family, samples) if k not in query_keys]
            for ordinal, entry in self._search_leaves([leaf_page], keys, ctx).items():
                candidates.setdefault(ordinal, entry)

        in_range = [e for e in candidates.values() if q.spatial.contains(e.point)]
        result = [e.ordinal for e in in_range
                  if ctx.within(ctx.load_visual(e.visual_ptr), q.query_vector, q.sigma)]
        return result, {"leaves": len(leaves), "candidates": len(candidates), "spatial": len(in_range)}


####################################################################
#Visual first: one primary LSH, one secondary R*-tree per bucket
####################################################################


class VisualFirstIndex(IndexStructure):
    """
    VFI: the primary LSH selects buckets and filters their members by exact
    distance; secondary R*-trees of the selected buckets answer the spatial
    part, and the two answers are intersected.

    Secondary trees exist for the buckets of every table. Only the fewest
    query-bucket trees that together hold every visual hit are searched,
    so a query without visual hits reads no tree. With
    `vfi_anchor_first_table` only first-table buckets own a tree, and visual hits
    are routed to the tree of their first-table bucket.
    """

    kind = IndexKind.VFI
    primary_layout = EntryLayout.PLAIN
    secondary_augmented = False

    @property
    def anchored(self) -> bool:
        return self.cfg.vfi_anchor_first_table

    def _primary_entry(self, inputs: BuildInputs, ordinal: int) -> BucketEntry:
        return BucketEntry(ordinal, inputs.visual_ptrs[ordinal])

    def populate(self, inputs: BuildInputs):
        self.lsh = self._new_lsh(self.primary_layout)
        for ordinal in range(len(inputs.dataset)):
            self.lsh.insert_keys(self._primary_entry(inputs, ordinal), inputs.keys[ordinal])
        self.lsh.finalize()

        for table, key, entries in self.lsh.buckets():
            if self.anchored and table != 0:
                continue
            tree = self._new_tree(augmented=self.secondary_augmented)
            for bucket_entry in entries:
                tree.insert(self._leaf_entry(inputs, bucket_entry.ordinal, self.secondary_augmented))
            tree.flush()
            self.secondary_trees[(table, key)] = tree

    def _search(self, q: SpatialVisualRangeQuery, ctx: QueryContext) -> Tuple[Iterable[int], Dict[str, int]]:
        keys = ctx.hash_keys(self.family, [q.query_vector])
        candidates: Dict[int, BucketEntry] = {}
        members: Dict[TableKey, Set[int]] = {}
        for table, key in keys:
            bucket = ctx.read_bucket(self.lsh, table, key)
            members[(table, key)] = {entry.ordinal for entry in bucket}
            for entry in bucket:
                candidates.setdefault(entry.ordinal, entry)

        visual = []
        anchors: List[TableKey] = []
        for ordinal, entry in candidates.items():
            vector = ctx.load_visual(entry.visual_ptr)
            if ctx.within(vector, q.query_vector, q.sigma):
                visual.append(ordinal)
                if self.anchored:
                    anchor = ctx.hash_table_key(self.family, 0, vector)
                    if anchor not in anchors:
                        anchors.append(anchor)
        tree_keys = anchors if self.anchored else self._covering_trees(members, visual)

        spatial = []
        for table_key in tree_keys:
            spatial.extend(e.ordinal for e in ctx.range_query(self.secondary_trees[table_key], q.spatial).entries)

        result = ctx.intersect(spatial, visual)
        return result, {"candidates": len(candidates), "visual": len(visual),
                        "trees": len(tree_keys), "spatial": len(spatial)}

    def _covering_trees(self, members: Dict[TableKey, Set[int]], visual: List[int]) -> List[TableKey]:
        """
        Greedy cover of the visual hits by query-bucket trees.

        Each round takes the tree holding the most uncovered hits, ties going
        to the earlier table. No hits means no tree is read.
        """
        uncovered = set(visual)
        available = [k for k in members if k in self.secondary_trees]
        chosen: List[TableKey] = []
        while uncovered and available:
            best = max(available, key=lambda k: len(members[k] & uncovered))
            if not members[best] & uncovered:
                break
            chosen.append(best)
            available.remove(best)
            uncovered -= members[best]
        return chosen


class AugmentedVisualFirstIndex(VisualFirstIndex):
    """
    Aug VFI: the primary LSH only routes; its buckets name their members and
    are never read. Secondary tree leaves carry visual pointers, so spatial
    hits are checked by exact distance directly.

    With explore_spatial = E.s > 0 the secondary trees are searched with the
    query rectangle enlarged by (1 + E.s) per side.
    """

    kind = IndexKind.AUG_VFI
    primary_layout = EntryLayout.ORDINAL_ONLY
    secondary_augmented = True

    def _primary_entry(self, inputs: BuildInputs, ordinal: int) -> BucketEntry:
        return BucketEntry(ordinal)

    def populate(self, inputs: BuildInputs):
        if self.anchored:
            raise BuildError("AugVFI: secondary trees must cover every table; vfi_anchor_first_table is not supported")
        super().populate(inputs)

    def _search(self, q: SpatialVisualRangeQuery, ctx: QueryContext) -> Tuple[Iterable[int], Dict[str, int]]:
        rect = q.explored_rect()
        hits: Dict[int, LeafEntry] = {}
        trees = 0
        for table_key in ctx.hash_keys(self.family, [q.query_vector]):
            tree = self.secondary_trees.get(table_key)
            if tree is None:
                continue
            trees += 1
            for entry in ctx.range_query(tree, rect).entries:
                hits.setdefault(entry.ordinal, entry)

        result = [o for o, e in hits.items()
                  if ctx.within(ctx.load_visual(e.visual_ptr), q.query_vector, q.sigma)]
        return result, {"trees": trees, "spatial": len(hits)}

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from svindex.core.exceptions import BuildError, ConfigError, ContractViolation, DimensionError, FormatError, \
    TraceMismatchError
from svindex.core.geo_image import GeoDataset
from svindex.core.query import SpatialVisualRangeQuery
from svindex.core.rect import Rect
from svindex.evalkit.classify import lsh_visible
from svindex.evalkit.costs import analytic_query_cost, analytic_space_cost, measured_space_cost, packed_pages
from svindex.evalkit.oracle import oracle_query
from svindex.indexes.base import IndexConfig, IndexKind
from svindex.indexes.factory import build, query_aug_lsh, query_aug_rtree, query_aug_sfi, query_aug_vfi, query_di, \
    query_sfi, query_vfi
from svindex.indexes.manifest import MANIFEST, open_index, save_index
from svindex.lsh.bucket import EntryLayout, bucket_size
from svindex.lsh.hash_family import HashFamily
from svindex.rstar.tree import RTreeParams

APPROXIMATE = [IndexKind.DI, IndexKind.AUG_LSH, IndexKind.SFI, IndexKind.VFI, IndexKind.AUG_SFI, IndexKind.AUG_VFI]


def visible_answer(dataset, family, q, ids):
    return {i for i in ids if lsh_visible(family, dataset[dataset.ordinal(i)].v, q.query_vector)}


class TestAnswers:

    def test_aug_rtree_is_exact(self, small_indexes, small_dataset, small_workload):
        for q in small_workload:
            assert small_indexes[IndexKind.AUG_RTREE].query(q).ids == oracle_query(small_dataset, q).strict

    @pytest.mark.parametrize("kind", APPROXIMATE)
    def test_lsh_structures_return_visible_answer(self, kind, small_indexes, small_dataset, small_family,
                                                  small_workload):
        for q in small_workload:
            strict = oracle_query(small_dataset, q).strict
            assert small_indexes[kind].query(q).ids == visible_answer(small_dataset, small_family, q, strict)

    @pytest.mark.parametrize("kind", list(IndexKind))
    def test_no_false_positives(self, kind, small_indexes, small_dataset, small_workload):
        for q in small_workload:
            assert small_indexes[kind].query(q).ids <= oracle_query(small_dataset, q).strict

    def test_workload_is_not_trivial(self, small_dataset, small_workload):
        sizes = [len(oracle_query(small_dataset, q).strict) for q in small_workload]
        assert min(sizes) >= 1
        assert max(sizes) >= 3

    def test_anchored_vfi_matches_dual_index(self, small_dataset, small_config, small_family, small_indexes,
                                             small_workload):
        anchored_cfg = IndexConfig(page_store=small_config.page_store, rtree=small_config.rtree,
                                   tables=small_config.tables, functions_per_table=small_config.functions_per_table,
                                   lsh_seed=small_config.lsh_seed, vfi_anchor_first_table=True)
        anchored = build(IndexKind.VFI, small_dataset, anchored_cfg, small_family)
        assert {table for table, _ in anchored.secondary_trees} == {0}
        for q in small_workload:
            assert anchored.query(q).ids == small_indexes[IndexKind.DI].query(q).ids


class TestExploration:

    def test_visual_exploration_only_adds(self, small_indexes, small_workload):
        index = small_indexes[IndexKind.AUG_SFI]
        for q in small_workload:
            plain = index.query(q).ids
            explored = index.query(q.with_exploration(explore_visual=9)).ids
            assert plain <= explored

    def test_visual_exploration_is_seeded(self, small_indexes, small_workload):
        index = small_indexes[IndexKind.AUG_SFI]
        q = small_workload[0].with_exploration(explore_visual=9)
        first, second = index.query(q), index.query(q)
        assert first.ids == second.ids
        assert first.stats == second.stats

    def test_spatial_exploration_answers_explored_rect(self, small_indexes, small_dataset, small_family,
                                                       small_workload):
        index = small_indexes[IndexKind.AUG_VFI]
        for q in small_workload:
            explored = q.with_exploration(explore_spatial=0.5)
            truth = oracle_query(small_dataset, explored)
            ids = index.query(explored).ids
            assert ids == visible_answer(small_dataset, small_family, explored, truth.extended)
            assert index.query(q).ids <= ids


class TestPageOrderings:

    def test_aug_sfi_never_reads_more_than_sfi(self, small_indexes, small_workload):
        for q in small_workload:
            aug = small_indexes[IndexKind.AUG_SFI].query(q).stats
            plain = small_indexes[IndexKind.SFI].query(q).stats
            assert aug.total_pages <= plain.total_pages
            assert aug.pages_lsh == plain.pages_lsh
            assert aug.pages_rtree <= plain.pages_rtree

    @given(st.integers(min_value=2, max_value=300), st.integers(min_value=64, max_value=16384))
    def test_full_leaf_bucket_fits_one_page(self, fan_out, page_size):
        # leaf buckets of SFI and AugSFI then both take one page each
        params = RTreeParams(fan_out=fan_out)
        try:
            params.check_page_size(page_size, augmented=False)
        except ConfigError:
            assume(False)
        assert bucket_size(EntryLayout.INLINE_POINT, fan_out) <= page_size
        assert bucket_size(EntryLayout.PLAIN, fan_out) <= page_size

    def test_aug_vfi_never_reads_more_than_vfi(self, small_indexes, small_workload):
        for q in small_workload:
            aug = small_indexes[IndexKind.AUG_VFI].query(q).stats
            plain = small_indexes[IndexKind.VFI].query(q).stats
            assert aug.pages_lsh == 0
            assert aug.pages_rtree >= plain.pages_rtree
            assert aug.total_pages <= plain.total_pages

    def test_vfi_searches_only_trees_holding_visual_hits(self, small_indexes, small_workload):
        index = small_indexes[IndexKind.VFI]
        for q in small_workload:
            sizes = index.query(q).stats.intermediate_sizes
            assert sizes["trees"] <= min(sizes["visual"], index.cfg.tables)
            assert (sizes["trees"] == 0) == (sizes["visual"] == 0)

    def test_vfi_reads_no_tree_without_visual_hits(self, small_indexes, small_workload):
        q = small_workload[0]
        missed = SpatialVisualRangeQuery(q.spatial, q.query_vector + 1.0e-9, 0.0, qid="missed")
        outcome = small_indexes[IndexKind.VFI].query(missed)
        assert outcome.stats.intermediate_sizes["candidates"] > 0
        assert outcome.stats.intermediate_sizes["visual"] == 0
        assert outcome.stats.pages_rtree == 0
        assert outcome.trace.node_reads == []

    def test_aug_sfi_reads_no_leaf_page(self, small_indexes, small_workload):
        index = small_indexes[IndexKind.AUG_SFI]
        for q in small_workload:
            trace = index.query(q).trace
            read = {page for _, page in trace.node_reads}
            assert not read & set(trace.visited_leaves)

    def test_simulated_time(self, small_indexes, small_config, small_workload):
        t_disk = small_config.page_store.t_disk
        for kind, index in small_indexes.items():
            stats = index.query(small_workload[0]).stats
            assert stats.simulated_time == pytest.approx(t_disk * stats.total_pages)


class TestCostModel:

    @pytest.mark.parametrize("kind", list(IndexKind))
    def test_analytic_query_cost_matches_ledger(self, kind, small_indexes, small_config, small_workload):
        page_size = small_config.page_store.page_size
        for q in small_workload:
            outcome = small_indexes[kind].query(q)
            predicted = analytic_query_cost(kind, outcome.trace, page_size)
            stats = outcome.stats
            assert (predicted.t_r, predicted.t_lsh, predicted.t_data) == \
                (stats.pages_rtree, stats.pages_lsh, stats.pages_data)

    @pytest.mark.parametrize("kind", list(IndexKind))
    def test_analytic_space_cost_matches_files(self, kind, small_indexes):
        assert analytic_space_cost(small_indexes[kind]) == measured_space_cost(small_indexes[kind])

    def test_trace_kind_mismatch(self, small_indexes, small_config, small_workload):
        trace = small_indexes[IndexKind.SFI].query(small_workload[0]).trace
        with pytest.raises(TraceMismatchError):
            analytic_query_cost(IndexKind.DI, trace, small_config.page_store.page_size)

    def test_packed_pages(self):
        assert packed_pages(0, 20, 4096, True) == 0
        assert packed_pages(205, 20, 4096, True) == 2
        assert packed_pages(205, 20, 4096, False) == 2
        assert packed_pages(3, 5000, 4096, True) == 6
        assert packed_pages(3, 5000, 4096, False) == 4

    def test_hybrids_use_more_index_space(self, small_indexes):
        space = {kind: measured_space_cost(index) for kind, index in small_indexes.items()}
        assert space[IndexKind.AUG_LSH].s_r == 0
        assert space[IndexKind.AUG_RTREE].s_lsh == 0
        assert space[IndexKind.VFI].s_r > space[IndexKind.DI].s_r
        assert len({s.s_data for s in space.values()}) == 1


class TestPersistence:

    @pytest.mark.parametrize("kind", list(IndexKind))
    def test_reopened_index_answers_identically(self, kind, small_indexes, small_workload, tmp_path):
        save_index(small_indexes[kind], tmp_path)
        reopened = open_index(tmp_path)
        assert reopened.kind is kind
        assert reopened.ids == small_indexes[kind].ids
        for q in small_workload[:8]:
            before, after = small_indexes[kind].query(q), reopened.query(q)
            assert before.ids == after.ids
            assert before.stats.total_pages == after.stats.total_pages

    def test_bad_manifest(self, small_indexes, tmp_path):
        save_index(small_indexes[IndexKind.DI], tmp_path)
        (tmp_path / MANIFEST).write_text("format=something-else\nversion=1\n")
        with pytest.raises(FormatError):
            open_index(tmp_path)


class TestErrors:

    def test_empty_dataset(self):
        with pytest.raises(BuildError):
            build(IndexKind.DI, GeoDataset([], dim=2))

    def test_family_dimension(self, small_dataset, example_family):
        with pytest.raises(BuildError):
            build(IndexKind.DI, small_dataset, family=example_family)

    def test_query_dimension(self, small_indexes):
        q = SpatialVisualRangeQuery(Rect(0, 0, 1, 1), np.zeros(3), 0.5)
        with pytest.raises(DimensionError):
            small_indexes[IndexKind.SFI].query(q)

    @pytest.mark.parametrize("kind, entry_point", [
        (IndexKind.DI, query_di), (IndexKind.AUG_RTREE, query_aug_rtree), (IndexKind.AUG_LSH, query_aug_lsh),
        (IndexKind.SFI, query_sfi), (IndexKind.VFI, query_vfi), (IndexKind.AUG_SFI, query_aug_sfi),
        (IndexKind.AUG_VFI, query_aug_vfi),
    ])
    def test_typed_entry_points(self, kind, entry_point, small_indexes, small_workload):
        q = small_workload[0]
        assert entry_point(small_indexes[kind], q).ids == small_indexes[kind].query(q).ids
        other = IndexKind.SFI if kind is IndexKind.DI else IndexKind.DI
        with pytest.raises(ContractViolation):
            entry_point(small_indexes[other], q)

    def test_aug_vfi_rejects_anchoring(self, small_dataset):
        with pytest.raises(BuildError):
            build(IndexKind.AUG_VFI, small_dataset, IndexConfig(vfi_anchor_first_table=True))

    def test_unknown_kind(self):
        assert IndexKind.parse("augsfi") is IndexKind.AUG_SFI
        with pytest.raises(ConfigError):
            IndexKind.parse("quadtree")

    def test_default_family_is_derived(self, example_dataset):
        index = build(IndexKind.AUG_LSH, example_dataset, IndexConfig(tables=2, functions_per_table=2))
        assert isinstance(index.family, HashFamily)
        assert index.family.dim == 2

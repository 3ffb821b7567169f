import math

import pandas as pd
import pytest

from svindex.core.exceptions import ContractViolation, IncomparableWorkloadError
from svindex.core.query import ResultClass, SpatialVisualRangeQuery
from svindex.evalkit.classify import class_counts, classify
from svindex.evalkit.metrics import REPORT_COLUMNS, evaluate_query, precision, recall, report_frame, summarize, \
    trimmed_mean
from svindex.evalkit.oracle import GroundTruth, explored_answer, oracle_query
from svindex.evalkit.orderings import MEAN_QUERY_SHARE, ORDERING_COLUMNS, PER_QUERY, ordering_report
from svindex.indexes.base import IndexKind
from svindex.workbench.running_example import running_example_query


def report_rows(pages):
    """pages: {structure: [total pages per query]}; all pages charged to the R*-tree column."""
    rows = []
    for structure, per_query in pages.items():
        for i, total in enumerate(per_query):
            rows.append({"qid": f"q{i}", "structure": structure, "pages_rtree": total, "pages_lsh": 0,
                         "pages_data": 0, "sim_time": 0.01 * total, "result_count": 1, "recall": 1.0,
                         "precision": 1.0, "sv_match": 1, "s_unmatch": 0, "v_unmatch": 0})
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


class TestMetrics:

    def test_recall(self):
        assert recall(frozenset({"a", "b"}), frozenset({"a", "c", "d", "e"})) == 0.25
        assert recall(frozenset({"a"}), frozenset()) is None

    def test_precision(self):
        assert precision(frozenset(), frozenset({"a"})) == 1.0
        assert precision(frozenset({"a", "x"}), frozenset({"a"})) == 0.5

    def test_trimmed_mean(self):
        assert trimmed_mean([100.0, 1.0, 2.0, 3.0, 0.0]) == 2.0
        assert trimmed_mean([4.0, 6.0]) == 5.0
        assert trimmed_mean([]) == 0.0

    def test_empty_truth_drops_out_of_recall_mean(self):
        frame = report_rows({"DI": [3, 5]})
        frame.loc[1, "recall"] = None
        frame["recall"] = pd.to_numeric(frame["recall"]).astype(float)
        summary = summarize(frame)
        row = summary.iloc[0]
        assert row.queries == 2
        assert row.mean_recall == 1.0
        assert row.mean_pages == 4.0

    def test_summarize_empty(self):
        assert summarize(report_rows({})).empty


class TestOracle:

    def test_strict_within_extended(self):
        with pytest.raises(ContractViolation):
            GroundTruth(frozenset({"a"}), frozenset())

    def test_explored_answer_defaults_to_strict(self, example_dataset, example_query):
        assert explored_answer(example_dataset, example_query) == {"I3", "I4", "I9"}
        assert explored_answer(example_dataset, example_query.with_exploration(1.5)) == \
            {"I3", "I4", "I5", "I8", "I9"}


class TestClassify:

    def test_irrelevant_image_rejected(self, example_query):
        truth = GroundTruth(frozenset({"I3"}), frozenset({"I3"}))
        with pytest.raises(ContractViolation):
            classify("I1", example_query, truth, visible=True)

    def test_class_counts_cover_every_class(self, example_query):
        truth = GroundTruth(frozenset({"a", "b"}), frozenset({"a", "b", "c"}), 1.0)
        counts = class_counts(["a", "b", "c"], example_query, truth, lambda image_id: image_id == "a")
        assert counts == {ResultClass.SV_MATCH_REL: 1, ResultClass.S_UNMATCH_REL: 1, ResultClass.V_UNMATCH_REL: 1}


class TestEvaluate:

    def test_report_row(self, example_indexes, example_dataset, example_family, example_query):
        truth = oracle_query(example_dataset, example_query, 1.5)
        outcome = example_indexes[IndexKind.DI].query(example_query)
        row = evaluate_query("DI", IndexKind.DI, outcome, example_query, truth, example_dataset, example_family)
        assert row.recall == pytest.approx(2 / 3)
        assert row.precision == 1.0
        assert (row.sv_match, row.s_unmatch, row.v_unmatch) == (2, 0, 0)
        assert row.total_pages == 8
        frame = report_frame([row])
        assert list(frame.columns) == REPORT_COLUMNS

    def test_aug_vfi_judged_on_explored_rect(self, example_indexes, example_dataset, example_family):
        q = running_example_query(explore_spatial=1.5)
        truth = oracle_query(example_dataset, q, 1.5)
        outcome = example_indexes[IndexKind.AUG_VFI].query(q)
        row = evaluate_query("AugVFI-E", IndexKind.AUG_VFI, outcome, q, truth, example_dataset, example_family)
        assert row.recall == pytest.approx(4 / 5)
        assert row.s_unmatch == 2

    def test_truth_must_cover_exploration(self, example_indexes, example_dataset, example_family):
        q = running_example_query(explore_spatial=1.5)
        truth = oracle_query(example_dataset, q.with_exploration(0.0))
        outcome = example_indexes[IndexKind.AUG_VFI].query(q)
        with pytest.raises(ContractViolation):
            evaluate_query("AugVFI-E", IndexKind.AUG_VFI, outcome, q, truth, example_dataset, example_family)

    def test_empty_truth_has_no_recall(self, example_indexes, example_dataset, example_family, example_query):
        far = SpatialVisualRangeQuery(example_query.spatial, example_query.query_vector + 100.0, example_query.sigma,
                                      qid="far")
        truth = oracle_query(example_dataset, far)
        outcome = example_indexes[IndexKind.DI].query(far)
        row = evaluate_query("DI", IndexKind.DI, outcome, far, truth, example_dataset, example_family)
        assert row.recall is None
        assert math.isnan(report_frame([row]).recall.iloc[0])


class TestOrderings:

    def test_needs_two_structures(self):
        with pytest.raises(IncomparableWorkloadError):
            ordering_report(report_rows({"SFI": [1, 2]}))

    def test_query_sets_must_match(self):
        report = report_rows({"SFI": [1, 2], "AugSFI": [1, 1]})
        report = report[~((report.structure == "AugSFI") & (report.qid == "q1"))]
        with pytest.raises(IncomparableWorkloadError):
            ordering_report(report)

    def test_verdicts(self):
        verdicts = ordering_report(report_rows({
            "SFI": [4, 6, 8],
            "AugSFI": [3, 7, 2],
            "DI": [5, 5, 10],
            "AugRTree": [1, 1, 1],
        }))
        assert list(verdicts.columns) == ORDERING_COLUMNS
        by_name = verdicts.set_index("ordering")
        assert set(by_name.index) == {"AugSFI<=SFI", "SFI<=DI", "SFI<=AugRTree"}

        per_query = by_name.loc["AugSFI<=SFI"]
        assert per_query.scope == PER_QUERY
        assert per_query.satisfied_rate == pytest.approx(2 / 3)
        assert not per_query.holds
        assert not by_name.loc["SFI<=AugRTree"].holds
        assert by_name.loc["SFI<=DI"].mean_left == pytest.approx(6.0)

    def test_mean_ordering_needs_most_queries(self):
        # means 6 <= 6.67 but only two of three queries satisfy SFI<=DI
        verdicts = ordering_report(report_rows({"SFI": [4, 6, 8], "DI": [5, 5, 10]})).set_index("ordering")
        row = verdicts.loc["SFI<=DI"]
        assert row.mean_left <= row.mean_right
        assert row.satisfied_rate == pytest.approx(2 / 3)
        assert not row.holds

    def test_mean_ordering_tolerates_a_few_queries(self):
        sfi = [2] * 9 + [9]
        di = [3] * 9 + [5]
        row = ordering_report(report_rows({"SFI": sfi, "DI": di})).set_index("ordering").loc["SFI<=DI"]
        assert row.satisfied_rate == pytest.approx(MEAN_QUERY_SHARE)
        assert row.holds

import logging
from dataclasses import asdict, dataclass
from typing import FrozenSet, Iterable, List, Optional

import numpy as np
import pandas as pd

from svindex.core.exceptions import ContractViolation
from svindex.core.geo_image import GeoDataset
from svindex.core.query import ResultClass, SpatialVisualRangeQuery
from svindex.evalkit.classify import class_counts, lsh_visible
from svindex.evalkit.oracle import GroundTruth, oracle_query
from svindex.indexes.base import IndexKind, QueryOutcome
from svindex.lsh.hash_family import HashFamily

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["qid", "structure", "pages_rtree", "pages_lsh", "pages_data", "sim_time", "result_count",
                  "recall", "precision", "sv_match", "s_unmatch", "v_unmatch"]


def recall(result: FrozenSet[str], truth: FrozenSet[str]) -> Optional[float]:
    """|result & truth| / |truth|; None when truth is empty."""
    if not truth:
        return None
    return len(result & truth) / len(truth)


def precision(result: FrozenSet[str], truth: FrozenSet[str]) -> float:
    """|result & truth| / |result|; 1 for an empty result."""
    if not result:
        return 1.0
    return len(result & truth) / len(result)


def effective_truth(kind: IndexKind, q: SpatialVisualRangeQuery, truth: GroundTruth,
                    dataset: GeoDataset) -> FrozenSet[str]:
    """
    The answer a structure is judged against: the strict answer, except for
    Aug VFI whose explored rectangle defines its answer.
    """
    if kind is IndexKind.AUG_VFI and q.explore_spatial > 0.0:
        if q.explore_spatial == truth.explore_spatial_max:
            return truth.extended
        return oracle_query(dataset, q).extended
    return truth.strict


@dataclass(frozen=True)
class QueryEvaluation:
    """One row of the per-query report."""

    qid: str
    structure: str
    pages_rtree: int
    pages_lsh: int
    pages_data: int
    sim_time: float
    result_count: int
    recall: Optional[float]
    precision: float
    sv_match: int
    s_unmatch: int
    v_unmatch: int

    @property
    def total_pages(self) -> int:
        return self.pages_rtree + self.pages_lsh + self.pages_data


def evaluate_query(structure: str, kind: IndexKind, outcome: QueryOutcome, q: SpatialVisualRangeQuery,
                   truth: GroundTruth, dataset: GeoDataset, family: HashFamily) -> QueryEvaluation:
    """
    Scores one query answer against the oracle.

    Parameters:
    structure (str): report label, e.g. "AugSFI-E".
    kind (IndexKind): structure kind that produced the outcome.
    outcome (QueryOutcome): result ids and stats.
    q (SpatialVisualRangeQuery): the query as run.
    truth (GroundTruth): oracle answers; its extended rectangle must cover the query's exploration.
    dataset (GeoDataset): the indexed images.
    family (HashFamily): hash family of the structure, for LSH visibility.
    """
    if q.explore_spatial > truth.explore_spatial_max:
        raise ContractViolation(
            f"evaluate_query: ground truth covers E.s {truth.explore_spatial_max}, query uses {q.explore_spatial}")
    judged = effective_truth(kind, q, truth, dataset)
    if not judged:
        logger.debug("%s %s: empty ground truth, recall skipped", structure, q.qid)

    def is_visible(image_id: str) -> bool:
        return lsh_visible(family, dataset[dataset.ordinal(image_id)].v, q.query_vector)

    counts = class_counts(outcome.ids, q, truth, is_visible)
    stats = outcome.stats
    return QueryEvaluation(
        qid=q.qid,
        structure=structure,
        pages_rtree=stats.pages_rtree,
        pages_lsh=stats.pages_lsh,
        pages_data=stats.pages_data,
        sim_time=stats.simulated_time,
        result_count=len(outcome.ids),
        recall=recall(outcome.ids, judged),
        precision=precision(outcome.ids, judged),
        sv_match=counts[ResultClass.SV_MATCH_REL],
        s_unmatch=counts[ResultClass.S_UNMATCH_REL],
        v_unmatch=counts[ResultClass.V_UNMATCH_REL],
    )


def report_frame(evaluations: Iterable[QueryEvaluation]) -> pd.DataFrame:
    """Per-query rows in report column order."""
    rows = [asdict(e) for e in evaluations]
    frame = pd.DataFrame(rows, columns=REPORT_COLUMNS)
    # None recall (empty truth) becomes NaN
    frame["recall"] = pd.to_numeric(frame["recall"], errors="coerce").astype(float)
    return frame


def summarize(report: pd.DataFrame) -> pd.DataFrame:
    """
    Per-structure workload means.

    Queries with empty ground truth have no recall and drop out of the recall
    mean only.
    """
    if report.empty:
        return pd.DataFrame(columns=["structure", "queries", "mean_pages", "mean_pages_rtree", "mean_pages_lsh",
                                     "mean_pages_data", "mean_sim_time", "mean_recall", "mean_precision",
                                     "sv_match", "s_unmatch", "v_unmatch"])
    frame = report.assign(total_pages=report.pages_rtree + report.pages_lsh + report.pages_data)
    grouped = frame.groupby("structure", sort=False)
    summary = pd.DataFrame({
        "queries": grouped.size(),
        "mean_pages": grouped.total_pages.mean(),
        "mean_pages_rtree": grouped.pages_rtree.mean(),
        "mean_pages_lsh": grouped.pages_lsh.mean(),
        "mean_pages_data": grouped.pages_data.mean(),
        "mean_sim_time": grouped.sim_time.mean(),
        "mean_recall": grouped.recall.mean(),
        "mean_precision": grouped.precision.mean(),
        "sv_match": grouped.sv_match.sum(),
        "s_unmatch": grouped.s_unmatch.sum(),
        "v_unmatch": grouped.v_unmatch.sum(),
    })
    return summary.reset_index()


def trimmed_mean(samples: List[float]) -> float:
    """Mean after dropping the single longest and shortest sample (when there are at least 3)."""
    ordered = sorted(samples)
    if len(ordered) >= 3:
        ordered = ordered[1:-1]
    return float(np.mean(ordered)) if ordered else 0.0

import logging
from typing import List, NamedTuple

import pandas as pd

from svindex.core.exceptions import IncomparableWorkloadError

logger = logging.getLogger(__name__)

PER_QUERY = "per-query"
WORKLOAD_MEAN = "mean"
# share of queries a mean-scope ordering must also satisfy one by one
MEAN_QUERY_SHARE = 0.9

ORDERING_COLUMNS = ["ordering", "left", "right", "scope", "queries", "satisfied_rate", "mean_left", "mean_right",
                    "holds"]


class PageOrdering(NamedTuple):
    """pages(left) <= pages(right), checked on every query or on workload means."""

    left: str
    right: str
    scope: str

    @property
    def name(self) -> str:
        return f"{self.left}<={self.right}"


PAGE_ORDERINGS: List[PageOrdering] = [
    PageOrdering("SFI", "AugRTree", WORKLOAD_MEAN),
    PageOrdering("SFI", "DI", WORKLOAD_MEAN),
    PageOrdering("VFI", "AugLSH", WORKLOAD_MEAN),
    PageOrdering("VFI", "DI", WORKLOAD_MEAN),
    PageOrdering("AugSFI", "SFI", PER_QUERY),
    PageOrdering("AugSFI-E", "AugRTree", WORKLOAD_MEAN),
    PageOrdering("AugVFI", "VFI", PER_QUERY),
    PageOrdering("AugVFI-E", "AugLSH", WORKLOAD_MEAN),
]


def _pages_by_query(report: pd.DataFrame, structure: str) -> pd.Series:
    rows = report[report.structure == structure]
    pages = rows.pages_rtree + rows.pages_lsh + rows.pages_data
    return pd.Series(pages.to_numpy(), index=rows.qid.to_numpy()).sort_index()


def ordering_report(report: pd.DataFrame) -> pd.DataFrame:
    """
    Verdicts of the page-access orderings between structures.

    An ordering whose structures are both in the report is checked on the
    queries they share: per-query orderings hold only when every query
    satisfies them, the others when the left workload mean is at most the
    right one and at least MEAN_QUERY_SHARE of the queries satisfy them.
    Orderings with a structure absent from the report are skipped.

    Parameters:
    report (pd.DataFrame): per-query rows as produced by report_frame.

    Returns:
    pd.DataFrame: one row per checked ordering.
    """
    present = set(report.structure.unique()) if not report.empty else set()
    if len(present) < 2:
        raise IncomparableWorkloadError(f"ordering_report: need at least two structures, got {sorted(present)}")

    rows = []
    for ordering in PAGE_ORDERINGS:
        if ordering.left not in present or ordering.right not in present:
            continue
        left = _pages_by_query(report, ordering.left)
        right = _pages_by_query(report, ordering.right)
        if set(left.index) != set(right.index):
            raise IncomparableWorkloadError(
                f"ordering_report: {ordering.left} and {ordering.right} ran different query sets")
        satisfied = (left <= right.reindex(left.index)).to_numpy()
        rate = float(satisfied.mean()) if len(satisfied) else 1.0
        mean_left = float(left.mean()) if len(left) else 0.0
        mean_right = float(right.mean()) if len(right) else 0.0
        if ordering.scope == PER_QUERY:
            holds = rate == 1.0
        else:
            holds = mean_left <= mean_right and rate >= MEAN_QUERY_SHARE
        if not holds:
            logger.warning("%s fails: %.1f%% of queries, means %.2f vs %.2f",
                           ordering.name, 100.0 * rate, mean_left, mean_right)
        rows.append({
            "ordering": ordering.name,
            "left": ordering.left,
            "right": ordering.right,
            "scope": ordering.scope,
            "queries": len(left),
            "satisfied_rate": rate,
            "mean_left": mean_left,
            "mean_right": mean_right,
            "holds": bool(holds),
        })
    return pd.DataFrame(rows, columns=ORDERING_COLUMNS)

from collections import Counter
from typing import Callable, Dict, Iterable

import numpy as np

from svindex.core.exceptions import ContractViolation
from svindex.core.query import ResultClass, SpatialVisualRangeQuery
from svindex.evalkit.oracle import GroundTruth
from svindex.lsh.hash_family import HashFamily


def lsh_visible(family: HashFamily, vector: np.ndarray, query_vector: np.ndarray) -> bool:
    """True when the image shares a bucket with the query vector in at least one table."""
    return any(family.hash_vector(t, vector) == family.hash_vector(t, query_vector) for t in range(family.tables))


def classify(image_id: str, q: SpatialVisualRangeQuery, truth: GroundTruth, visible: bool) -> ResultClass:
    """
    Class of a relevant image with respect to q.

    Parameters:
    image_id (str): an id of the extended ground truth.
    q (SpatialVisualRangeQuery): the query the truth was computed for.
    truth (GroundTruth): oracle answers of q.
    visible (bool): the image shares a bucket with the query vector in some table.

    Returns:
    ResultClass: SVMatchRel inside Q.s and visible, VUnmatchRel inside Q.s and
        not visible, SUnmatchRel outside Q.s.
    """
    if image_id not in truth.extended:
        raise ContractViolation(f"classify: image {image_id} is not relevant to query {q.qid}")
    if image_id in truth.strict:
        return ResultClass.SV_MATCH_REL if visible else ResultClass.V_UNMATCH_REL
    return ResultClass.S_UNMATCH_REL


def class_counts(returned: Iterable[str], q: SpatialVisualRangeQuery, truth: GroundTruth,
                 is_visible: Callable[[str], bool]) -> Dict[ResultClass, int]:
    """Counts the returned images of each class."""
    counts = Counter(classify(image_id, q, truth, is_visible(image_id)) for image_id in returned)
    return {result_class: counts.get(result_class, 0) for result_class in ResultClass}

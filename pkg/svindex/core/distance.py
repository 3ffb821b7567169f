from typing import Sequence, Union

import numpy as np

from svindex.core.exceptions import DimensionError

Vector = Union[Sequence[float], np.ndarray]


def euclidean_distance(a: Vector, b: Vector) -> float:
    """
    Euclidean distance between two visual vectors.

    Parameters:
    a (Vector): d-dimensional vector.
    b (Vector): d-dimensional vector.

    Returns:
    float: sqrt(sum_j (a_j - b_j)^2).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError(f"euclidean_distance: dimension mismatch {a.shape} != {b.shape}")
    diff = a - b
    return float(np.sqrt(np.sum(diff * diff)))


def distances_to(points: np.ndarray, q: Vector) -> np.ndarray:
    """
    Distances from each row of an Nxd array to q.

    Parameters:
    points (np.ndarray): Nxd array of visual vectors.
    q (Vector): d-dimensional query vector.

    Returns:
    np.ndarray: N distances.
    """
    q = np.asarray(q, dtype=np.float64)
    if points.ndim != 2 or q.ndim != 1 or points.shape[1] != q.shape[0]:
        raise DimensionError(f"distances_to: dimension mismatch {points.shape} vs {q.shape}")
    # same summation as euclidean_distance, row by row, so the two agree bit-exactly
    diff = points - q
    return np.sqrt(np.sum(diff * diff, axis=1))

from typing import List, Sequence

import numpy as np

from svindex.core.distance import euclidean_distance
from svindex.core.exceptions import InvalidGeometryError


def derive_seed(*parts: int) -> int:
    """Folds a tuple of integers (e.g. query seed and leaf id) into one 64-bit seed."""
    sequence = np.random.SeedSequence([int(p) & 0xFFFFFFFFFFFFFFFF for p in parts])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def sample_in_ball(center: Sequence[float], radius: float, count: int, seed: int) -> List[np.ndarray]:
    """
    Draws vectors uniformly from the closed ball of a given radius around center.

    Each vector is a normalized Gaussian direction scaled by radius * u^(1/d),
    u uniform on [0, 1]. Vectors are drawn one at a time from a single stream,
    so the first k vectors of a (count = k + 1) draw equal a (count = k) draw
    with the same seed.

    Parameters:
    center (Sequence[float]): d-dimensional ball center.
    radius (float): ball radius, >= 0.
    count (int): number of vectors, >= 0.
    seed (int): 64-bit seed.

    Returns:
    list: `count` vectors, each within `radius` of center.
    """
    if not radius >= 0.0:
        raise InvalidGeometryError(f"sample_in_ball: radius must be >= 0, got {radius}")
    if count < 0:
        raise InvalidGeometryError(f"sample_in_ball: count must be >= 0, got {count}")

    center = np.asarray(center, dtype=np.float64)
    d = center.shape[0]
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(count):
        direction = rng.standard_normal(d)
        u = rng.random()
        norm = euclidean_distance(direction, np.zeros(d))
        if radius == 0.0 or norm == 0.0:
            samples.append(center.copy())
            continue
        r = radius * u ** (1.0 / d)
        candidate = center + direction * (r / norm)
        # rounding can push a boundary draw a hair past the radius
        shrink = 1.0 - 1e-9
        while euclidean_distance(candidate, center) > radius:
            candidate = center + (candidate - center) * shrink
            shrink *= shrink
        samples.append(candidate)
    return samples

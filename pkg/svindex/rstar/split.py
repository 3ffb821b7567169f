from typing import List, Sequence, Tuple

from svindex.core.rect import Rect
from svindex.rstar.node import Entry


def choose_subtree(entries: Sequence[Entry], rect: Rect, children_are_leaves: bool) -> int:
    """
    Picks the child entry to descend into when inserting rect.

    Above the leaves the child with the least overlap enlargement wins; at
    higher levels the least area enlargement. Ties fall to the smaller area,
    then to the lower entry index.

    Parameters:
    entries (Sequence[Entry]): entries of an internal node.
    rect (Rect): rectangle being inserted.
    children_are_leaves (bool): the entries point at leaf nodes.

    Returns:
    int: index into entries.
    """
    best_index = 0
    best_key = None
    for i, entry in enumerate(entries):
        enlarged = entry.rect.union(rect)
        area = entry.rect.area()
        area_enlargement = enlarged.area() - area
        if children_are_leaves:
            overlap_enlargement = 0.0
            for j, other in enumerate(entries):
                if j != i:
                    overlap_enlargement += enlarged.overlap_area(other.rect) - entry.rect.overlap_area(other.rect)
            key = (overlap_enlargement, area_enlargement, area, i)
        else:
            key = (area_enlargement, area, i)
        if best_key is None or key < best_key:
            best_key = key
            best_index = i
    return best_index


def _bounds(entry: Entry, axis: int) -> Tuple[float, float]:
    r = entry.rect
    return (r.min_x, r.max_x) if axis == 0 else (r.min_y, r.max_y)


def _sorted_orders(entries: Sequence[Entry], axis: int) -> List[List[int]]:
    """Entry indices sorted by lower bound, then by upper bound; ties keep entry order."""
    indices = range(len(entries))
    by_lower = sorted(indices, key=lambda i: (_bounds(entries[i], axis)[0], i))
    by_upper = sorted(indices, key=lambda i: (_bounds(entries[i], axis)[1], i))
    return [by_lower, by_upper]


def split_entries(entries: Sequence[Entry], min_fill: int) -> Tuple[List[Entry], List[Entry]]:
    """
    R*-tree split of an overflowing node (fan_out + 1 entries) into two groups.

    The split axis minimizes the margin sum over every candidate distribution
    of both sort orders. On that axis the distribution with minimum overlap
    wins, then minimum total area, then the lowest candidate index
    (lower-bound order first, k ascending).

    Parameters:
    entries (Sequence[Entry]): the overflowing entries.
    min_fill (int): minimum entries per resulting group.

    Returns:
    tuple: (first group, second group); the first group stays in the split node.
    """
    count = len(entries)
    split_points = range(min_fill, count - min_fill + 1)

    best_axis = 0
    best_margin = None
    axis_orders = []
    for axis in (0, 1):
        orders = _sorted_orders(entries, axis)
        axis_orders.append(orders)
        margin = 0.0
        for order in orders:
            for k in split_points:
                margin += Rect.union_all(entries[i].rect for i in order[:k]).margin()
                margin += Rect.union_all(entries[i].rect for i in order[k:]).margin()
        if best_margin is None or margin < best_margin:
            best_margin = margin
            best_axis = axis

    best_key = None
    best_split = None
    candidate = 0
    for order in axis_orders[best_axis]:
        for k in split_points:
            first = Rect.union_all(entries[i].rect for i in order[:k])
            second = Rect.union_all(entries[i].rect for i in order[k:])
            key = (first.overlap_area(second), first.area() + second.area(), candidate)
            if best_key is None or key < best_key:
                best_key = key
                best_split = (order, k)
            candidate += 1

    order, k = best_split
    return [entries[i] for i in order[:k]], [entries[i] for i in order[k:]]

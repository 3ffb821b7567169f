import math
from typing import Iterable, Sequence, Tuple

import numpy as np

from svindex.core.exceptions import InvalidGeometryError

Point = Tuple[float, float]


class Rect:
    """
    An axis-aligned rectangle in the 2-d spatial plane.

    Boundaries are inclusive. Coordinates are (x, y); for geographic data x is
    latitude and y is longitude, both in degrees.

    Attributes:
    min (tuple): bottom-left corner (min_x, min_y).
    max (tuple): top-right corner (max_x, max_y).
    """

    __slots__ = ("_min_x", "_min_y", "_max_x", "_max_y")

    def __init__(self, min_x: float, min_y: float, max_x: float, max_y: float):
        """
        Initializes a Rect from its corner coordinates.

        Parameters:
        min_x (float): x of the bottom-left corner.
        min_y (float): y of the bottom-left corner.
        max_x (float): x of the top-right corner.
        max_y (float): y of the top-right corner.
        """
        if not (min_x <= max_x and min_y <= max_y):
            raise InvalidGeometryError(
                f"Rect: min corner ({min_x}, {min_y}) exceeds max corner ({max_x}, {max_y})")
        self._min_x = float(min_x)
        self._min_y = float(min_y)
        self._max_x = float(max_x)
        self._max_y = float(max_y)

    @classmethod
    def from_point(cls, p: Sequence[float]) -> "Rect":
        """Degenerate rectangle covering a single point."""
        return cls(p[0], p[1], p[0], p[1])

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]]) -> "Rect":
        """Minimal rectangle enclosing a non-empty collection of points."""
        xs, ys = zip(*((p[0], p[1]) for p in points))
        return cls(min(xs), min(ys), max(xs), max(ys))

    @classmethod
    def from_center(cls, center: Sequence[float], width: float, height: float) -> "Rect":
        half_w = width / 2.0
        half_h = height / 2.0
        return cls(center[0] - half_w, center[1] - half_h, center[0] + half_w, center[1] + half_h)

    @classmethod
    def union_all(cls, rects: Iterable["Rect"]) -> "Rect":
        rects = list(rects)
        return cls(min(r._min_x for r in rects), min(r._min_y for r in rects),
                   max(r._max_x for r in rects), max(r._max_y for r in rects))

    @property
    def min_x(self) -> float:
        return self._min_x

    @property
    def min_y(self) -> float:
        return self._min_y

    @property
    def max_x(self) -> float:
        return self._max_x

    @property
    def max_y(self) -> float:
        return self._max_y

    @property
    def min(self) -> Point:
        """Gets the bottom-left corner."""
        return (self._min_x, self._min_y)

    @property
    def max(self) -> Point:
        """Gets the top-right corner."""
        return (self._max_x, self._max_y)

    @property
    def center(self) -> Point:
        return ((self._min_x + self._max_x) / 2.0, (self._min_y + self._max_y) / 2.0)

    @property
    def width(self) -> float:
        return self._max_x - self._min_x

    @property
    def height(self) -> float:
        return self._max_y - self._min_y

    def area(self) -> float:
        return (self._max_x - self._min_x) * (self._max_y - self._min_y)

    def margin(self) -> float:
        """Half perimeter; the R*-tree split heuristic only compares sums of these."""
        return (self._max_x - self._min_x) + (self._max_y - self._min_y)

    def contains(self, p: Sequence[float]) -> bool:
        return self._min_x <= p[0] <= self._max_x and self._min_y <= p[1] <= self._max_y

    def contains_points(self, points: np.ndarray) -> np.ndarray:
        """
        Vectorized containment test.

        Parameters:
        points (np.ndarray): Nx2 array of points.

        Returns:
        np.ndarray: boolean mask of length N.
        """
        if points.ndim != 2 or points.shape[1] != 2:
            raise InvalidGeometryError("contains_points: input points must be an Nx2 array of points.")
        return ((points[:, 0] >= self._min_x) & (points[:, 0] <= self._max_x)
                & (points[:, 1] >= self._min_y) & (points[:, 1] <= self._max_y))

    def intersects(self, other: "Rect") -> bool:
        return (self._min_x <= other._max_x and other._min_x <= self._max_x
                and self._min_y <= other._max_y and other._min_y <= self._max_y)

    def overlap_area(self, other: "Rect") -> float:
        dx = min(self._max_x, other._max_x) - max(self._min_x, other._min_x)
        if dx <= 0.0:
            return 0.0
        dy = min(self._max_y, other._max_y) - max(self._min_y, other._min_y)
        if dy <= 0.0:
            return 0.0
        return dx * dy

    def union(self, other: "Rect") -> "Rect":
        return Rect(min(self._min_x, other._min_x), min(self._min_y, other._min_y),
                    max(self._max_x, other._max_x), max(self._max_y, other._max_y))

    def expanded(self, ratio: float) -> "Rect":
        """Same center, each side multiplied by (1 + ratio)."""
        if not ratio >= 0.0 or math.isinf(ratio):
            raise InvalidGeometryError(f"expand_rect: ratio must be a finite value >= 0, got {ratio}")
        if ratio == 0.0:
            return self
        cx, cy = self.center
        half_w = self.width * (1.0 + ratio) / 2.0
        half_h = self.height * (1.0 + ratio) / 2.0
        # rounding must never shrink the original
        return Rect(min(cx - half_w, self._min_x), min(cy - half_h, self._min_y),
                    max(cx + half_w, self._max_x), max(cy + half_h, self._max_y))

    def as_array(self) -> np.ndarray:
        return np.array([self._min_x, self._min_y, self._max_x, self._max_y], dtype=np.float64)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Rect):
            return NotImplemented
        return (self._min_x == other._min_x and self._min_y == other._min_y
                and self._max_x == other._max_x and self._max_y == other._max_y)

    def __hash__(self) -> int:
        return hash((self._min_x, self._min_y, self._max_x, self._max_y))

    def __repr__(self):
        """Returns a string representation of the Rect object."""
        return f"Rect(min=({self._min_x}, {self._min_y}), max=({self._max_x}, {self._max_y}))"


def rect_contains(r: Rect, p: Sequence[float]) -> bool:
    """True iff min.x <= p.x <= max.x and min.y <= p.y <= max.y."""
    return r.contains(p)


def expand_rect(r: Rect, ratio: float) -> Rect:
    """
    Enlarges a rectangle around its center.

    Parameters:
    r (Rect): rectangle to enlarge.
    ratio (float): non-negative exploration ratio; each side grows by (1 + ratio).

    Returns:
    Rect: the enlarged rectangle; r itself when ratio is 0.
    """
    return r.expanded(ratio)

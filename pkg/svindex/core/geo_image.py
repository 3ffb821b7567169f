from typing import Iterable, Iterator, List, Optional, Sequence

import numpy as np

from svindex.core.exceptions import DimensionError, FormatError


class GeoImage:
    """
    A geo-tagged image: a camera location paired with a visual feature vector.

    Attributes:
    id (str): opaque identifier, unique within a dataset.
    s (np.ndarray): spatial vector (2,), latitude/longitude or plane units.
    v (np.ndarray): visual vector (d,).
    """

    __slots__ = ("_id", "_s", "_v")

    def __init__(self, image_id: str, s: Sequence[float], v: Sequence[float]):
        """
        Parameters:
        image_id (str): opaque identifier; must not contain commas or whitespace.
        s (Sequence[float]): two spatial coordinates.
        v (Sequence[float]): d >= 1 visual components.
        """
        self._id = str(image_id)
        if not self._id or any(c in self._id for c in ", \t\r\n"):
            raise FormatError(f"GeoImage: invalid identifier {image_id!r}")
        self._s = np.array(s, dtype=np.float64)
        self._v = np.array(v, dtype=np.float64)
        if self._s.shape != (2,):
            raise DimensionError(f"GeoImage {self._id}: spatial vector must have 2 components, got {self._s.shape}")
        if self._v.ndim != 1 or self._v.shape[0] < 1:
            raise DimensionError(f"GeoImage {self._id}: visual vector must be 1-d with d >= 1, got {self._v.shape}")
        self._s.setflags(write=False)
        self._v.setflags(write=False)

    @property
    def id(self) -> str:
        return self._id

    @property
    def s(self) -> np.ndarray:
        """Gets the spatial vector."""
        return self._s

    @property
    def v(self) -> np.ndarray:
        """Gets the visual vector."""
        return self._v

    @property
    def dim(self) -> int:
        return self._v.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, GeoImage):
            return NotImplemented
        return (self._id == other._id and np.array_equal(self._s, other._s)
                and np.array_equal(self._v, other._v))

    def __hash__(self) -> int:
        return hash(self._id)

    def __repr__(self):
        return f"GeoImage(id={self._id}, s=({self._s[0]}, {self._s[1]}), d={self.dim})"


class GeoDataset:
    """
    An ordered collection of GeoImages with a fixed visual dimension.

    Images are addressed internally by their ordinal (position in the
    dataset); indexes store ordinals and map back to ids on output. The
    spatial and visual vectors are also kept as stacked arrays for the
    vectorized oracle and density statistics.
    """

    def __init__(self, images: Iterable[GeoImage], dim: Optional[int] = None):
        self._images: List[GeoImage] = list(images)
        if dim is None:
            if not self._images:
                raise DimensionError("GeoDataset: dimension is required for an empty dataset")
            dim = self._images[0].dim
        self._dim = int(dim)
        if self._dim < 1:
            raise DimensionError(f"GeoDataset: dimension must be >= 1, got {dim}")

        seen = set()
        for image in self._images:
            if image.dim != self._dim:
                raise DimensionError(
                    f"GeoDataset: image {image.id} has dimension {image.dim}, expected {self._dim}")
            if image.id in seen:
                raise FormatError(f"GeoDataset: duplicate image id {image.id}")
            seen.add(image.id)

        self._ordinal_of = {image.id: i for i, image in enumerate(self._images)}
        if self._images:
            self.spatial = np.stack([image.s for image in self._images])
            self.visual = np.stack([image.v for image in self._images])
        else:
            self.spatial = np.empty((0, 2), dtype=np.float64)
            self.visual = np.empty((0, self._dim), dtype=np.float64)
        self.spatial.setflags(write=False)
        self.visual.setflags(write=False)

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def ids(self) -> List[str]:
        return [image.id for image in self._images]

    def ordinal(self, image_id: str) -> int:
        return self._ordinal_of[image_id]

    def image(self, ordinal: int) -> GeoImage:
        return self._images[ordinal]

    def __getitem__(self, ordinal: int) -> GeoImage:
        return self._images[ordinal]

    def __len__(self) -> int:
        return len(self._images)

    def __iter__(self) -> Iterator[GeoImage]:
        return iter(self._images)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GeoDataset):
            return NotImplemented
        return self._dim == other._dim and self._images == other._images

    def __repr__(self):
        return f"GeoDataset(n={len(self._images)}, d={self._dim})"

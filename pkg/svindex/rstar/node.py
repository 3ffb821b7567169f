import math
import struct
from typing import List, Optional, Sequence, Union

from svindex.core.exceptions import BuildError, FormatError
from svindex.core.rect import Rect
from svindex.pagestore.record_file import RecordPointer

# is_leaf, flags, entry count
NODE_HEADER_FMT = "<BBH"
NODE_HEADER_SIZE = struct.calcsize(NODE_HEADER_FMT)
FLAG_VISUAL = 0x1

LEAF_ENTRY_FMT = "<I2d"
CHILD_ENTRY_FMT = "<I4d"


def leaf_entry_size(augmented: bool) -> int:
    size = struct.calcsize(LEAF_ENTRY_FMT) + RecordPointer.SIZE
    return size + RecordPointer.SIZE if augmented else size


CHILD_ENTRY_SIZE = struct.calcsize(CHILD_ENTRY_FMT)


class LeafEntry:
    """
    One image in an R*-tree leaf.

    Attributes:
    ordinal (int): image ordinal within the dataset.
    point (tuple): the 2-d spatial point, stored inline.
    spatial_ptr (RecordPointer): pointer to the full spatial record.
    visual_ptr (RecordPointer): pointer to the visual record; augmented trees only.
    """

    __slots__ = ("ordinal", "point", "spatial_ptr", "visual_ptr", "rect")

    def __init__(self, ordinal: int, point: Sequence[float], spatial_ptr: RecordPointer,
                 visual_ptr: Optional[RecordPointer] = None):
        self.ordinal = int(ordinal)
        self.point = (float(point[0]), float(point[1]))
        if not all(math.isfinite(c) for c in self.point):
            raise BuildError(f"LeafEntry: non-finite point {self.point} for ordinal {self.ordinal}")
        self.spatial_ptr = spatial_ptr
        self.visual_ptr = visual_ptr
        self.rect = Rect.from_point(self.point)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LeafEntry):
            return NotImplemented
        return (self.ordinal == other.ordinal and self.point == other.point
                and self.spatial_ptr == other.spatial_ptr and self.visual_ptr == other.visual_ptr)

    def __repr__(self):
        return f"LeafEntry(ordinal={self.ordinal}, point={self.point})"


class ChildEntry:
    """An internal-node entry: a child page and the child's MBR."""

    __slots__ = ("rect", "child")

    def __init__(self, rect: Rect, child: int):
        self.rect = rect
        self.child = int(child)

    def __repr__(self):
        return f"ChildEntry(child={self.child}, rect={self.rect})"


Entry = Union[LeafEntry, ChildEntry]


class RTreeNode:
    """
    One R*-tree node; one node occupies exactly one page of the node file.

    Attributes:
    page_id (int): page of the node file holding this node.
    is_leaf (bool): leaf nodes hold LeafEntry, internal nodes ChildEntry.
    entries (list): up to fan_out entries.
    mbr (Rect): minimal rectangle enclosing all entries; None while empty.
    """

    __slots__ = ("page_id", "is_leaf", "entries", "mbr")

    def __init__(self, page_id: int, is_leaf: bool, entries: Optional[List[Entry]] = None):
        self.page_id = page_id
        self.is_leaf = is_leaf
        self.entries: List[Entry] = entries if entries is not None else []
        self.mbr: Optional[Rect] = None
        self.recompute_mbr()

    def recompute_mbr(self):
        self.mbr = Rect.union_all(e.rect for e in self.entries) if self.entries else None

    def encode(self, augmented: bool) -> bytes:
        flags = FLAG_VISUAL if (augmented and self.is_leaf) else 0
        parts = [struct.pack(NODE_HEADER_FMT, 1 if self.is_leaf else 0, flags, len(self.entries))]
        for entry in self.entries:
            if self.is_leaf:
                parts.append(struct.pack(LEAF_ENTRY_FMT, entry.ordinal, entry.point[0], entry.point[1]))
                parts.append(entry.spatial_ptr.encode())
                if flags & FLAG_VISUAL:
                    parts.append(entry.visual_ptr.encode())
            else:
                r = entry.rect
                parts.append(struct.pack(CHILD_ENTRY_FMT, entry.child, r.min_x, r.min_y, r.max_x, r.max_y))
        return b"".join(parts)

    @classmethod
    def decode(cls, page_id: int, payload: bytes) -> "RTreeNode":
        if len(payload) < NODE_HEADER_SIZE:
            raise FormatError(f"RTreeNode.decode: page {page_id} is truncated")
        is_leaf, flags, count = struct.unpack_from(NODE_HEADER_FMT, payload, 0)
        at = NODE_HEADER_SIZE
        entries: List[Entry] = []
        for _ in range(count):
            if is_leaf:
                ordinal, x, y = struct.unpack_from(LEAF_ENTRY_FMT, payload, at)
                at += struct.calcsize(LEAF_ENTRY_FMT)
                spatial_ptr = RecordPointer.decode(payload, at)
                at += RecordPointer.SIZE
                visual_ptr = None
                if flags & FLAG_VISUAL:
                    visual_ptr = RecordPointer.decode(payload, at)
                    at += RecordPointer.SIZE
                entries.append(LeafEntry(ordinal, (x, y), spatial_ptr, visual_ptr))
            else:
                child, min_x, min_y, max_x, max_y = struct.unpack_from(CHILD_ENTRY_FMT, payload, at)
                at += CHILD_ENTRY_SIZE
                entries.append(ChildEntry(Rect(min_x, min_y, max_x, max_y), child))
        return cls(page_id, bool(is_leaf), entries)

    def __repr__(self):
        kind = "leaf" if self.is_leaf else "internal"
        return f"RTreeNode(page={self.page_id}, {kind}, entries={len(self.entries)}, mbr={self.mbr})"

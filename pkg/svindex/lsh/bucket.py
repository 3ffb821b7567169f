import struct
from enum import Enum
from typing import List, Optional, Sequence

from svindex.core.exceptions import FormatError
from svindex.pagestore.record_file import RecordPointer

COUNT_FMT = "<I"
COUNT_SIZE = struct.calcsize(COUNT_FMT)
POINT_FMT = "<2d"
POINT_SIZE = struct.calcsize(POINT_FMT)


class EntryLayout(Enum):
    """
    What a bucket entry carries besides the image ordinal.

    PLAIN: visual pointer.
    SPATIAL_POINTER: visual and spatial pointers.
    INLINE_POINT: visual pointer and the 2-d point itself.
    ORDINAL_ONLY: nothing; the bucket only names its members.
    """

    PLAIN = "plain"
    SPATIAL_POINTER = "spatial_pointer"
    INLINE_POINT = "inline_point"
    ORDINAL_ONLY = "ordinal_only"

    @property
    def entry_size(self) -> int:
        return {
            EntryLayout.PLAIN: 4 + RecordPointer.SIZE,
            EntryLayout.SPATIAL_POINTER: 4 + 2 * RecordPointer.SIZE,
            EntryLayout.INLINE_POINT: 4 + RecordPointer.SIZE + POINT_SIZE,
            EntryLayout.ORDINAL_ONLY: 4,
        }[self]


class BucketEntry:
    """One image in an LSH bucket."""

    __slots__ = ("ordinal", "visual_ptr", "spatial_ptr", "point")

    def __init__(self, ordinal: int, visual_ptr: Optional[RecordPointer] = None,
                 spatial_ptr: Optional[RecordPointer] = None, point: Optional[Sequence[float]] = None):
        self.ordinal = int(ordinal)
        self.visual_ptr = visual_ptr
        self.spatial_ptr = spatial_ptr
        self.point = None if point is None else (float(point[0]), float(point[1]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BucketEntry):
            return NotImplemented
        return (self.ordinal == other.ordinal and self.visual_ptr == other.visual_ptr
                and self.spatial_ptr == other.spatial_ptr and self.point == other.point)

    def __repr__(self):
        return f"BucketEntry(ordinal={self.ordinal})"


def bucket_size(layout: EntryLayout, count: int) -> int:
    """C(b) in bytes: a u32 entry count followed by the entries."""
    return COUNT_SIZE + count * layout.entry_size


def encode_bucket(layout: EntryLayout, entries: Sequence[BucketEntry]) -> bytes:
    parts = [struct.pack(COUNT_FMT, len(entries))]
    for entry in entries:
        parts.append(struct.pack(COUNT_FMT, entry.ordinal))
        if layout is EntryLayout.ORDINAL_ONLY:
            continue
        parts.append(entry.visual_ptr.encode())
        if layout is EntryLayout.SPATIAL_POINTER:
            parts.append(entry.spatial_ptr.encode())
        elif layout is EntryLayout.INLINE_POINT:
            parts.append(struct.pack(POINT_FMT, *entry.point))
    return b"".join(parts)


def decode_bucket(layout: EntryLayout, payload: bytes) -> List[BucketEntry]:
    (count,) = struct.unpack_from(COUNT_FMT, payload, 0)
    if len(payload) != bucket_size(layout, count):
        raise FormatError(f"decode_bucket: {len(payload)} bytes do not hold {count} {layout.value} entries")
    entries = []
    at = COUNT_SIZE
    for _ in range(count):
        (ordinal,) = struct.unpack_from(COUNT_FMT, payload, at)
        at += COUNT_SIZE
        visual_ptr = spatial_ptr = point = None
        if layout is not EntryLayout.ORDINAL_ONLY:
            visual_ptr = RecordPointer.decode(payload, at)
            at += RecordPointer.SIZE
        if layout is EntryLayout.SPATIAL_POINTER:
            spatial_ptr = RecordPointer.decode(payload, at)
            at += RecordPointer.SIZE
        elif layout is EntryLayout.INLINE_POINT:
            point = struct.unpack_from(POINT_FMT, payload, at)
            at += POINT_SIZE
        entries.append(BucketEntry(ordinal, visual_ptr, spatial_ptr, point))
    return entries

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Union

from svindex.core.exceptions import RecordReadError, RecordWriteError, FormatError
from svindex.pagestore.config import PageStoreConfig
from svindex.pagestore.ledger import AccessLedger, PageCategory

logger = logging.getLogger(__name__)

# magic, version, flags, page_size, record_count
HEADER_FMT = "<4sHHII"
HEADER_SIZE = struct.calcsize(HEADER_FMT)
MAGIC = b"SVXR"
VERSION = 1
FLAG_PADDED = 0x1


@dataclass(frozen=True)
class RecordPointer:
    """
    Location of one record inside a record file.

    Attributes:
    file_id (int): which record file of the store.
    page_id (int): zero-based page of the first byte.
    offset (int): byte offset of the first byte within that page.
    length (int): record length in bytes; a record may span pages.
    """

    file_id: int
    page_id: int
    offset: int
    length: int

    FORMAT = "<HIHI"
    SIZE = struct.calcsize(FORMAT)

    def start(self, page_size: int) -> int:
        return self.page_id * page_size + self.offset

    def pages(self, page_size: int) -> range:
        """Pages overlapped by [offset, offset + length)."""
        first = self.page_id
        last = (self.start(page_size) + self.length - 1) // page_size
        return range(first, last + 1)

    def encode(self) -> bytes:
        return struct.pack(self.FORMAT, self.file_id, self.page_id, self.offset, self.length)

    @classmethod
    def decode(cls, buffer: bytes, at: int = 0) -> "RecordPointer":
        return cls(*struct.unpack_from(cls.FORMAT, buffer, at))


class RecordFile:
    """
    An append-only file of fixed-size pages holding variable-length records.

    Records shorter than a page never straddle a page boundary when padding is
    on; longer records start on a fresh page. `aligned` appends always start a
    fresh page (bucket files). Node files allocate whole pages and rewrite them
    in place while the tree is being built.
    """

    def __init__(self, file_id: int, name: str, cfg: PageStoreConfig):
        self.file_id = file_id
        self.name = name
        self.page_size = cfg.page_size
        self.pad_records = cfg.pad_records
        self._data = bytearray()
        self._records: Dict[int, int] = {}
        self._record_count = 0
        self._frozen = False

    @property
    def record_count(self) -> int:
        return self._record_count

    @property
    def size_bytes(self) -> int:
        return len(self._data)

    @property
    def page_count(self) -> int:
        return -(-len(self._data) // self.page_size)

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self):
        """Makes the file read-only; builds are single-writer, reads are unrestricted afterwards."""
        self._frozen = True

    def _check_writable(self):
        if self._frozen:
            raise RecordWriteError(f"RecordFile {self.name}: file is read-only")

    def _pad_to_next_page(self):
        used = len(self._data) % self.page_size
        if used:
            self._data.extend(bytes(self.page_size - used))

    def append(self, payload: bytes, align: bool = False) -> RecordPointer:
        """
        Appends a record and returns a pointer that reads it back.

        Parameters:
        payload (bytes): record bytes, length >= 1.
        align (bool): start the record on a fresh page.

        Returns:
        RecordPointer: location of the record.
        """
        self._check_writable()
        length = len(payload)
        if length < 1:
            raise RecordWriteError(f"RecordFile {self.name}: empty payload")

        used = len(self._data) % self.page_size
        if used and (align or (self.pad_records and used + length > self.page_size)):
            self._pad_to_next_page()

        start = len(self._data)
        self._data.extend(payload)
        self._records[start] = length
        self._record_count += 1
        return RecordPointer(self.file_id, start // self.page_size, start % self.page_size, length)

    def allocate_page(self) -> int:
        """Appends one zeroed page and returns its page id."""
        self._check_writable()
        self._pad_to_next_page()
        page_id = len(self._data) // self.page_size
        self._data.extend(bytes(self.page_size))
        self._records[page_id * self.page_size] = self.page_size
        self._record_count += 1
        return page_id

    def write_page(self, page_id: int, payload: bytes):
        self._check_writable()
        if len(payload) > self.page_size:
            raise RecordWriteError(
                f"RecordFile {self.name}: page payload of {len(payload)} bytes exceeds page size {self.page_size}")
        start = page_id * self.page_size
        if self._records.get(start) != self.page_size:
            raise RecordWriteError(f"RecordFile {self.name}: page {page_id} was not allocated")
        self._data[start:start + self.page_size] = payload.ljust(self.page_size, b"\x00")

    def read(self, ptr: RecordPointer, ledger: Optional[AccessLedger] = None,
             category: PageCategory = PageCategory.DATA) -> bytes:
        """
        Reads a record and charges every page it overlaps to the ledger.

        Parameters:
        ptr (RecordPointer): pointer previously returned by append.
        ledger (AccessLedger): per-query ledger; None reads without accounting (build time).
        category (PageCategory): ledger counter the pages are charged to.

        Returns:
        bytes: the stored payload.
        """
        if ptr.file_id != self.file_id:
            raise RecordReadError(f"RecordFile {self.name}: pointer belongs to file {ptr.file_id}")
        start = ptr.start(self.page_size)
        if ptr.offset >= self.page_size or self._records.get(start) != ptr.length:
            raise RecordReadError(f"RecordFile {self.name}: dangling pointer {ptr}")
        if ledger is not None:
            ledger.touch(category, self.file_id, ptr.pages(self.page_size))
        return bytes(self._data[start:start + ptr.length])

    def read_page(self, page_id: int, ledger: Optional[AccessLedger] = None,
                  category: PageCategory = PageCategory.RTREE) -> bytes:
        return self.read(RecordPointer(self.file_id, page_id, 0, self.page_size), ledger, category)

    def save(self, path: Union[str, Path]):
        """
        Writes the file: a 16-byte header (magic, version, flags, page_size,
        record_count) followed by the pages, the last one zero-filled.
        """
        flags = FLAG_PADDED if self.pad_records else 0
        header = struct.pack(HEADER_FMT, MAGIC, VERSION, flags, self.page_size, self._record_count)
        body = bytes(self._data).ljust(self.page_count * self.page_size, b"\x00")
        Path(path).write_bytes(header + body)
        logger.debug("saved %s: %d records, %d pages", self.name, self._record_count, self.page_count)

    def record_index(self) -> Dict[int, int]:
        """Start offset -> length for every record; persisted alongside the file."""
        return dict(self._records)

    @classmethod
    def load(cls, path: Union[str, Path], file_id: int, name: str, records: Dict[int, int]) -> "RecordFile":
        raw = Path(path).read_bytes()
        if len(raw) < HEADER_SIZE:
            raise FormatError(f"RecordFile {path}: truncated header")
        magic, version, flags, page_size, record_count = struct.unpack_from(HEADER_FMT, raw, 0)
        if magic != MAGIC or version != VERSION:
            raise FormatError(f"RecordFile {path}: bad magic or version")
        if record_count != len(records):
            raise FormatError(f"RecordFile {path}: header lists {record_count} records, index has {len(records)}")
        cfg = PageStoreConfig(page_size=page_size, pad_records=bool(flags & FLAG_PADDED))
        record_file = cls(file_id, name, cfg)
        end = max((start + length for start, length in records.items()), default=0)
        record_file._data = bytearray(raw[HEADER_SIZE:HEADER_SIZE + end])
        record_file._records = dict(records)
        record_file._record_count = record_count
        record_file._frozen = True
        return record_file

    def __repr__(self):
        return f"RecordFile(name={self.name}, records={self._record_count}, pages={self.page_count})"


def append_record(file: RecordFile, payload: bytes, align: bool = False) -> RecordPointer:
    return file.append(payload, align=align)


def read_record(file: RecordFile, ptr: RecordPointer, ledger: Optional[AccessLedger] = None,
                category: PageCategory = PageCategory.DATA) -> bytes:
    return file.read(ptr, ledger, category)

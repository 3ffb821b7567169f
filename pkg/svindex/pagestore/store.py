import logging
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Union

from svindex.core.exceptions import FormatError, StorageError
from svindex.pagestore.config import PageStoreConfig
from svindex.pagestore.record_file import RecordFile

logger = logging.getLogger(__name__)


class PageStore:
    """
    A simulated disk: a set of named record files sharing one page size.

    File ids are assigned in creation order, so identical build sequences
    produce identical pointers.
    """

    def __init__(self, cfg: Optional[PageStoreConfig] = None):
        self.cfg = cfg if cfg is not None else PageStoreConfig()
        self._files: Dict[str, RecordFile] = {}
        self._by_id: Dict[int, RecordFile] = {}

    @property
    def page_size(self) -> int:
        return self.cfg.page_size

    def create_file(self, name: str) -> RecordFile:
        if name in self._files:
            raise StorageError(f"PageStore: file {name} already exists")
        record_file = RecordFile(len(self._files), name, self.cfg)
        self._files[name] = record_file
        self._by_id[record_file.file_id] = record_file
        return record_file

    def file(self, name: str) -> RecordFile:
        try:
            return self._files[name]
        except KeyError:
            raise StorageError(f"PageStore: no file named {name}") from None

    def file_by_id(self, file_id: int) -> RecordFile:
        try:
            return self._by_id[file_id]
        except KeyError:
            raise StorageError(f"PageStore: no file with id {file_id}") from None

    def has_file(self, name: str) -> bool:
        return name in self._files

    def files(self) -> Iterator[RecordFile]:
        return iter(self._files.values())

    def freeze(self):
        for record_file in self._files.values():
            record_file.freeze()

    def page_counts(self) -> Dict[str, int]:
        return {name: record_file.page_count for name, record_file in self._files.items()}

    def save(self, directory: Union[str, Path]):
        """
        Writes every file as `<name>.pages` plus a `<name>.idx` record index
        (one `start,length` line per record) into directory.
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for record_file in self._files.values():
            record_file.save(directory / f"{record_file.name}.pages")
            lines = [f"{start},{length}" for start, length in sorted(record_file.record_index().items())]
            (directory / f"{record_file.name}.idx").write_text("\n".join(lines) + "\n")
        logger.info("saved %d record files to %s", len(self._files), directory)

    @classmethod
    def load(cls, directory: Union[str, Path], names: List[str], cfg: PageStoreConfig) -> "PageStore":
        """Reopens the files listed in `names`, in file-id order."""
        directory = Path(directory)
        store = cls(cfg)
        for file_id, name in enumerate(names):
            records = {}
            for line in (directory / f"{name}.idx").read_text().splitlines():
                if not line.strip():
                    continue
                try:
                    start, length = line.split(",")
                    records[int(start)] = int(length)
                except ValueError:
                    raise FormatError(f"PageStore: bad record index line {line!r} in {name}.idx") from None
            record_file = RecordFile.load(directory / f"{name}.pages", file_id, name, records)
            if record_file.page_size != cfg.page_size:
                raise FormatError(
                    f"PageStore: {name} has page size {record_file.page_size}, expected {cfg.page_size}")
            store._files[name] = record_file
            store._by_id[file_id] = record_file
        return store

    def __repr__(self):
        return f"PageStore(page_size={self.page_size}, files={list(self._files)})"

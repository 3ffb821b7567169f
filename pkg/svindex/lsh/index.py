import logging
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from svindex.core.distance import euclidean_distance
from svindex.core.exceptions import BuildError, StorageError
from svindex.pagestore.ledger import AccessLedger, PageCategory
from svindex.pagestore.record_file import RecordFile, RecordPointer
from svindex.pagestore.records import decode_visual
from svindex.lsh.bucket import BucketEntry, EntryLayout, decode_bucket, encode_bucket
from svindex.lsh.hash_family import BucketKey, HashFamily

logger = logging.getLogger(__name__)

TableKey = Tuple[int, BucketKey]


class LshIndex:
    """
    T hash tables of buckets stored in a bucket file.

    Entries are collected in memory during the build and written by
    `finalize`, one page-aligned record per bucket, tables in order and keys
    sorted within a table. After that the index is read-only; every bucket
    read charges ceil(C(b) / page_size) pages to the query's ledger.

    Secondary LSHs of a hybrid structure share the bucket file and the hash
    family of the structure; `scope` tells them apart in the persisted
    directory.
    """

    def __init__(self, family: HashFamily, bucket_file: RecordFile, layout: EntryLayout = EntryLayout.PLAIN,
                 visual_file: Optional[RecordFile] = None, scope: int = 0):
        self.family = family
        self.bucket_file = bucket_file
        self.layout = layout
        self.visual_file = visual_file
        self.scope = scope
        self._buckets: Dict[TableKey, List[BucketEntry]] = {}
        self._directory: Dict[TableKey, RecordPointer] = {}
        self._finalized = False

    @classmethod
    def from_directory(cls, family: HashFamily, bucket_file: RecordFile, layout: EntryLayout,
                       visual_file: Optional[RecordFile], scope: int,
                       directory: Dict[TableKey, RecordPointer]) -> "LshIndex":
        """Reopens a finalized index from its persisted bucket directory."""
        index = cls(family, bucket_file, layout, visual_file, scope)
        index._directory = dict(directory)
        for table_key, ptr in index._directory.items():
            index._buckets[table_key] = decode_bucket(layout, bucket_file.read(ptr))
        index._finalized = True
        return index

    ####################################################################
    #Build
    ####################################################################

    def insert(self, entry: BucketEntry, vector: np.ndarray):
        """Appends entry to one bucket per table, keyed by the hash of vector."""
        self.insert_keys(entry, self.family.hash_all(vector))

    def insert_keys(self, entry: BucketEntry, keys: Sequence[BucketKey]):
        """Same as insert with the T keys already computed (bulk builds hash once)."""
        if self._finalized:
            raise BuildError("LshIndex: index is finalized")
        if len(keys) != self.family.tables:
            raise BuildError(f"LshIndex: expected {self.family.tables} keys, got {len(keys)}")
        for table, key in enumerate(keys):
            self._buckets.setdefault((table, tuple(key)), []).append(entry)

    def finalize(self):
        """Writes every bucket to the bucket file."""
        if self._finalized:
            return
        for table_key in sorted(self._buckets):
            payload = encode_bucket(self.layout, self._buckets[table_key])
            self._directory[table_key] = self.bucket_file.append(payload, align=True)
        self._finalized = True
        logger.debug("LSH scope %d: %d buckets written", self.scope, len(self._directory))

    ####################################################################
    #Introspection
    ####################################################################

    @property
    def directory(self) -> Dict[TableKey, RecordPointer]:
        return dict(self._directory)

    @property
    def bucket_count(self) -> int:
        return len(self._buckets)

    def __len__(self) -> int:
        """Number of indexed images (entries of table 0)."""
        return sum(len(entries) for (table, _), entries in self._buckets.items() if table == 0)

    def buckets(self) -> Iterator[Tuple[int, BucketKey, List[BucketEntry]]]:
        """Build-time view of (table, key, entries), tables in order, keys sorted."""
        for table, key in sorted(self._buckets):
            yield table, key, list(self._buckets[(table, key)])

    def bucket_sizes(self) -> List[int]:
        """C(b) in bytes of every stored bucket."""
        return [ptr.length for _, ptr in sorted(self._directory.items())]

    def has_bucket(self, table: int, key: BucketKey) -> bool:
        """Directory lookup; reads no bucket page."""
        return (table, key) in self._directory

    def bucket_pointer(self, table: int, key: BucketKey) -> Optional[RecordPointer]:
        return self._directory.get((table, key))

    ####################################################################
    #Query
    ####################################################################

    def lookup_keys(self, vectors: Iterable[np.ndarray], ledger: Optional[AccessLedger] = None) -> List[TableKey]:
        """
        The distinct (table, key) pairs of a set of lookup vectors, in input order.

        Parameters:
        vectors (Iterable[np.ndarray]): query vector first, then any extra lookup vectors.
        ledger (AccessLedger): charged one hash evaluation per function.
        """
        seen = set()
        keys = []
        for vector in vectors:
            for table, key in enumerate(self.family.hash_all(vector)):
                if (table, key) not in seen:
                    seen.add((table, key))
                    keys.append((table, key))
            if ledger is not None:
                ledger.hash_evaluations += self.family.a.shape[0] * self.family.a.shape[1]
        return keys

    def read_bucket(self, table: int, key: BucketKey, ledger: Optional[AccessLedger] = None) -> List[BucketEntry]:
        """Loads one bucket; an absent key costs nothing and yields no entries."""
        ptr = self._directory.get((table, key))
        if ptr is None:
            return []
        return decode_bucket(self.layout, self.bucket_file.read(ptr, ledger, PageCategory.LSH))

    def candidate_set(self, q: np.ndarray, ledger: Optional[AccessLedger] = None,
                      extra: Sequence[np.ndarray] = ()) -> Dict[int, BucketEntry]:
        """
        Union of the buckets keyed by q (and any extra lookup vectors) in every table.

        Returns:
        dict: ordinal -> entry, deduplicated, in first-seen order.
        """
        candidates: Dict[int, BucketEntry] = {}
        for table, key in self.lookup_keys([q, *extra], ledger):
            for entry in self.read_bucket(table, key, ledger):
                candidates.setdefault(entry.ordinal, entry)
        return candidates

    def load_vector(self, entry: BucketEntry, ledger: Optional[AccessLedger] = None) -> np.ndarray:
        if self.visual_file is None or entry.visual_ptr is None:
            raise StorageError(f"LshIndex: no visual record for ordinal {entry.ordinal}")
        _, vector = decode_visual(self.visual_file.read(entry.visual_ptr, ledger, PageCategory.DATA))
        return vector

    def similarity_query(self, q: np.ndarray, sigma: float, ledger: Optional[AccessLedger] = None) -> List[int]:
        """
        Ordinals of the candidates within distance sigma of q.

        The visual record of every candidate is loaded; the result never holds
        a false positive, and may miss images that share no bucket with q.
        """
        q = np.asarray(q, dtype=np.float64)
        result = []
        for ordinal, entry in self.candidate_set(q, ledger).items():
            vector = self.load_vector(entry, ledger)
            if ledger is not None:
                ledger.distance_computations += 1
            if euclidean_distance(vector, q) <= sigma:
                result.append(ordinal)
        return result

    def __repr__(self):
        return f"LshIndex(scope={self.scope}, layout={self.layout.value}, buckets={len(self._buckets)})"

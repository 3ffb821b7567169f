import numpy as np
import pytest

from svindex.core.exceptions import ConfigError, FormatError, RecordReadError, RecordWriteError, StorageError
from svindex.pagestore.config import PageStoreConfig
from svindex.pagestore.ledger import AccessLedger, PageCategory, query_cost
from svindex.pagestore.record_file import RecordFile, RecordPointer, append_record, read_record
from svindex.pagestore.records import SPATIAL_SIZE, decode_spatial, decode_visual, encode_spatial, encode_visual, \
    visual_record_size, write_data_files
from svindex.pagestore.store import PageStore


def record_file(page_size=4096, pad_records=True) -> RecordFile:
    return RecordFile(0, "test", PageStoreConfig(page_size=page_size, pad_records=pad_records))


class TestPageStoreConfig:

    @pytest.mark.parametrize("page_size", [255, 65537])
    def test_page_size_bounds(self, page_size):
        with pytest.raises(ConfigError):
            PageStoreConfig(page_size=page_size)

    def test_negative_t_disk(self):
        with pytest.raises(ConfigError):
            PageStoreConfig(t_disk=-1.0)


class TestRecordFile:

    def test_padding_moves_record_to_next_page(self):
        f = record_file()
        first = f.append(b"a" * 4000)
        second = f.append(b"b" * 200)
        assert (first.page_id, first.offset) == (0, 0)
        assert (second.page_id, second.offset) == (1, 0)
        assert list(second.pages(4096)) == [1]

    def test_unpadded_record_straddles(self):
        f = record_file(pad_records=False)
        f.append(b"a" * 4000)
        second = f.append(b"b" * 200)
        assert (second.page_id, second.offset) == (0, 4000)
        assert list(second.pages(4096)) == [0, 1]

    def test_long_record_starts_fresh_page(self):
        f = record_file(page_size=256)
        f.append(b"x" * 10)
        long = f.append(b"y" * 600)
        assert long.offset == 0
        assert list(long.pages(256)) == [1, 2, 3]

    def test_aligned_append(self):
        f = record_file(page_size=256)
        f.append(b"x" * 10)
        aligned = f.append(b"y" * 10, align=True)
        assert (aligned.page_id, aligned.offset) == (1, 0)

    def test_read_round_trip_and_charges_pages(self):
        f = record_file(page_size=256)
        ptr = append_record(f, b"z" * 300)
        ledger = AccessLedger()
        assert read_record(f, ptr, ledger) == b"z" * 300
        assert ledger.pages(PageCategory.DATA) == {(0, 0), (0, 1)}

    def test_ledger_counts_distinct_pages(self):
        f = record_file(page_size=256)
        a = f.append(b"a" * 10)
        b = f.append(b"b" * 10)
        ledger = AccessLedger()
        f.read(a, ledger)
        f.read(b, ledger)
        f.read(a, ledger)
        assert ledger.pages_data == 1
        assert ledger.total == 1

    def test_empty_payload(self):
        with pytest.raises(RecordWriteError):
            record_file().append(b"")

    def test_frozen_file_rejects_writes(self):
        f = record_file()
        f.append(b"a")
        f.freeze()
        with pytest.raises(RecordWriteError):
            f.append(b"b")
        with pytest.raises(RecordWriteError):
            f.allocate_page()

    def test_dangling_pointer(self):
        f = record_file()
        f.append(b"abc")
        with pytest.raises(RecordReadError):
            f.read(RecordPointer(0, 0, 1, 2))
        with pytest.raises(RecordReadError):
            f.read(RecordPointer(7, 0, 0, 3))

    def test_page_write_requires_allocation(self):
        f = record_file(page_size=256)
        page = f.allocate_page()
        f.write_page(page, b"node")
        assert f.read_page(page)[:4] == b"node"
        with pytest.raises(RecordWriteError):
            f.write_page(page + 1, b"node")
        with pytest.raises(RecordWriteError):
            f.write_page(page, b"x" * 257)

    def test_pointer_encoding(self):
        ptr = RecordPointer(3, 70000, 12, 900)
        assert RecordPointer.decode(ptr.encode()) == ptr


class TestLedger:

    def test_query_cost(self):
        ledger = AccessLedger()
        ledger.touch(PageCategory.RTREE, 2, [0, 1])
        ledger.touch(PageCategory.LSH, 3, [0])
        ledger.touch(PageCategory.DATA, 0, [0, 0, 1])
        assert (ledger.pages_rtree, ledger.pages_lsh, ledger.pages_data) == (2, 1, 2)
        assert query_cost(ledger, PageStoreConfig(t_disk=0.01)) == pytest.approx(0.05)

    def test_same_page_in_different_files(self):
        ledger = AccessLedger()
        ledger.touch(PageCategory.DATA, 0, [0])
        ledger.touch(PageCategory.DATA, 1, [0])
        assert ledger.pages_data == 2


class TestStore:

    def test_file_ids_in_creation_order(self):
        store = PageStore(PageStoreConfig(page_size=512))
        assert store.create_file("a").file_id == 0
        assert store.create_file("b").file_id == 1
        assert store.file_by_id(1).name == "b"
        with pytest.raises(StorageError):
            store.create_file("a")
        with pytest.raises(StorageError):
            store.file("missing")

    def test_save_load_round_trip(self, tmp_path):
        cfg = PageStoreConfig(page_size=512)
        store = PageStore(cfg)
        f = store.create_file("data")
        ptrs = [f.append(bytes([i]) * (30 + i)) for i in range(40)]
        store.freeze()
        store.save(tmp_path)

        loaded = PageStore.load(tmp_path, ["data"], cfg)
        g = loaded.file("data")
        assert g.frozen
        assert g.page_count == f.page_count
        assert all(g.read(p) == f.read(p) for p in ptrs)

    def test_load_rejects_other_page_size(self, tmp_path):
        store = PageStore(PageStoreConfig(page_size=512))
        store.create_file("data").append(b"abc")
        store.save(tmp_path)
        with pytest.raises(FormatError):
            PageStore.load(tmp_path, ["data"], PageStoreConfig(page_size=1024))


class TestRecords:

    def test_spatial_codec(self):
        payload = encode_spatial(7, np.array([31.5, -104.25]))
        assert len(payload) == SPATIAL_SIZE
        assert decode_spatial(payload) == (7, (31.5, -104.25))

    def test_visual_codec(self):
        v = np.array([0.1, -2.0, 3.5])
        payload = encode_visual(4, v)
        assert len(payload) == visual_record_size(3)
        ordinal, decoded = decode_visual(payload)
        assert ordinal == 4
        np.testing.assert_array_equal(decoded, v)

    def test_visual_malformed(self):
        with pytest.raises(FormatError):
            decode_visual(b"\x00" * 7)

    def test_data_files_follow_dataset_order(self, example_dataset):
        store = PageStore()
        spatial, visual = write_data_files(store, example_dataset)
        assert [p.file_id for p in spatial] == [0] * len(example_dataset)
        assert [p.file_id for p in visual] == [1] * len(example_dataset)
        for ordinal, ptr in enumerate(spatial):
            assert decode_spatial(store.file_by_id(0).read(ptr))[0] == ordinal

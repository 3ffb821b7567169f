import logging
from pathlib import Path
from typing import Dict, Union

import numpy as np

from svindex.core.exceptions import FormatError
from svindex.indexes.base import BUCKET_FILE, NODE_FILE, IndexConfig, IndexKind, IndexStructure
from svindex.indexes.factory import STRUCTURES
from svindex.lsh.bucket import EntryLayout
from svindex.lsh.hash_family import HashFamily
from svindex.lsh.index import LshIndex, TableKey
from svindex.pagestore.config import PageStoreConfig
from svindex.pagestore.record_file import RecordPointer
from svindex.pagestore.records import SPATIAL_FILE, VISUAL_FILE
from svindex.pagestore.store import PageStore
from svindex.rstar.tree import RStarTree, RTreeParams

logger = logging.getLogger(__name__)

MANIFEST = "manifest.txt"
FAMILY = "family.npz"
IDS = "ids.txt"
BUCKETS = "buckets.txt"
TREES = "trees.txt"
FORMAT = "svx-index"
VERSION = "1"
FILE_ORDER = [SPATIAL_FILE, VISUAL_FILE, NODE_FILE, BUCKET_FILE]


def _key_text(key) -> str:
    return " ".join(str(k) for k in key)


def _parse_key(text: str):
    return tuple(int(k) for k in text.split())


def save_index(index: IndexStructure, directory: Union[str, Path]):
    """
    Persists a structure: its record files, a key=value manifest, the hash
    family, the image ids, the bucket directories and the secondary tree roots.

    Bucket directory lines are `scope,table,key,page,offset,length` with the
    key's integers space-separated; scope is `primary` or a leaf page id.
    Secondary tree lines are `table,key,root,height`.
    """
    directory = Path(directory)
    index.store.save(directory)
    cfg = index.cfg

    manifest = {
        "format": FORMAT,
        "version": VERSION,
        "kind": index.kind.value,
        "count": len(index.ids),
        "dim": index.dim,
        "page_size": cfg.page_store.page_size,
        "t_disk": repr(cfg.page_store.t_disk),
        "pad_records": int(cfg.page_store.pad_records),
        "fan_out": cfg.rtree.fan_out,
        "min_fill": cfg.rtree.min_fill,
        "tables": index.family.tables,
        "functions_per_table": index.family.a.shape[1],
        "width": repr(index.family.width),
        "lsh_seed": cfg.lsh_seed,
        "vfi_anchor_first_table": int(cfg.vfi_anchor_first_table),
        "files": ",".join(FILE_ORDER),
    }
    if index.tree is not None:
        manifest["tree_root"] = index.tree.root_page
        manifest["tree_height"] = index.tree.height
        manifest["tree_augmented"] = int(index.tree.augmented)
    if index.lsh is not None:
        manifest["lsh_layout"] = index.lsh.layout.value
    if index.secondary_lsh:
        manifest["secondary_layout"] = next(iter(index.secondary_lsh.values())).layout.value
    if index.secondary_trees:
        manifest["secondary_augmented"] = int(next(iter(index.secondary_trees.values())).augmented)
    (directory / MANIFEST).write_text("".join(f"{k}={v}\n" for k, v in manifest.items()))

    np.savez(directory / FAMILY, a=index.family.a, b=index.family.b, width=np.array(index.family.width))
    (directory / IDS).write_text("".join(f"{image_id}\n" for image_id in index.ids))

    lines = []
    for lsh in index.lsh_indexes():
        scope = "primary" if lsh is index.lsh else str(lsh.scope)
        for (table, key), ptr in sorted(lsh.directory.items()):
            lines.append(f"{scope},{table},{_key_text(key)},{ptr.page_id},{ptr.offset},{ptr.length}\n")
    (directory / BUCKETS).write_text("".join(lines))

    (directory / TREES).write_text("".join(
        f"{table},{_key_text(key)},{tree.root_page},{tree.height}\n"
        for (table, key), tree in sorted(index.secondary_trees.items())))
    logger.info("saved %s index to %s", index.kind.value, directory)


def read_manifest(directory: Union[str, Path]) -> Dict[str, str]:
    manifest = {}
    for line in (Path(directory) / MANIFEST).read_text().splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise FormatError(f"read_manifest: bad line {line!r}")
        manifest[key.strip()] = value.strip()
    if manifest.get("format") != FORMAT or manifest.get("version") != VERSION:
        raise FormatError(f"read_manifest: {directory} is not a {FORMAT} v{VERSION} index")
    return manifest


def open_index(directory: Union[str, Path]) -> IndexStructure:
    """Reopens a structure written by save_index without rebuilding it."""
    directory = Path(directory)
    manifest = read_manifest(directory)
    try:
        kind = IndexKind.parse(manifest["kind"])
        page_store = PageStoreConfig(page_size=int(manifest["page_size"]), t_disk=float(manifest["t_disk"]),
                                     pad_records=bool(int(manifest["pad_records"])))
        cfg = IndexConfig(
            page_store=page_store,
            rtree=RTreeParams(fan_out=int(manifest["fan_out"]), min_fill=int(manifest["min_fill"])),
            tables=int(manifest["tables"]),
            functions_per_table=int(manifest["functions_per_table"]),
            width=float(manifest["width"]),
            lsh_seed=int(manifest["lsh_seed"]),
            vfi_anchor_first_table=bool(int(manifest["vfi_anchor_first_table"])),
        )
        names = manifest["files"].split(",")
        dim = int(manifest["dim"])
    except (KeyError, ValueError) as e:
        raise FormatError(f"open_index: incomplete manifest in {directory}: {e}") from None

    store = PageStore.load(directory, names, page_store)
    with np.load(directory / FAMILY) as arrays:
        family = HashFamily.from_arrays(arrays["a"], arrays["b"], float(arrays["width"]))
    ids = (directory / IDS).read_text().splitlines()
    if len(ids) != int(manifest["count"]):
        raise FormatError(f"open_index: {IDS} lists {len(ids)} ids, manifest says {manifest['count']}")

    index = STRUCTURES[kind](store, cfg, family, ids, dim)
    node_file = store.file(NODE_FILE)
    bucket_file = store.file(BUCKET_FILE)
    visual_file = store.file(VISUAL_FILE)

    if "tree_root" in manifest:
        index.tree = RStarTree(node_file, cfg.rtree, augmented=bool(int(manifest["tree_augmented"])),
                               root_page=int(manifest["tree_root"]), height=int(manifest["tree_height"]))

    directories: Dict[str, Dict[TableKey, RecordPointer]] = {}
    for line in (directory / BUCKETS).read_text().splitlines():
        if not line.strip():
            continue
        try:
            scope, table, key, page, offset, length = line.split(",")
            ptr = RecordPointer(bucket_file.file_id, int(page), int(offset), int(length))
            directories.setdefault(scope, {})[(int(table), _parse_key(key))] = ptr
        except ValueError:
            raise FormatError(f"open_index: bad bucket line {line!r}") from None
    for scope, entries in directories.items():
        if scope == "primary":
            index.lsh = LshIndex.from_directory(family, bucket_file, EntryLayout(manifest["lsh_layout"]),
                                                visual_file, 0, entries)
        else:
            index.secondary_lsh[int(scope)] = LshIndex.from_directory(
                family, bucket_file, EntryLayout(manifest["secondary_layout"]), visual_file, int(scope), entries)

    secondary_augmented = bool(int(manifest.get("secondary_augmented", "0")))
    for line in (directory / TREES).read_text().splitlines():
        if not line.strip():
            continue
        try:
            table, key, root, height = line.split(",")
        except ValueError:
            raise FormatError(f"open_index: bad tree line {line!r}") from None
        index.secondary_trees[(int(table), _parse_key(key))] = RStarTree(
            node_file, cfg.rtree, augmented=secondary_augmented, root_page=int(root), height=int(height))

    logger.info("opened %s index from %s", kind.value, directory)
    return index

import logging
import time
from typing import Dict, Optional, Type

from svindex.core.exceptions import BuildError, ContractViolation
from svindex.core.geo_image import GeoDataset
from svindex.core.query import SpatialVisualRangeQuery
from svindex.indexes.base import BUCKET_FILE, NODE_FILE, BuildInputs, IndexConfig, IndexKind, IndexStructure, \
    QueryOutcome
from svindex.indexes.baselines import AugmentedLsh, AugmentedRTree, DualIndex
from svindex.indexes.hybrids import AugmentedSpatialFirstIndex, AugmentedVisualFirstIndex, SpatialFirstIndex, \
    VisualFirstIndex
from svindex.lsh.hash_family import HashFamily
from svindex.pagestore.records import write_data_files
from svindex.pagestore.store import PageStore

logger = logging.getLogger(__name__)

STRUCTURES: Dict[IndexKind, Type[IndexStructure]] = {
    IndexKind.DI: DualIndex,
    IndexKind.AUG_RTREE: AugmentedRTree,
    IndexKind.AUG_LSH: AugmentedLsh,
    IndexKind.SFI: SpatialFirstIndex,
    IndexKind.VFI: VisualFirstIndex,
    IndexKind.AUG_SFI: AugmentedSpatialFirstIndex,
    IndexKind.AUG_VFI: AugmentedVisualFirstIndex,
}


def build(kind: IndexKind, dataset: GeoDataset, cfg: Optional[IndexConfig] = None,
          family: Optional[HashFamily] = None) -> IndexStructure:
    """
    Builds one structure over a dataset.

    Data records are written first, in dataset order, so every structure
    built from the same dataset and config shares the same data layout.

    Parameters:
    kind (IndexKind): which structure.
    dataset (GeoDataset): non-empty dataset.
    cfg (IndexConfig): build parameters; defaults throughout when None.
    family (HashFamily): explicit hash family; derived from cfg and the dataset when None.

    Returns:
    IndexStructure: the frozen, queryable structure.
    """
    if len(dataset) == 0:
        raise BuildError(f"build {kind.value}: dataset is empty")
    cfg = cfg if cfg is not None else IndexConfig()
    if family is None:
        family = HashFamily(cfg.lsh_params(dataset))
    elif family.dim != dataset.dim:
        raise BuildError(f"build {kind.value}: hash family dimension {family.dim} != dataset dimension {dataset.dim}")

    store = PageStore(cfg.page_store)
    spatial_ptrs, visual_ptrs = write_data_files(store, dataset)
    store.create_file(NODE_FILE)
    store.create_file(BUCKET_FILE)

    structure = STRUCTURES[kind](store, cfg, family, dataset.ids, dataset.dim)
    start = time.perf_counter()
    keys = [family.hash_all(image.v) for image in dataset]
    structure.populate(BuildInputs(dataset, spatial_ptrs, visual_ptrs, keys))
    structure.build_seconds = time.perf_counter() - start
    store.freeze()

    logger.info("built %s over %d images in %.3fs: %s", kind.value, len(dataset),
                structure.build_seconds, store.page_counts())
    return structure


def _checked(index: IndexStructure, kind: IndexKind, q: SpatialVisualRangeQuery) -> QueryOutcome:
    if index.kind is not kind:
        raise ContractViolation(f"query_{kind.name.lower()}: index is a {index.kind.value}, not a {kind.value}")
    return index.query(q)


def query_di(index: IndexStructure, q: SpatialVisualRangeQuery) -> QueryOutcome:
    return _checked(index, IndexKind.DI, q)


def query_aug_rtree(index: IndexStructure, q: SpatialVisualRangeQuery) -> QueryOutcome:
    return _checked(index, IndexKind.AUG_RTREE, q)


def query_aug_lsh(index: IndexStructure, q: SpatialVisualRangeQuery) -> QueryOutcome:
    return _checked(index, IndexKind.AUG_LSH, q)


def query_sfi(index: IndexStructure, q: SpatialVisualRangeQuery) -> QueryOutcome:
    return _checked(index, IndexKind.SFI, q)


def query_vfi(index: IndexStructure, q: SpatialVisualRangeQuery) -> QueryOutcome:
    return _checked(index, IndexKind.VFI, q)


def query_aug_sfi(index: IndexStructure, q: SpatialVisualRangeQuery) -> QueryOutcome:
    return _checked(index, IndexKind.AUG_SFI, q)


def query_aug_vfi(index: IndexStructure, q: SpatialVisualRangeQuery) -> QueryOutcome:
    return _checked(index, IndexKind.AUG_VFI, q)

import numpy as np
import pytest

from svindex.core.query import SpatialVisualRangeQuery
from svindex.core.rect import Rect
from svindex.indexes.base import IndexConfig, IndexKind
from svindex.indexes.factory import build
from svindex.lsh.hash_family import HashFamily
from svindex.pagestore.config import PageStoreConfig
from svindex.rstar.tree import RTreeParams
from svindex.workbench.dataset import generate_dataset, standard_spec
from svindex.workbench.running_example import running_example_config, running_example_dataset, \
    running_example_family, running_example_query
from svindex.workbench.workload import sigma_quantiles


@pytest.fixture(scope="session")
def example_dataset():
    return running_example_dataset()


@pytest.fixture(scope="session")
def example_family():
    return running_example_family()


@pytest.fixture(scope="session")
def example_query():
    return running_example_query()


@pytest.fixture(scope="session")
def example_indexes(example_dataset, example_family):
    cfg = running_example_config()
    return {kind: build(kind, example_dataset, cfg, example_family) for kind in IndexKind}


@pytest.fixture(scope="session")
def small_dataset():
    return generate_dataset(standard_spec(n=400, d=8, seed=3))


@pytest.fixture(scope="session")
def small_config():
    return IndexConfig(page_store=PageStoreConfig(page_size=1024), rtree=RTreeParams(fan_out=8),
                       tables=3, functions_per_table=3, lsh_seed=5)


@pytest.fixture(scope="session")
def small_family(small_dataset, small_config):
    return HashFamily(small_config.lsh_params(small_dataset))


@pytest.fixture(scope="session")
def small_indexes(small_dataset, small_config, small_family):
    return {kind: build(kind, small_dataset, small_config, small_family) for kind in IndexKind}


@pytest.fixture(scope="session")
def small_sigma(small_dataset):
    return sigma_quantiles(small_dataset, [0.05], seed=1)[0]


@pytest.fixture(scope="session")
def small_workload(small_dataset, small_sigma):
    rng = np.random.default_rng(11)
    queries = []
    for i, ordinal in enumerate(rng.choice(len(small_dataset), size=24, replace=False)):
        image = small_dataset[int(ordinal)]
        side = 4.0 + 4.0 * (i % 4)
        queries.append(SpatialVisualRangeQuery(Rect.from_center(image.s, side, side), image.v, small_sigma,
                                               seed=i, qid=f"q{i}"))
    return queries

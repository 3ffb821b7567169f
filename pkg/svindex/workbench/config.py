import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional, Tuple, Union

from svindex.core.exceptions import ConfigError
from svindex.indexes.base import IndexConfig
from svindex.pagestore.config import PageStoreConfig
from svindex.rstar.tree import RTreeParams
from svindex.workbench.dataset import DatasetSpec
from svindex.workbench.workload import SelectivityGroup

RUN_LABELS = ("DI", "AugRTree", "AugLSH", "SFI", "VFI", "AugSFI", "AugSFI-E", "AugVFI", "AugVFI-E")


@dataclass(frozen=True)
class BenchmarkConfig:
    """
    Everything one benchmark run needs. Defaults follow the standard query
    settings: SU-VU queries, the third of four spatial ranges and σ values,
    E.s = 0.5 and E.v = 15.

    Attributes:
    dataset_path (str): dataset file; generated from `dataset` when None.
    dataset (DatasetSpec): generator recipe; the standard clustered spec when None.
    workload_path (str): workload file; selected per group when None.
    structures (tuple): run labels, a subset of RUN_LABELS.
    groups (tuple): selectivity group names.
    queries_per_group (int): queries drawn per group.
    spatial_ranges_km (tuple): square range sides (km), ascending.
    range_index (int): default entry of spatial_ranges_km.
    units (str): "plane" or "degrees", how km map to dataset units.
    plane_units_per_km (float): scale of plane datasets.
    sigma_quantiles (tuple): pairwise-distance quantiles giving the σ sweep.
    sigmas (tuple): explicit σ values, overriding sigma_quantiles.
    sigma_index (int): default entry of the σ sweep.
    explore_spatial_values (tuple): E.s sweep.
    explore_spatial (float): default E.s of AugVFI-E.
    explore_visual_values (tuple): E.v sweep.
    explore_visual (int): default E.v of AugSFI-E.
    seed (int): workload and sampling seed.
    page_size, t_disk, pad_records: page store parameters.
    fan_out (int): R*-tree fan-out.
    tables, functions_per_table, width, lsh_seed: hash family parameters.
    vfi_anchor_first_table (bool): VFI keeps secondary trees of the first hash table only.
    timing_repeats (int): wall-time repetitions per query.
    workers (int): threads evaluating queries; 1 runs inline.
    sweeps (bool): emit the parameter sweep series.
    output_dir (str): report directory.
    running_example (bool): run the worked example with its own hash family and query.
    """

    dataset_path: Optional[str] = None
    dataset: Optional[DatasetSpec] = None
    workload_path: Optional[str] = None
    structures: Tuple[str, ...] = RUN_LABELS
    groups: Tuple[str, ...] = ("SU-VU",)
    queries_per_group: int = 100
    spatial_ranges_km: Tuple[float, ...] = (1.25, 3.7, 6.18, 8.1)
    range_index: int = 2
    units: str = "plane"
    plane_units_per_km: float = 1.0
    sigma_quantiles: Tuple[float, ...] = (0.01, 0.02, 0.035, 0.05)
    sigmas: Optional[Tuple[float, ...]] = None
    sigma_index: int = 2
    explore_spatial_values: Tuple[float, ...] = (0.1, 0.3, 0.5, 0.7)
    explore_spatial: float = 0.5
    explore_visual_values: Tuple[int, ...] = (9, 15, 21, 27)
    explore_visual: int = 15
    seed: int = 0
    page_size: int = 4096
    t_disk: float = 0.01
    pad_records: bool = True
    fan_out: int = 85
    tables: int = 3
    functions_per_table: int = 7
    width: Optional[float] = None
    lsh_seed: int = 0
    vfi_anchor_first_table: bool = False
    timing_repeats: int = 5
    workers: int = 1
    sweeps: bool = True
    output_dir: str = "bench-out"
    running_example: bool = False

    def __post_init__(self):
        for name in ("structures", "groups", "spatial_ranges_km", "sigma_quantiles", "explore_spatial_values",
                     "explore_visual_values"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.sigmas is not None:
            object.__setattr__(self, "sigmas", tuple(self.sigmas))
        if isinstance(self.dataset, dict):
            object.__setattr__(self, "dataset", DatasetSpec.from_dict(self.dataset))

        unknown = [s for s in self.structures if s not in RUN_LABELS]
        if unknown or not self.structures:
            raise ConfigError(f"BenchmarkConfig: unknown structures {unknown}; expected a subset of {RUN_LABELS}")
        for group in self.groups:
            SelectivityGroup.parse(group)
        if self.queries_per_group < 0:
            raise ConfigError(f"BenchmarkConfig: queries_per_group must be >= 0, got {self.queries_per_group}")
        if not 0 <= self.range_index < len(self.spatial_ranges_km):
            raise ConfigError(f"BenchmarkConfig: range_index {self.range_index} out of range")
        sweep = self.sigmas if self.sigmas is not None else self.sigma_quantiles
        if not 0 <= self.sigma_index < len(sweep):
            raise ConfigError(f"BenchmarkConfig: sigma_index {self.sigma_index} out of range")
        if any(not 0.0 < x < 1.0 for x in self.sigma_quantiles):
            raise ConfigError(f"BenchmarkConfig: sigma quantiles must lie in (0, 1), got {self.sigma_quantiles}")
        if self.units not in ("plane", "degrees"):
            raise ConfigError(f"BenchmarkConfig: units must be 'plane' or 'degrees', got {self.units!r}")
        if not self.explore_spatial >= 0.0 or self.explore_visual < 0:
            raise ConfigError("BenchmarkConfig: exploration ratios must be >= 0")
        if self.timing_repeats < 1 or self.workers < 1:
            raise ConfigError("BenchmarkConfig: timing_repeats and workers must be >= 1")

    @property
    def explore_spatial_max(self) -> float:
        return max((self.explore_spatial,) + self.explore_spatial_values)

    def index_config(self) -> IndexConfig:
        return IndexConfig(
            page_store=PageStoreConfig(page_size=self.page_size, t_disk=self.t_disk, pad_records=self.pad_records),
            rtree=RTreeParams(fan_out=self.fan_out),
            tables=self.tables,
            functions_per_table=self.functions_per_table,
            width=self.width,
            lsh_seed=self.lsh_seed,
            vfi_anchor_first_table=self.vfi_anchor_first_table,
        )

    def merged(self, **overrides) -> "BenchmarkConfig":
        """Copy with the given fields replaced; None values leave a field unchanged."""
        names = {f.name for f in fields(self)}
        unknown = set(overrides) - names
        if unknown:
            raise ConfigError(f"BenchmarkConfig: unknown fields {sorted(unknown)}")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "BenchmarkConfig":
        """Reads a JSON object whose keys are BenchmarkConfig fields."""
        try:
            values = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"BenchmarkConfig: {path} is not valid JSON: {e}") from None
        if not isinstance(values, dict):
            raise ConfigError(f"BenchmarkConfig: {path} must hold a JSON object")
        return cls().merged(**values)

    def to_dict(self) -> dict:
        return asdict(self)

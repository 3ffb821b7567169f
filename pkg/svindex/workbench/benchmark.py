import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import pandas as pd

from svindex.core.exceptions import FormatError, IncomparableWorkloadError
from svindex.core.geo_image import GeoDataset
from svindex.core.query import SpatialVisualRangeQuery
from svindex.core.rect import Rect
from svindex.core.sampling import derive_seed
from svindex.coordinate_systems.coordinate_system_conversions import km_side_to_spans
from svindex.evalkit.costs import analytic_space_cost, measured_space_cost
from svindex.evalkit.metrics import REPORT_COLUMNS, QueryEvaluation, evaluate_query, report_frame, summarize, \
    trimmed_mean
from svindex.evalkit.oracle import GroundTruth, oracle_query
from svindex.evalkit.orderings import ORDERING_COLUMNS, ordering_report
from svindex.indexes.base import IndexKind, IndexStructure, QueryOutcome
from svindex.indexes.factory import build
from svindex.lsh.hash_family import HashFamily
from svindex.workbench.config import BenchmarkConfig
from svindex.workbench.dataset import generate_dataset, read_dataset, standard_spec
from svindex.workbench.running_example import running_example_config, running_example_dataset, \
    running_example_family, running_example_query
from svindex.workbench.workload import SelectivityGroup, read_workload, select_queries, sigma_quantiles

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ["qid", "structure", "result_ids", "hash_evaluations", "distance_computations", "merged_ids"]
TIMING_COLUMNS = ["qid", "structure", "wall_ms"]
BUILD_COLUMNS = ["structure", "images", "build_seconds", "insert_ms_per_image", "s_r", "s_lsh", "s_data",
                 "analytic_s_r", "analytic_s_lsh", "analytic_s_data"]


class Run(NamedTuple):
    """A report label: the structure that answers and the exploration it applies."""

    label: str
    kind: IndexKind
    explore_spatial: float
    explore_visual: int


def runs_for(cfg: BenchmarkConfig) -> List[Run]:
    explorative = {
        "AugSFI-E": (IndexKind.AUG_SFI, 0.0, cfg.explore_visual),
        "AugVFI-E": (IndexKind.AUG_VFI, cfg.explore_spatial, 0),
    }
    runs = []
    for label in cfg.structures:
        kind, e_s, e_v = explorative[label] if label in explorative else (IndexKind.parse(label), 0.0, 0)
        runs.append(Run(label, kind, e_s, e_v))
    return runs


@dataclass
class WorkloadRun:
    """Rows produced by running one workload through a set of structures."""

    evaluations: List[QueryEvaluation] = field(default_factory=list)
    results: List[dict] = field(default_factory=list)
    timings: List[dict] = field(default_factory=list)


@dataclass
class BenchmarkResult:
    report: pd.DataFrame
    results: pd.DataFrame
    summary: pd.DataFrame
    orderings: pd.DataFrame
    builds: pd.DataFrame
    timings: pd.DataFrame
    series: Dict[str, pd.DataFrame]


def _timed_query(index: IndexStructure, q: SpatialVisualRangeQuery, repeats: int) -> Tuple[QueryOutcome, float]:
    samples = []
    outcome = None
    for _ in range(repeats):
        start = time.perf_counter()
        outcome = index.query(q)
        samples.append((time.perf_counter() - start) * 1000.0)
    return outcome, trimmed_mean(samples)


def run_workload(indexes: Dict[IndexKind, IndexStructure], runs: Sequence[Run],
                 queries: Sequence[SpatialVisualRangeQuery], truths: Sequence[GroundTruth], dataset: GeoDataset,
                 family: HashFamily, repeats: int = 1, workers: int = 1) -> WorkloadRun:
    """
    Answers every query with every run and scores the answers.

    Structures are read-only while querying, so queries of one run may be
    evaluated on a thread pool; rows keep workload order either way.
    """
    out = WorkloadRun()
    for run in runs:
        index = indexes[run.kind]
        prepared = [q.with_exploration(run.explore_spatial, run.explore_visual) for q in queries]

        def answer(q: SpatialVisualRangeQuery) -> Tuple[QueryOutcome, float]:
            return _timed_query(index, q, repeats)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                answers = list(pool.map(answer, prepared))
        else:
            answers = [answer(q) for q in prepared]

        for q, truth, (outcome, wall_ms) in zip(prepared, truths, answers):
            out.evaluations.append(evaluate_query(run.label, run.kind, outcome, q, truth, dataset, family))
            overhead = outcome.stats.overhead
            out.results.append({
                "qid": q.qid,
                "structure": run.label,
                "result_ids": " ".join(sorted(outcome.ids)),
                "hash_evaluations": overhead.hash_evaluations,
                "distance_computations": overhead.distance_computations,
                "merged_ids": overhead.merged_ids,
            })
            out.timings.append({"qid": q.qid, "structure": run.label, "wall_ms": wall_ms})
        logger.info("%s: %d queries", run.label, len(prepared))
    return out


def load_dataset(cfg: BenchmarkConfig) -> GeoDataset:
    if cfg.dataset_path is not None:
        return read_dataset(cfg.dataset_path)
    spec = cfg.dataset if cfg.dataset is not None else standard_spec(seed=cfg.seed)
    return generate_dataset(spec)


def range_spans(cfg: BenchmarkConfig, side_km: float, latitude: float = 0.0) -> Tuple[float, float]:
    return km_side_to_spans(side_km, cfg.units, latitude, cfg.plane_units_per_km)


def sigma_sweep(cfg: BenchmarkConfig, dataset: GeoDataset) -> List[float]:
    if cfg.sigmas is not None:
        return list(cfg.sigmas)
    return sigma_quantiles(dataset, cfg.sigma_quantiles, cfg.seed)


def build_workload(cfg: BenchmarkConfig, dataset: GeoDataset) -> List[SpatialVisualRangeQuery]:
    """The workload file when configured, else queries_per_group queries per selectivity group."""
    if cfg.workload_path is not None:
        return read_workload(cfg.workload_path)
    if cfg.queries_per_group == 0:
        return []
    sigma = sigma_sweep(cfg, dataset)[cfg.sigma_index]
    side = cfg.spatial_ranges_km[cfg.range_index]
    center_lat = float(dataset.spatial[:, 0].mean()) if len(dataset) else 0.0
    queries = []
    for i, name in enumerate(cfg.groups):
        group = SelectivityGroup.parse(name)
        queries.extend(select_queries(dataset, group, cfg.queries_per_group, derive_seed(cfg.seed, i),
                                      range_spans(cfg, side, center_lat), sigma))
    return queries


def build_row(label: str, index: IndexStructure) -> dict:
    measured = measured_space_cost(index)
    analytic = analytic_space_cost(index)
    images = len(index)
    return {
        "structure": label,
        "images": images,
        "build_seconds": index.build_seconds,
        "insert_ms_per_image": 1000.0 * index.build_seconds / images if images else 0.0,
        "s_r": measured.s_r,
        "s_lsh": measured.s_lsh,
        "s_data": measured.s_data,
        "analytic_s_r": analytic.s_r,
        "analytic_s_lsh": analytic.s_lsh,
        "analytic_s_data": analytic.s_data,
    }


def build_report(indexes: Dict[IndexKind, IndexStructure]) -> pd.DataFrame:
    """Index size per component (measured and analytic) and insertion time per structure."""
    return pd.DataFrame([build_row(kind.value, index) for kind, index in indexes.items()], columns=BUILD_COLUMNS)


def safe_orderings(report: pd.DataFrame) -> pd.DataFrame:
    try:
        return ordering_report(report)
    except IncomparableWorkloadError as e:
        logger.warning("orderings skipped: %s", e)
        return pd.DataFrame(columns=ORDERING_COLUMNS)


def _truths(dataset: GeoDataset, queries: Sequence[SpatialVisualRangeQuery],
            explore_spatial_max: float) -> List[GroundTruth]:
    return [oracle_query(dataset, q, explore_spatial_max) for q in queries]


def _means(evaluations: List[QueryEvaluation]) -> pd.DataFrame:
    return summarize(report_frame(evaluations))[["structure", "mean_pages", "mean_recall", "mean_precision"]]


def run_sweeps(cfg: BenchmarkConfig, indexes: Dict[IndexKind, IndexStructure], runs: List[Run],
               queries: List[SpatialVisualRangeQuery], dataset: GeoDataset,
               family: HashFamily) -> Dict[str, pd.DataFrame]:
    """Plot-ready series: recall against E.v, E.s and σ, pages against the spatial range."""
    series = {}
    plain = [r for r in runs if r.explore_spatial == 0.0 and r.explore_visual == 0]
    e_max = cfg.explore_spatial_max

    if IndexKind.AUG_SFI in indexes:
        truths = _truths(dataset, queries, e_max)
        frames = []
        for e_v in (0,) + tuple(cfg.explore_visual_values):
            run = Run("AugSFI-E", IndexKind.AUG_SFI, 0.0, e_v)
            frames.append(_means(run_workload(indexes, [run], queries, truths, dataset, family).evaluations)
                          .assign(explore_visual=e_v))
        series["recall_vs_explore_visual"] = pd.concat(frames, ignore_index=True)

    if IndexKind.AUG_VFI in indexes:
        truths = _truths(dataset, queries, e_max)
        frames = []
        for e_s in cfg.explore_spatial_values:
            run = Run("AugVFI-E", IndexKind.AUG_VFI, e_s, 0)
            answered = run_workload(indexes, [run], queries, truths, dataset, family)
            frames.append(_means(answered.evaluations).assign(explore_spatial=e_s,
                                                              mean_strict_recall=_strict_recall(answered, truths)))
        series["recall_vs_explore_spatial"] = pd.concat(frames, ignore_index=True)

    if plain:
        frames = []
        for sigma in sigma_sweep(cfg, dataset):
            swept = [replace(q, sigma=sigma) for q in queries]
            evaluations = run_workload(indexes, plain, swept, _truths(dataset, swept, e_max), dataset,
                                       family).evaluations
            frames.append(_means(evaluations).assign(sigma=sigma))
        series["recall_vs_sigma"] = pd.concat(frames, ignore_index=True)

        frames = []
        for side in cfg.spatial_ranges_km:
            swept = []
            for q in queries:
                width, height = range_spans(cfg, side, q.spatial.center[0])
                swept.append(replace(q, spatial=Rect.from_center(q.spatial.center, width, height)))
            evaluations = run_workload(indexes, plain, swept, _truths(dataset, swept, e_max), dataset,
                                       family).evaluations
            frames.append(_means(evaluations).assign(spatial_range_km=side))
        series["pages_vs_spatial_range"] = pd.concat(frames, ignore_index=True)
    return series


def _strict_recall(answered: WorkloadRun, truths: Sequence[GroundTruth]) -> float:
    """Mean recall against the strict answer, which exploration can only help."""
    recalls = [len(set(row["result_ids"].split()) & truth.strict) / len(truth.strict)
               for row, truth in zip(answered.results, truths) if truth.strict]
    return sum(recalls) / len(recalls) if recalls else float("nan")


def write_reports(result: BenchmarkResult, directory: Path):
    directory.mkdir(parents=True, exist_ok=True)
    result.report.to_csv(directory / "report.csv", index=False)
    result.results.to_csv(directory / "results.csv", index=False)
    result.summary.to_csv(directory / "summary.csv", index=False)
    result.orderings.to_csv(directory / "orderings.csv", index=False)
    result.builds.to_csv(directory / "build.csv", index=False)
    result.timings.to_csv(directory / "timings.csv", index=False)
    if result.series:
        (directory / "series").mkdir(exist_ok=True)
        for name, frame in result.series.items():
            frame.to_csv(directory / "series" / f"{name}.csv", index=False)
    logger.info("reports written to %s", directory)


def run_benchmark(cfg: BenchmarkConfig, dataset: Optional[GeoDataset] = None,
                  queries: Optional[List[SpatialVisualRangeQuery]] = None, family: Optional[HashFamily] = None,
                  write: bool = True) -> BenchmarkResult:
    """
    Builds every configured structure over one dataset and runs the workload.

    Page counts are deterministic and taken from the first of
    cfg.timing_repeats executions; wall times keep the trimmed mean of all
    of them and go to timings.csv only, so the other report files are
    identical across runs of the same config.

    Parameters:
    cfg (BenchmarkConfig): benchmark settings.
    dataset (GeoDataset): overrides the configured dataset.
    queries (list): overrides the configured workload.
    family (HashFamily): overrides the hash family derived from cfg.
    write (bool): write report files into cfg.output_dir.

    Returns:
    BenchmarkResult: every report table.
    """
    index_cfg = cfg.index_config()
    if cfg.running_example:
        dataset = dataset if dataset is not None else running_example_dataset()
        queries = queries if queries is not None else [running_example_query()]
        family = family if family is not None else running_example_family()
        index_cfg = running_example_config()
    dataset = dataset if dataset is not None else load_dataset(cfg)
    queries = list(queries) if queries is not None else build_workload(cfg, dataset)
    family = family if family is not None else HashFamily(index_cfg.lsh_params(dataset))
    runs = runs_for(cfg)

    indexes: Dict[IndexKind, IndexStructure] = {}
    for run in runs:
        if run.kind not in indexes:
            indexes[run.kind] = build(run.kind, dataset, index_cfg, family)

    truths = _truths(dataset, queries, cfg.explore_spatial_max)
    main = run_workload(indexes, runs, queries, truths, dataset, family, cfg.timing_repeats, cfg.workers)
    report = report_frame(main.evaluations)
    summary = summarize(report)
    series = run_sweeps(cfg, indexes, runs, queries, dataset, family) if cfg.sweeps and queries else {}
    if not report.empty:
        series["pages_by_structure"] = summary[["structure", "mean_pages", "mean_pages_rtree", "mean_pages_lsh",
                                                "mean_pages_data"]]

    result = BenchmarkResult(
        report=report,
        results=pd.DataFrame(main.results, columns=RESULT_COLUMNS),
        summary=summary,
        orderings=safe_orderings(report) if not report.empty else pd.DataFrame(columns=ORDERING_COLUMNS),
        builds=build_report(indexes),
        timings=pd.DataFrame(main.timings, columns=TIMING_COLUMNS),
        series=series,
    )
    if write:
        write_reports(result, Path(cfg.output_dir))
    return result


def read_report(path) -> pd.DataFrame:
    """Reads a report.csv back, checking its columns."""
    frame = pd.read_csv(path)
    if list(frame.columns) != REPORT_COLUMNS:
        raise FormatError(f"read_report: {path} has columns {list(frame.columns)}, expected {REPORT_COLUMNS}")
    frame["qid"] = frame["qid"].astype(str)
    return frame

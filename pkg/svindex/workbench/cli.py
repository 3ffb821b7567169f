import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd

from svindex.core.exceptions import SvIndexError
from svindex.evalkit.metrics import summarize
from svindex.evalkit.oracle import oracle_query
from svindex.evalkit.orderings import ordering_report
from svindex.indexes.base import IndexKind
from svindex.indexes.factory import build
from svindex.indexes.manifest import open_index, save_index
from svindex.workbench.benchmark import range_spans, read_report, run_benchmark
from svindex.workbench.config import RUN_LABELS, BenchmarkConfig
from svindex.workbench.dataset import DatasetSpec, generate_dataset, read_dataset, standard_spec, write_dataset
from svindex.workbench.running_example import running_example_dataset, running_example_query
from svindex.workbench.workload import SelectivityGroup, read_workload, select_queries, sigma_quantiles, \
    write_workload

logger = logging.getLogger(__name__)

# bench flags and the BenchmarkConfig fields they set
BENCH_FLAGS = {
    "dataset": ("dataset_path", str),
    "workload": ("workload_path", str),
    "queries_per_group": ("queries_per_group", int),
    "range_index": ("range_index", int),
    "plane_units_per_km": ("plane_units_per_km", float),
    "sigma_index": ("sigma_index", int),
    "explore_spatial": ("explore_spatial", float),
    "explore_visual": ("explore_visual", int),
    "seed": ("seed", int),
    "page_size": ("page_size", int),
    "t_disk": ("t_disk", float),
    "fan_out": ("fan_out", int),
    "tables": ("tables", int),
    "functions_per_table": ("functions_per_table", int),
    "width": ("width", float),
    "lsh_seed": ("lsh_seed", int),
    "timing_repeats": ("timing_repeats", int),
    "workers": ("workers", int),
    "out": ("output_dir", str),
}


def _config(args) -> BenchmarkConfig:
    cfg = BenchmarkConfig.from_file(args.config) if args.config else BenchmarkConfig()
    overrides = {field: getattr(args, flag) for flag, (field, _) in BENCH_FLAGS.items() if hasattr(args, flag)}
    if getattr(args, "structures", None):
        overrides["structures"] = tuple(args.structures)
    if getattr(args, "groups", None):
        overrides["groups"] = tuple(args.groups)
    if getattr(args, "sigmas", None):
        overrides["sigmas"] = tuple(args.sigmas)
    if getattr(args, "no_sweeps", False):
        overrides["sweeps"] = False
    if getattr(args, "no_padding", False):
        overrides["pad_records"] = False
    if getattr(args, "anchor_vfi", False):
        overrides["vfi_anchor_first_table"] = True
    if getattr(args, "running_example", False):
        overrides["running_example"] = True
    return cfg.merged(**overrides)


def _add_index_flags(parser: argparse.ArgumentParser):
    for flag in ("page_size", "t_disk", "fan_out", "tables", "functions_per_table", "width", "lsh_seed"):
        _, kind = BENCH_FLAGS[flag]
        parser.add_argument(f"--{flag.replace('_', '-')}", dest=flag, type=kind, default=None)
    parser.add_argument("--no-padding", action="store_true", help="let data records straddle page boundaries")
    parser.add_argument("--anchor-vfi", action="store_true",
                        help="VFI keeps secondary trees for the first hash table only")


####################################################################
#Commands
####################################################################

def cmd_gen(args) -> int:
    if args.running_example:
        dataset = running_example_dataset()
        if args.workload_out:
            write_workload([running_example_query()], args.workload_out)
    else:
        spec = DatasetSpec.from_file(args.spec) if args.spec else standard_spec(args.n, args.d, args.seed)
        dataset = generate_dataset(spec)
    write_dataset(dataset, args.out)
    logger.info("wrote %d images to %s", len(dataset), args.out)
    return 0


def cmd_queries(args) -> int:
    cfg = _config(args)
    dataset = read_dataset(args.dataset_file)
    sigma = args.sigma
    if sigma is None:
        sigma = sigma_quantiles(dataset, cfg.sigma_quantiles, cfg.seed)[cfg.sigma_index]
    center_lat = float(dataset.spatial[:, 0].mean()) if len(dataset) else 0.0
    spans = range_spans(cfg, cfg.spatial_ranges_km[cfg.range_index], center_lat)
    queries = select_queries(dataset, SelectivityGroup.parse(args.group), args.count, cfg.seed, spans, sigma,
                             args.explore_spatial or 0.0, args.explore_visual or 0)
    write_workload(queries, args.out)
    logger.info("wrote %d %s queries to %s", len(queries), args.group, args.out)
    return 0


def cmd_build(args) -> int:
    cfg = _config(args)
    dataset = read_dataset(args.dataset_file)
    index = build(IndexKind.parse(args.structure), dataset, cfg.index_config())
    save_index(index, args.out)
    return 0


def cmd_query(args) -> int:
    index = open_index(args.index)
    queries = read_workload(args.workload)
    if args.qid:
        queries = [q for q in queries if q.qid in set(args.qid)]
    dataset = read_dataset(args.dataset_file) if args.dataset_file else None
    rows = []
    for q in queries:
        outcome = index.query(q)
        stats = outcome.stats
        row = {"qid": q.qid, "structure": index.kind.value, "pages_rtree": stats.pages_rtree,
               "pages_lsh": stats.pages_lsh, "pages_data": stats.pages_data, "sim_time": stats.simulated_time,
               "result_ids": " ".join(sorted(outcome.ids))}
        if dataset is not None:
            row["exact_ids"] = " ".join(sorted(oracle_query(dataset, q).strict))
        rows.append(row)
    print(pd.DataFrame(rows).to_string(index=False))
    return 0


def cmd_bench(args) -> int:
    cfg = _config(args)
    result = run_benchmark(cfg)
    if not result.summary.empty:
        print(result.summary.to_string(index=False))
    if not result.orderings.empty:
        print(result.orderings.to_string(index=False))
    return 0


def cmd_report(args) -> int:
    report = read_report(args.report)
    out = Path(args.out) if args.out else Path(args.report).parent
    out.mkdir(parents=True, exist_ok=True)
    summary = summarize(report)
    summary.to_csv(out / "summary.csv", index=False)
    orderings = ordering_report(report)
    orderings.to_csv(out / "orderings.csv", index=False)
    print(summary.to_string(index=False))
    print(orderings.to_string(index=False))
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="svindex", description="spatial-visual index workbench")
    parser.add_argument("--config", default=None, help="JSON file of BenchmarkConfig fields")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic dataset file")
    gen.add_argument("--spec", default=None, help="JSON DatasetSpec; the standard clustered spec when omitted")
    gen.add_argument("--n", type=int, default=2000)
    gen.add_argument("--d", type=int, default=32)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--running-example", action="store_true", help="write the worked example")
    gen.add_argument("--workload-out", default=None, help="with --running-example, also write its query")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen)

    queries = sub.add_parser("queries", help="select a query workload from a dataset")
    queries.add_argument("--dataset", dest="dataset_file", required=True)
    queries.add_argument("--group", default="SU-VU", choices=[g.value for g in SelectivityGroup])
    queries.add_argument("--count", type=int, default=100)
    queries.add_argument("--seed", type=int, default=None)
    queries.add_argument("--range-index", dest="range_index", type=int, default=None)
    queries.add_argument("--plane-units-per-km", dest="plane_units_per_km", type=float, default=None)
    queries.add_argument("--sigma-index", dest="sigma_index", type=int, default=None)
    queries.add_argument("--sigma", type=float, default=None, help="explicit σ, overriding the quantile sweep")
    queries.add_argument("--explore-spatial", dest="explore_spatial", type=float, default=None)
    queries.add_argument("--explore-visual", dest="explore_visual", type=int, default=None)
    queries.add_argument("--out", required=True)
    queries.set_defaults(func=cmd_queries)

    build_cmd = sub.add_parser("build", help="build and persist one index structure")
    build_cmd.add_argument("--dataset", dest="dataset_file", required=True)
    build_cmd.add_argument("--structure", required=True, choices=[k.value for k in IndexKind])
    _add_index_flags(build_cmd)
    build_cmd.add_argument("--out", required=True)
    build_cmd.set_defaults(func=cmd_build)

    query = sub.add_parser("query", help="run workload queries against a persisted index")
    query.add_argument("--index", required=True)
    query.add_argument("--workload", required=True)
    query.add_argument("--qid", nargs="*", default=None)
    query.add_argument("--dataset", dest="dataset_file", default=None, help="also print the exact answer")
    query.set_defaults(func=cmd_query)

    bench = sub.add_parser("bench", help="run the benchmark grid")
    bench.add_argument("--dataset", default=None)
    bench.add_argument("--workload", default=None)
    bench.add_argument("--structures", nargs="+", choices=RUN_LABELS, default=None)
    bench.add_argument("--groups", nargs="+", choices=[g.value for g in SelectivityGroup], default=None)
    bench.add_argument("--queries-per-group", dest="queries_per_group", type=int, default=None)
    bench.add_argument("--range-index", dest="range_index", type=int, default=None)
    bench.add_argument("--plane-units-per-km", dest="plane_units_per_km", type=float, default=None)
    bench.add_argument("--sigmas", nargs="+", type=float, default=None)
    bench.add_argument("--sigma-index", dest="sigma_index", type=int, default=None)
    bench.add_argument("--explore-spatial", dest="explore_spatial", type=float, default=None)
    bench.add_argument("--explore-visual", dest="explore_visual", type=int, default=None)
    bench.add_argument("--seed", type=int, default=None)
    bench.add_argument("--timing-repeats", dest="timing_repeats", type=int, default=None)
    bench.add_argument("--workers", type=int, default=None)
    bench.add_argument("--no-sweeps", action="store_true")
    bench.add_argument("--running-example", action="store_true")
    _add_index_flags(bench)
    bench.add_argument("--out", default=None)
    bench.set_defaults(func=cmd_bench)

    report = sub.add_parser("report", help="recompute summaries and orderings from a report.csv")
    report.add_argument("--report", required=True)
    report.add_argument("--out", default=None)
    report.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SvIndexError as e:
        logger.error("%s", e)
        return 2


if __name__ == "__main__":
    sys.exit(main())

import json

import numpy as np
import pandas as pd
import pytest

from svindex.core.exceptions import ConfigError, FormatError, WorkloadError
from svindex.core.geo_image import GeoDataset, GeoImage
from svindex.evalkit.metrics import REPORT_COLUMNS
from svindex.evalkit.orderings import ORDERING_COLUMNS
from svindex.indexes.base import IndexKind
from svindex.workbench.benchmark import read_report, run_benchmark, runs_for
from svindex.workbench.cli import main
from svindex.workbench.config import RUN_LABELS, BenchmarkConfig
from svindex.workbench.dataset import ClusterSpec, DatasetSpec, generate_dataset, read_dataset, standard_spec, \
    write_dataset
from svindex.workbench.workload import DensityLevel, SelectivityGroup, density_levels, read_workload, \
    select_queries, sigma_quantiles, write_workload


class TestDataset:

    def test_generation_is_deterministic(self):
        spec = standard_spec(n=120, d=6, seed=4)
        a, b = generate_dataset(spec), generate_dataset(spec)
        assert a == b
        assert a.ids[:3] == ["I1", "I2", "I3"]
        assert generate_dataset(standard_spec(n=120, d=6, seed=5)) != a

    def test_file_round_trip(self, small_dataset, tmp_path):
        path = tmp_path / "images.csv"
        write_dataset(small_dataset, path)
        assert read_dataset(path) == small_dataset
        assert path.read_text().startswith("svx-dataset,v1,400,8\n")

    @pytest.mark.parametrize("text", ["", "svx-dataset,v2,1,2\nI1,0,0,1,2\n", "svx-dataset,v1,2,2\nI1,0,0,1,2\n",
                                      "svx-dataset,v1,1,2\nI1,0,0,1\n", "svx-dataset,v1,1,2\nI1,0,x,1,2\n"])
    def test_malformed_files(self, text, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(text)
        with pytest.raises(FormatError):
            read_dataset(path)

    def test_spec_validation(self):
        with pytest.raises(ConfigError):
            DatasetSpec(n=10, spatial_clusters=(ClusterSpec(1.0, 0.5, (0.0, 0.0)),))
        with pytest.raises(ConfigError):
            DatasetSpec(n=10, d=3, visual_clusters=(ClusterSpec(1.0, 1.0, (0.0, 0.0)),))
        with pytest.raises(ConfigError):
            ClusterSpec(spread=0.0, weight=1.0)

    def test_spec_from_file(self, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text(json.dumps({"n": 30, "d": 4, "seed": 2,
                                    "spatial_clusters": [{"spread": 1.0, "weight": 1.0, "center": [5, 5]}]}))
        spec = DatasetSpec.from_file(path)
        assert spec.spatial_clusters[0].center == (5.0, 5.0)
        assert len(generate_dataset(spec)) == 30

    def test_spec_unknown_key(self):
        with pytest.raises(ConfigError):
            DatasetSpec.from_dict({"n": 3, "colour": "blue"})


class TestWorkload:

    def test_density_terciles(self):
        rng = np.random.default_rng(0)
        points = np.vstack([rng.normal(0.0, 0.1, size=(30, 2)), rng.uniform(-50, 50, size=(30, 2))])
        levels = density_levels(points, k=5)
        assert np.bincount(levels, minlength=3).tolist() == [20, 20, 20]
        assert np.mean(levels[:30] == DensityLevel.DENSE.value) > 0.6

    def test_density_degenerate(self):
        assert density_levels(np.zeros((1, 2))).tolist() == [DensityLevel.UNIFORM.value]

    def test_group_parse(self):
        assert SelectivityGroup.parse("sd-vs") is SelectivityGroup.SD_VS
        assert SelectivityGroup.SS_VD.levels == (DensityLevel.SPARSE, DensityLevel.DENSE)
        with pytest.raises(WorkloadError):
            SelectivityGroup.parse("XX-YY")

    @pytest.mark.parametrize("group", list(SelectivityGroup))
    def test_selected_images_belong_to_group(self, group, small_dataset):
        spatial_levels = density_levels(small_dataset.spatial)
        visual_levels = density_levels(small_dataset.visual)
        try:
            queries = select_queries(small_dataset, group, 5, seed=3, spans=(4.0, 2.0), sigma=1.0)
        except WorkloadError:
            return
        want = tuple(level.value for level in group.levels)
        for i, q in enumerate(queries):
            assert q.qid == f"{group.value}-{i}"
            assert (q.spatial.width, q.spatial.height) == pytest.approx((4.0, 2.0))
            ordinal = next(o for o in range(len(small_dataset))
                           if np.array_equal(small_dataset[o].v, q.query_vector))
            assert (spatial_levels[ordinal], visual_levels[ordinal]) == want
            assert q.spatial.contains(small_dataset[ordinal].s)

    def test_select_edge_cases(self, small_dataset):
        assert select_queries(small_dataset, SelectivityGroup.SU_VU, 0, 0, (1.0, 1.0), 1.0) == []
        with pytest.raises(WorkloadError):
            select_queries(GeoDataset([], dim=8), SelectivityGroup.SU_VU, 1, 0, (1.0, 1.0), 1.0)

    def test_sigma_quantiles(self, small_dataset):
        sigmas = sigma_quantiles(small_dataset, [0.01, 0.02, 0.035, 0.05])
        assert sigmas == sorted(sigmas)
        assert sigmas[0] > 0.0
        with pytest.raises(WorkloadError):
            sigma_quantiles(GeoDataset([GeoImage("a", (0, 0), (1.0,))]), [0.5])

    def test_workload_round_trip(self, small_workload, tmp_path):
        path = tmp_path / "queries.csv"
        explored = [q.with_exploration(0.3, 9) for q in small_workload[:5]]
        write_workload(explored, path)
        loaded = read_workload(path)
        assert [q.qid for q in loaded] == [q.qid for q in explored]
        for before, after in zip(explored, loaded):
            assert after.spatial == before.spatial
            assert after.sigma == before.sigma
            assert (after.explore_spatial, after.explore_visual, after.seed) == (0.3, 9, before.seed)
            np.testing.assert_array_equal(after.query_vector, before.query_vector)

    def test_workload_bad_header(self, tmp_path):
        path = tmp_path / "queries.csv"
        path.write_text("something else\n")
        with pytest.raises(FormatError):
            read_workload(path)


class TestConfig:

    def test_defaults(self):
        cfg = BenchmarkConfig()
        assert cfg.structures == RUN_LABELS
        assert cfg.explore_spatial_max == 0.7
        index_cfg = cfg.index_config()
        assert index_cfg.rtree.fan_out == 85
        assert (index_cfg.tables, index_cfg.functions_per_table) == (3, 7)

    def test_merged_ignores_none(self):
        cfg = BenchmarkConfig().merged(seed=None, fan_out=16)
        assert cfg.seed == 0 and cfg.fan_out == 16
        with pytest.raises(ConfigError):
            BenchmarkConfig().merged(colour="blue")

    @pytest.mark.parametrize("overrides", [{"structures": ("DI", "KDTree")}, {"groups": ("XX-YY",)},
                                           {"range_index": 4}, {"sigma_quantiles": (0.0, 0.5)},
                                           {"units": "miles"}, {"workers": 0}])
    def test_invalid(self, overrides):
        with pytest.raises((ConfigError, WorkloadError)):
            BenchmarkConfig(**overrides)

    def test_from_file(self, tmp_path):
        path = tmp_path / "bench.json"
        path.write_text(json.dumps({"structures": ["DI", "SFI"], "queries_per_group": 4,
                                    "dataset": {"n": 50, "d": 4}}))
        cfg = BenchmarkConfig.from_file(path)
        assert cfg.structures == ("DI", "SFI")
        assert cfg.dataset.n == 50
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            BenchmarkConfig.from_file(path)

    def test_runs(self):
        runs = {run.label: run for run in runs_for(BenchmarkConfig())}
        assert runs["AugSFI-E"].kind is IndexKind.AUG_SFI and runs["AugSFI-E"].explore_visual == 15
        assert runs["AugVFI-E"].kind is IndexKind.AUG_VFI and runs["AugVFI-E"].explore_spatial == 0.5
        assert (runs["VFI"].explore_spatial, runs["VFI"].explore_visual) == (0.0, 0)


class TestBenchmark:

    def test_running_example(self, tmp_path):
        cfg = BenchmarkConfig(running_example=True, output_dir=str(tmp_path), timing_repeats=1)
        result = run_benchmark(cfg)

        assert list(result.report.columns) == REPORT_COLUMNS
        assert len(result.report) == len(RUN_LABELS)
        pages = result.report.set_index("structure")
        assert pages.loc["DI", ["pages_rtree", "pages_lsh", "pages_data"]].tolist() == [5, 2, 1]
        assert pages.loc["AugRTree", "recall"] == 1.0
        assert pages.loc["DI", "v_unmatch"] == 0
        assert (pages.precision == 1.0).all()

        verdicts = result.orderings.set_index("ordering")
        assert verdicts.loc["AugSFI<=SFI", "holds"]
        assert verdicts.loc["AugVFI<=VFI", "holds"]

        for name in ("report", "results", "summary", "orderings", "build", "timings"):
            assert (tmp_path / f"{name}.csv").exists()
        assert (tmp_path / "series" / "recall_vs_explore_visual.csv").exists()
        assert read_report(tmp_path / "report.csv").shape == result.report.shape

    def test_reports_are_reproducible(self, tmp_path):
        first = run_benchmark(BenchmarkConfig(running_example=True, output_dir=str(tmp_path / "a"),
                                              timing_repeats=1))
        second = run_benchmark(BenchmarkConfig(running_example=True, output_dir=str(tmp_path / "b"),
                                               timing_repeats=1))
        pd.testing.assert_frame_equal(first.report, second.report)
        assert (tmp_path / "a" / "report.csv").read_text() == (tmp_path / "b" / "report.csv").read_text()

    def test_empty_workload(self, small_dataset, tmp_path):
        cfg = BenchmarkConfig(structures=("DI", "SFI"), output_dir=str(tmp_path), timing_repeats=1)
        result = run_benchmark(cfg, dataset=small_dataset, queries=[], write=False)
        assert result.report.empty
        assert list(result.orderings.columns) == ORDERING_COLUMNS
        assert len(result.builds) == 2

    def test_generated_workload(self, small_dataset):
        cfg = BenchmarkConfig(structures=("DI", "SFI", "AugSFI"), queries_per_group=3, sigmas=(2.0,),
                              sigma_index=0, fan_out=8, page_size=1024, tables=2, functions_per_table=2,
                              timing_repeats=1, sweeps=False)
        result = run_benchmark(cfg, dataset=small_dataset, write=False)
        assert len(result.report) == 9
        assert set(result.report.qid) == {"SU-VU-0", "SU-VU-1", "SU-VU-2"}
        assert result.orderings.set_index("ordering").loc["AugSFI<=SFI", "holds"]

    def test_read_report_checks_columns(self, tmp_path):
        path = tmp_path / "report.csv"
        pd.DataFrame({"qid": ["q0"]}).to_csv(path, index=False)
        with pytest.raises(FormatError):
            read_report(path)


class TestCli:

    def test_end_to_end(self, tmp_path, capsys):
        dataset = tmp_path / "images.csv"
        workload = tmp_path / "queries.csv"
        index_dir = tmp_path / "index"
        assert main(["gen", "--running-example", "--workload-out", str(workload), "--out", str(dataset)]) == 0
        assert len(read_dataset(dataset)) == 11

        assert main(["build", "--dataset", str(dataset), "--structure", "AugRTree", "--fan-out", "3",
                     "--out", str(index_dir)]) == 0
        capsys.readouterr()
        assert main(["query", "--index", str(index_dir), "--workload", str(workload),
                     "--dataset", str(dataset)]) == 0
        printed = capsys.readouterr().out
        assert "I3 I4 I9" in printed

        out = tmp_path / "bench"
        assert main(["bench", "--running-example", "--timing-repeats", "1", "--no-sweeps", "--out", str(out)]) == 0
        assert main(["report", "--report", str(out / "report.csv"), "--out", str(tmp_path / "again")]) == 0
        assert (tmp_path / "again" / "orderings.csv").exists()

    def test_generate_and_select(self, tmp_path):
        dataset = tmp_path / "images.csv"
        assert main(["gen", "--n", "300", "--d", "6", "--seed", "1", "--out", str(dataset)]) == 0
        workload = tmp_path / "queries.csv"
        code = main(["queries", "--dataset", str(dataset), "--group", "SU-VU", "--count", "4", "--sigma", "2.0",
                     "--out", str(workload)])
        assert code == 0
        assert len(read_workload(workload)) == 4

    def test_errors_exit_with_status_2(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("not a dataset\n")
        assert main(["build", "--dataset", str(bad), "--structure", "DI", "--out", str(tmp_path / "x")]) == 2

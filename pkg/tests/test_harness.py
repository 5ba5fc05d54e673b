"""
マルチスタート実験と結果出力のテスト
"""

import pytest
import sys
from pathlib import Path
import json
import numpy as np
import pandas as pd

# プロジェクトルートをパスに追加
root_path = Path(__file__).parent.parent
sys.path.insert(0, str(root_path))

from bench.harness import (
    DatasetEntry,
    ExperimentConfig,
    attraction_rate,
    load_datasets,
    multistart,
    run_experiment,
)
from bench.report import CSV_COLUMNS, format_report, report_frame, write_report
from core.criteria import CriterionKind, build_context
from core.dataset_io import write_dataset_csv
from utils.error_handler import ConfigurationError, ParameterError
from utils.sample_data import random_instance

FAST = {"SA": {"max_chains": "20"}, "TS": {"maxiter": "20"}, "GA": {"maxiter": "10"}}


@pytest.fixture
def entry():
    """n=10 の小さなデータセット"""
    return DatasetEntry("tiny", random_instance(10, 8, np.random.default_rng(3)), 2)


def _config(**kwargs):
    defaults = dict(methods=("SA", "TS", "HC"), multistart=3, overrides=FAST, workers=1)
    defaults.update(kwargs)
    return ExperimentConfig(**defaults)


class TestAttractionRate:
    """誘引率のテスト"""

    def test_relative_tolerance(self):
        """W ≤ W*·(1+tol) の割合"""
        assert attraction_rate([10, 10.4, 11, 12], 10, 0.05) == 0.5

    def test_zero_optimum(self):
        """W* = 0 なら W = 0 の割合"""
        assert attraction_rate([0, 0, 1], 0, 0.05) == pytest.approx(2 / 3)

    def test_invalid_input(self):
        """空の列や非正の許容誤差は ParameterError"""
        with pytest.raises(ParameterError):
            attraction_rate([], 1, 0.05)
        with pytest.raises(ParameterError):
            attraction_rate([1, 2], 1, 0.0)


class TestExperimentConfig:
    """実験設定の検証のテスト"""

    def test_unknown_method(self):
        """未知の手法は ConfigurationError"""
        with pytest.raises(ConfigurationError):
            _config(methods=("SA", "XX"))

    def test_unknown_override(self):
        """未知のパラメータは ConfigurationError"""
        with pytest.raises(ConfigurationError):
            _config(overrides={"SA": {"temperature": "1"}})

    def test_invalid_override_value(self):
        """範囲外の値は ConfigurationError"""
        with pytest.raises(ConfigurationError):
            _config(overrides={"SA": {"chi0": "1.5"}})

    def test_multistart_must_be_positive(self):
        """m ≥ 1"""
        with pytest.raises(ConfigurationError):
            _config(multistart=0)

    def test_methods_normalized(self):
        """手法IDは大文字にそろえる"""
        assert _config(methods=("sa", " ts")).methods == ("SA", "TS")

    def test_hash_ignores_workers(self):
        """ワーカー数は結果に影響しないのでハッシュに含めない"""
        assert _config(workers=1).config_hash() == _config(workers=4).config_hash()
        assert _config(multistart=3).config_hash() != _config(multistart=4).config_hash()
        assert "workers" not in _config().to_dict()


class TestLoadDatasets:
    """データセットの読み込みのテスト"""

    def test_requires_source(self):
        """データファイルも組み込み表もなければ ConfigurationError"""
        with pytest.raises(ConfigurationError):
            load_datasets(_config())

    def test_data_path_requires_k(self, tmp_path):
        """データファイルには k が必要"""
        path = write_dataset_csv(random_instance(6, 4, np.random.default_rng(0)), tmp_path / "d.csv")

        with pytest.raises(ConfigurationError):
            load_datasets(_config(data_path=str(path)))

        entries = load_datasets(_config(data_path=str(path), k=2))
        assert entries[0].name == "d"
        assert entries[0].truth is None

    def test_builtins(self):
        """組み込み表は表のKと正解を持つ"""
        entries = load_datasets(_config(builtins=(1, 3), p=8))

        assert [e.name for e in entries] == ["table01", "table03"]
        assert entries[0].k == 3
        assert entries[0].truth is not None
        assert entries[0].data.p == 8


class TestMultistart:
    """マルチスタート実行のテスト"""

    def test_seeds_follow_base_seed(self, entry):
        """シードは base_seed + i"""
        ctx = build_context(entry.data, CriterionKind.L1_MEDIAN)

        results = multistart(_config(base_seed=10), "SA", ctx, 2)

        assert [r.seed for r in results] == [10, 11, 12]
        assert all(r.method == "SA" for r in results)

    def test_deterministic_method_runs_once(self, entry):
        """決定的な手法は1回だけ実行する"""
        ctx = build_context(entry.data, CriterionKind.L1_MEDIAN)

        results = multistart(_config(), "HC", ctx, 2)

        assert len(results) == 1

    @pytest.mark.slow
    def test_parallel_matches_sequential(self, entry):
        """並列実行でも結果は同じ"""
        ctx = build_context(entry.data, CriterionKind.L1_MEDIAN)

        sequential = multistart(_config(workers=1), "TS", ctx, 2)
        parallel = multistart(_config(workers=2), "TS", ctx, 2)

        assert [r.best_w for r in sequential] == [r.best_w for r in parallel]
        assert [r.seed for r in parallel] == [0, 1, 2]


class TestRunExperiment:
    """実験全体のテスト"""

    def test_summary(self, entry):
        """W* は全手法の最良で、誘引率は確率的な手法だけに付く"""
        report = run_experiment(_config(), [entry])

        dataset = report.datasets[0]
        best = [dataset.summary(m).best_w for m in ("SA", "TS", "HC")]
        assert dataset.w_star == min(best)
        assert dataset.summary("HC").runs == 1
        assert dataset.summary("HC").attraction_rate is None
        assert 0.0 <= dataset.summary("SA").attraction_rate <= 1.0
        assert dataset.summary("SA").runs == 3

    def test_body_is_reproducible(self, entry):
        """同じ設定なら本体は同一（時刻は meta にだけ入る）"""
        first = run_experiment(_config(), [entry])
        second = run_experiment(_config(), [entry])

        assert json.dumps(first.body(), sort_keys=True) == json.dumps(second.body(), sort_keys=True)
        assert "started_at" in first.meta()

    def test_failed_method_is_recorded(self, entry):
        """失敗した手法は記録され、他の手法は続行する"""
        config = _config(methods=("SA", "PAM"), criterion=CriterionKind.SUM_PAIRWISE)

        report = run_experiment(config, [entry])

        dataset = report.datasets[0]
        assert dataset.summary("PAM").error is not None
        assert dataset.summary("PAM").runs == 0
        assert dataset.w_star == dataset.summary("SA").best_w

    def test_per_method_w_star(self, entry):
        """手法ごとの W* では最良の実行が必ず数えられる"""
        report = run_experiment(_config(per_method_w_star=True), [entry])

        assert report.datasets[0].summary("SA").attraction_rate > 0


class TestReport:
    """結果出力のテスト"""

    @pytest.fixture
    def report(self, entry):
        """小さな実験結果"""
        return run_experiment(_config(), [entry])

    def test_frame(self, report):
        """データセット×手法ごとに1行"""
        frame = report_frame(report)

        assert list(frame.columns) == CSV_COLUMNS
        assert frame["method"].tolist() == ["SA", "TS", "HC"]

    def test_json(self, report):
        """JSON は report と meta を持つ"""
        payload = json.loads(format_report(report, "json"))

        assert set(payload) == {"report", "meta"}
        assert payload["report"]["datasets"][0]["name"] == "tiny"
        assert "meta" not in json.loads(format_report(report, "json", include_meta=False))

    def test_table(self, report):
        """表には手法IDが並ぶ"""
        text = format_report(report, "table")

        for method in ("SA", "TS", "HC"):
            assert method in text

    def test_unknown_format(self, report):
        """未知の形式は ConfigurationError"""
        with pytest.raises(ConfigurationError):
            format_report(report, "xml")

    def test_write_by_suffix(self, report, tmp_path):
        """拡張子から形式を決める"""
        path = write_report(report, tmp_path / "result.csv")

        frame = pd.read_csv(path)
        assert list(frame.columns) == CSV_COLUMNS
        assert len(frame) == 3

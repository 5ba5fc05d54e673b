"""
コマンドラインインターフェースのテスト
"""

import pytest
import sys
from pathlib import Path
import json
import numpy as np

# プロジェクトルートをパスに追加
root_path = Path(__file__).parent.parent
sys.path.insert(0, str(root_path))

from cli import EXIT_CONFIG, EXIT_FAILURE, EXIT_OK, main, parse_builtins, parse_overrides
from core.dataset_io import read_dataset_csv, read_labels, write_dataset_csv
from utils.error_handler import ConfigurationError
from utils.sample_data import random_instance


@pytest.fixture
def small_csv(tmp_path):
    """n=8 のデータファイル"""
    return str(write_dataset_csv(random_instance(8, 6, np.random.default_rng(1)), tmp_path / "small.csv"))


class TestArgumentParsing:
    """引数解釈のテスト"""

    def test_parse_overrides(self):
        """--手法.名前 値 と --手法.名前=値"""
        overrides = parse_overrides(["--sa.chi0", "0.9", "--ts.tabu-len=7", "--SA.gamma", "0.8"])

        assert overrides == {"SA": {"chi0": "0.9", "gamma": "0.8"}, "TS": {"tabu-len": "7"}}

    def test_parse_overrides_errors(self):
        """解釈できない引数は ConfigurationError"""
        with pytest.raises(ConfigurationError):
            parse_overrides(["--verbose2"])
        with pytest.raises(ConfigurationError):
            parse_overrides(["--sa.chi0"])
        with pytest.raises(ConfigurationError):
            parse_overrides(["--xx.chi0", "1"])

    def test_parse_builtins(self):
        """番号のリストと all"""
        assert parse_builtins("1,3") == (1, 3)
        assert parse_builtins("all") == tuple(range(1, 17))
        assert parse_builtins(None) == ()
        with pytest.raises(ConfigurationError):
            parse_builtins("one")


class TestGenerateCommand:
    """generate コマンドのテスト"""

    def test_builtin(self, tmp_path):
        """組み込み表をデータ・正解・条件の3ファイルに書き出す"""
        out = tmp_path / "t1.csv"

        code = main(["generate", "--builtin", "1", "--p", "6", "--out", str(out)])

        assert code == EXIT_OK
        data = read_dataset_csv(out)
        assert (data.n, data.p) == (120, 6)
        assert read_labels(tmp_path / "t1.truth.csv").k == 3
        spec = json.loads((tmp_path / "t1.spec.json").read_text(encoding="utf-8"))
        assert spec["name"] == "table01"
        assert spec["sizes"] == [40, 40, 40]

    def test_custom(self, tmp_path):
        """任意の条件で生成"""
        out = tmp_path / "c.csv"

        code = main(["generate", "--n", "12", "--k", "2", "--pis", "0.2,0.8",
                     "--scheme", "onebighalf", "--out", str(out)])

        assert code == EXIT_OK
        assert read_dataset_csv(out).n == 12

    def test_missing_arguments(self):
        """条件が足りなければ終了コード2"""
        assert main(["generate", "--n", "12"]) == EXIT_CONFIG

    def test_invalid_probability(self, tmp_path):
        """範囲外の π は終了コード2"""
        code = main(["generate", "--n", "12", "--k", "2", "--pis", "0,0.8",
                     "--out", str(tmp_path / "x.csv")])

        assert code == EXIT_CONFIG


class TestRunCommand:
    """run コマンドのテスト"""

    def test_run_and_write_labels(self, small_csv, tmp_path, capsys):
        """1回実行して W とラベルを出力する"""
        labels = tmp_path / "labels.csv"

        code = main(["run", "--data", small_csv, "--k", "2", "--method", "sa",
                     "--seed", "3", "--sa.max_chains", "10", "--out", str(labels)])

        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "method=SA" in out
        assert "W=" in out
        assert read_labels(labels).n == 8

    def test_data_requires_k(self, small_csv):
        """--data には --k が必要"""
        assert main(["run", "--data", small_csv, "--method", "SA"]) == EXIT_CONFIG

    def test_unknown_method(self, small_csv):
        """未知の手法は終了コード2"""
        assert main(["run", "--data", small_csv, "--k", "2", "--method", "XYZ"]) == EXIT_CONFIG

    def test_invalid_override(self, small_csv):
        """範囲外のパラメータは終了コード2"""
        code = main(["run", "--data", small_csv, "--k", "2", "--method", "SA", "--sa.chi0", "2"])

        assert code == EXIT_CONFIG

    def test_criterion_mismatch(self, small_csv):
        """PAM を SumPairwise で使うと終了コード2"""
        code = main(["run", "--data", small_csv, "--k", "2", "--method", "PAM", "--criterion", "sum"])

        assert code == EXIT_CONFIG

    def test_missing_file(self, tmp_path):
        """存在しないファイルは終了コード2"""
        code = main(["run", "--data", str(tmp_path / "none.csv"), "--k", "2", "--method", "SA"])

        assert code == EXIT_CONFIG


class TestBenchCommand:
    """bench コマンドのテスト"""

    def test_json_output(self, small_csv, tmp_path):
        """JSON で結果を書き出す"""
        out = tmp_path / "bench.json"

        code = main(["bench", "--data", small_csv, "--k", "2", "--methods", "SA,HC",
                     "--multistart", "2", "--sa.max_chains", "10", "--format", "json",
                     "--out", str(out)])

        assert code == EXIT_OK
        payload = json.loads(out.read_text(encoding="utf-8"))
        methods = payload["report"]["datasets"][0]["methods"]
        assert [m["method"] for m in methods] == ["SA", "HC"]
        assert methods[0]["seeds"] == [0, 1]

    def test_failed_method_exit_code(self, small_csv, capsys):
        """手法が失敗すると他の結果を出力して終了コード1"""
        code = main(["bench", "--data", small_csv, "--k", "2", "--methods", "HC,PAM",
                     "--multistart", "2", "--criterion", "sum"])

        assert code == EXIT_FAILURE
        assert "HC" in capsys.readouterr().out

    def test_unknown_override_parameter(self, small_csv):
        """未知のパラメータは実行前に終了コード2"""
        code = main(["bench", "--data", small_csv, "--k", "2", "--methods", "SA",
                     "--sa.unknown", "1"])

        assert code == EXIT_CONFIG


class TestOracleCommand:
    """oracle コマンドのテスト"""

    def test_optimum_and_monotonicity(self, small_csv, capsys):
        """最適値と単調性をJSONで出力する"""
        code = main(["oracle", "--data", small_csv, "--k", "2", "--monotonicity", "4"])

        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["k"] == 2
        assert len(payload["labels"]) == 8
        assert payload["monotonicity"]["holds"] is True

    def test_guard(self, tmp_path):
        """上限を超える n は終了コード2"""
        path = write_dataset_csv(random_instance(13, 4, np.random.default_rng(0)), tmp_path / "big.csv")

        assert main(["oracle", "--data", str(path), "--k", "2"]) == EXIT_CONFIG

"""
データセット入出力のテスト
"""

import pytest
import sys
from pathlib import Path
import io
import numpy as np

# プロジェクトルートをパスに追加
root_path = Path(__file__).parent.parent
sys.path.insert(0, str(root_path))

from core.dataset_io import read_dataset_csv, read_labels, write_dataset_csv, write_labels
from core.model import BinaryDataset, Partition
from utils.error_handler import DataFormatError


class TestReadDatasetCsv:
    """CSV読み込みのテスト"""

    def test_without_header(self, tmp_path):
        """ヘッダーなしのCSV"""
        path = tmp_path / "plain.csv"
        path.write_text("0,1,1\n1,0,0\n1,1,1\n")

        data = read_dataset_csv(path)

        assert data.n == 3
        assert data.p == 3
        assert data.ids is None
        assert data.values[0].tolist() == [0, 1, 1]

    def test_with_header_and_ids(self, tmp_path):
        """ヘッダーと id 列"""
        path = tmp_path / "named.csv"
        path.write_text("id,a,b\nx,0,1\ny,1,1\n")

        data = read_dataset_csv(path)

        assert data.ids == ("x", "y")
        assert data.values.tolist() == [[0, 1], [1, 1]]

    def test_rejects_non_binary_cell(self, tmp_path):
        """0/1以外のセルは位置付きで拒否される"""
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n0,1\n1,2\n")

        with pytest.raises(DataFormatError) as excinfo:
            read_dataset_csv(path)
        assert "'b'" in str(excinfo.value)

    def test_empty_file(self, tmp_path):
        """空ファイルは DataFormatError"""
        path = tmp_path / "empty.csv"
        path.write_text("")

        with pytest.raises(DataFormatError):
            read_dataset_csv(path)

    def test_header_only(self, tmp_path):
        """データ行がなければ DataFormatError"""
        path = tmp_path / "header.csv"
        path.write_text("a,b\n")

        with pytest.raises(DataFormatError):
            read_dataset_csv(path)

    def test_missing_file(self, tmp_path):
        """存在しないファイルは FileNotFoundError"""
        with pytest.raises(FileNotFoundError):
            read_dataset_csv(tmp_path / "missing.csv")

    def test_file_object(self):
        """アップロードされたファイルオブジェクトも読める"""
        buffer = io.StringIO("v1,v2\n1,0\n0,0\n")

        data = read_dataset_csv(buffer)

        assert data.values.tolist() == [[1, 0], [0, 0]]


class TestWriteDataset:
    """書き出しのテスト"""

    def test_dataset_written_and_read_back(self, tmp_path):
        """書き出したCSVを読み込むと同じデータ"""
        data = BinaryDataset.from_array([[0, 1, 0], [1, 1, 0]], ids=["r1", "r2"])

        path = write_dataset_csv(data, tmp_path / "out.csv")

        assert read_dataset_csv(path) == data
        assert path.read_text().splitlines()[0] == "id,v1,v2,v3"

    def test_labels_written_and_read_back(self, tmp_path):
        """クラスラベルファイル"""
        p = Partition(np.array([1, 0, 2, 2]), 3)

        path = write_labels(p, tmp_path / "labels.csv")

        assert read_labels(path) == p

"""
データセットの入出力
CSV（1行1対象、0/1の列、ヘッダー行は任意）とクラスラベルファイル
"""

from pathlib import Path
from typing import IO, Union

import numpy as np
import pandas as pd

from core.model import BinaryDataset, Partition
from utils.error_handler import DataFormatError, get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]


def _looks_like_header(first_row: pd.Series) -> bool:
    """先頭行に 0/1 以外の文字列があればヘッダーとみなす"""
    for cell in first_row.tolist():
        if str(cell).strip() not in ("0", "1"):
            return True
    return False


def read_dataset_csv(path: Union[PathLike, IO]) -> BinaryDataset:
    """
    CSVファイルからデータセットを読み込む

    ヘッダーに "id" 列があれば行ラベルとして使う。0/1以外のセルは拒否する。

    Args:
        path: CSVファイルのパス、またはアップロードされたファイルオブジェクト

    Returns:
        データセット

    Raises:
        DataFormatError: 0/1以外のセル、空ファイルなど
    """
    if isinstance(path, (str, Path)):
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"データファイルが見つかりません: {path}")
        label = str(path)
    else:
        label = getattr(path, "name", "<upload>")

    try:
        raw = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=True)
    except pd.errors.EmptyDataError as e:
        raise DataFormatError(f"空のファイルです: {label}") from e

    ids = None
    if _looks_like_header(raw.iloc[0]):
        header = [str(h).strip() for h in raw.iloc[0].tolist()]
        raw = raw.iloc[1:].reset_index(drop=True)
        raw.columns = header
        if header and header[0].lower() == "id":
            ids = raw.iloc[:, 0].astype(str).tolist()
            raw = raw.iloc[:, 1:]
    else:
        raw.columns = [f"v{j}" for j in range(raw.shape[1])]

    if raw.empty:
        raise DataFormatError(f"データ行がありません: {label}")

    cells = raw.apply(lambda col: col.str.strip())
    valid = cells.isin(["0", "1"])
    if not valid.values.all():
        row, col = np.argwhere(~valid.values)[0]
        raise DataFormatError(
            f"{label}: 行 {row + 1}, 列 '{raw.columns[col]}' の値 {cells.iat[row, col]!r} は0/1ではありません"
        )

    values = cells.astype(np.int8).to_numpy()
    logger.info(f"データセットを読み込みました: {label} (n={values.shape[0]}, p={values.shape[1]})")
    return BinaryDataset(values, tuple(ids) if ids is not None else None)


def write_dataset_csv(data: BinaryDataset, path: PathLike) -> Path:
    """
    データセットをヘッダー付きCSVで書き出す

    Returns:
        書き出したパス
    """
    path = Path(path)
    frame = pd.DataFrame(data.values, columns=[f"v{j + 1}" for j in range(data.p)])
    if data.ids is not None:
        frame.insert(0, "id", list(data.ids))
    frame.to_csv(path, index=False)
    return path


def write_labels(partition: Partition, path: PathLike) -> Path:
    """1行1クラスラベルのファイルを書き出す"""
    path = Path(path)
    pd.DataFrame({"label": partition.assign}).to_csv(path, index=False)
    return path


def read_labels(path: PathLike) -> Partition:
    """write_labels の出力を分割として読み込む"""
    frame = pd.read_csv(Path(path))
    if "label" not in frame.columns:
        raise DataFormatError(f"{path}: 'label' 列がありません")
    assign = frame["label"].to_numpy(dtype=np.int64)
    return Partition(assign, int(assign.max()) + 1)

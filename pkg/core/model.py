"""
データモデル
二値データセット、非類似度行列、分割、移動と2つの二値非類似度指標
"""

import hashlib
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform

from utils.error_handler import (
    DimensionError,
    PreconditionError,
    ConsistencyError,
    ParameterError,
    DataFormatError,
)


class DissimilarityKind(str, Enum):
    """二値非類似度の種類"""
    L1 = "l1"
    JACCARD = "jaccard"


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class BinaryDataset:
    """
    n×p の0/1行列（対象の集合）

    Attributes:
        values: 0/1のみを含む n×p 行列
        ids: 行ラベル（任意）
    """
    values: np.ndarray
    ids: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 2:
            raise DimensionError(f"2次元行列が必要です (ndim={values.ndim})")
        n, p = values.shape
        if n < 2 or p < 1:
            raise DataFormatError(f"n ≥ 2, p ≥ 1 が必要です (n={n}, p={p})")
        if not np.isin(values, (0, 1)).all():
            bad = np.argwhere(~np.isin(values, (0, 1)))[0]
            raise DataFormatError(
                f"0/1以外の値があります (行 {bad[0]}, 列 {bad[1]}: {values[bad[0], bad[1]]!r})"
            )
        object.__setattr__(self, "values", _readonly(values.astype(np.int8, copy=True)))
        if self.ids is not None:
            ids = tuple(str(i) for i in self.ids)
            if len(ids) != n:
                raise DimensionError(f"行ラベル数 {len(ids)} が行数 {n} と一致しません")
            object.__setattr__(self, "ids", ids)

    @classmethod
    def from_array(cls, values: Sequence, ids: Optional[Sequence[str]] = None) -> "BinaryDataset":
        """配列ライクな値からデータセットを作成"""
        return cls(np.asarray(values), tuple(ids) if ids is not None else None)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def p(self) -> int:
        return int(self.values.shape[1])

    def hash(self) -> str:
        """値の内容ハッシュ（再現性の確認用）"""
        digest = hashlib.sha1()
        digest.update(np.asarray(self.values.shape, dtype=np.int64).tobytes())
        digest.update(self.values.tobytes())
        return digest.hexdigest()

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryDataset):
            return NotImplemented
        return self.ids == other.ids and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class DissimilarityMatrix:
    """
    事前計算した対称な n×n 非類似度行列

    L1 の場合は整数 (int64)、Jaccard の場合は float64 で保持する。
    """
    d: np.ndarray
    kind: DissimilarityKind

    def __post_init__(self):
        d = np.asarray(self.d)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise DimensionError(f"正方行列が必要です (shape={d.shape})")
        if np.any(np.diag(d) != 0):
            raise ConsistencyError("対角成分は0でなければなりません")
        if not np.array_equal(d, d.T):
            raise ConsistencyError("非類似度行列が対称ではありません")
        if np.any(d < 0):
            raise ConsistencyError("非類似度は非負でなければなりません")
        kind = DissimilarityKind(self.kind)
        if kind is DissimilarityKind.L1:
            d = d.astype(np.int64, copy=True)
        else:
            if np.any(d > 1):
                raise ConsistencyError("Jaccard非類似度は [0, 1] に収まる必要があります")
            d = d.astype(np.float64, copy=True)
        object.__setattr__(self, "d", _readonly(d))
        object.__setattr__(self, "kind", kind)

    @property
    def n(self) -> int:
        return int(self.d.shape[0])

    @property
    def is_integer(self) -> bool:
        return self.kind is DissimilarityKind.L1

    def __getitem__(self, index):
        return self.d[index]


def _check_pair(x, y) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionError(f"同じ長さのベクトルが必要です ({x.shape} と {y.shape})")
    return x, y


def l1_dissimilarity(x, y) -> int:
    """
    L1 非類似度（0/1ベクトルではハミング距離）

    Args:
        x: 0/1ベクトル
        y: 0/1ベクトル

    Returns:
        異なる座標の数
    """
    x, y = _check_pair(x, y)
    return int(np.abs(x.astype(np.int64) - y.astype(np.int64)).sum())


def jaccard_dissimilarity(x, y) -> float:
    """
    Jaccard 非類似度 1 − a/(a+b+c)

    両方とも全0のベクトルは同一とみなし 0 を返す。

    Args:
        x: 0/1ベクトル
        y: 0/1ベクトル

    Returns:
        [0, 1] の非類似度
    """
    x, y = _check_pair(x, y)
    xb = x.astype(bool)
    yb = y.astype(bool)
    a = int(np.sum(xb & yb))
    union = int(np.sum(xb | yb))
    if union == 0:
        return 0.0
    return 1.0 - a / union


def compute_dissimilarity_matrix(data: BinaryDataset,
                                 kind: DissimilarityKind = DissimilarityKind.L1) -> DissimilarityMatrix:
    """
    全ペアの非類似度行列を計算

    Args:
        data: データセット
        kind: 非類似度の種類

    Returns:
        非類似度行列
    """
    kind = DissimilarityKind(kind)
    values = data.values.astype(bool)
    if kind is DissimilarityKind.L1:
        condensed = pdist(values, metric="hamming") * data.p
        matrix = np.rint(squareform(condensed)).astype(np.int64)
    else:
        condensed = pdist(values, metric="jaccard")
        # 古いscipyは全0同士でnanを返す
        condensed = np.nan_to_num(condensed, nan=0.0)
        matrix = squareform(condensed)
    return DissimilarityMatrix(matrix, kind)


@dataclass(frozen=True, eq=False)
class Partition:
    """
    n 個の対象の K 個の空でないクラスへの割当

    割当ベクトルが唯一の正であり、クラスのメンバーは必要な時に再構成する。
    最適化の状態では 2 ≤ K < n だが、デンドログラムの切断では K = 1 や K = n も表現できる。
    """
    assign: np.ndarray
    k: int

    def __post_init__(self):
        assign = np.asarray(self.assign)
        if assign.ndim != 1:
            raise DimensionError("割当は1次元ベクトルでなければなりません")
        if not np.issubdtype(assign.dtype, np.integer):
            if not np.all(np.equal(np.mod(assign, 1), 0)):
                raise ConsistencyError("割当は整数でなければなりません")
        assign = assign.astype(np.int64, copy=True)
        k = int(self.k)
        n = assign.shape[0]
        if not 1 <= k <= n:
            raise ParameterError(f"クラス数 K={k} は 1..{n} の範囲でなければなりません")
        if assign.min() < 0 or assign.max() >= k:
            raise ConsistencyError(f"クラス番号は 0..{k - 1} でなければなりません")
        sizes = np.bincount(assign, minlength=k)
        if np.any(sizes == 0):
            empty = np.flatnonzero(sizes == 0).tolist()
            raise PreconditionError(f"空のクラスがあります: {empty}")
        object.__setattr__(self, "assign", _readonly(assign))
        object.__setattr__(self, "k", k)

    @property
    def n(self) -> int:
        return int(self.assign.shape[0])

    def members(self, c: int) -> np.ndarray:
        """クラス c のメンバー（昇順の添字）"""
        return np.flatnonzero(self.assign == c)

    def classes(self) -> list:
        """全クラスのメンバーリスト"""
        return [self.members(c) for c in range(self.k)]

    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.assign, minlength=self.k)

    def fingerprint(self) -> str:
        """割当ベクトルのハッシュ"""
        return hashlib.sha1(self.assign.tobytes()).hexdigest()

    def relabel_canonical(self) -> "Partition":
        """初出順にクラス番号を振り直した分割（ラベルに依存しない比較用）"""
        mapping = {}
        relabeled = np.empty_like(self.assign)
        for i, c in enumerate(self.assign.tolist()):
            if c not in mapping:
                mapping[c] = len(mapping)
            relabeled[i] = mapping[c]
        return Partition(relabeled, self.k)

    def same_grouping(self, other: "Partition") -> bool:
        """ラベルの付け方を無視して同じ分割かどうか"""
        return np.array_equal(
            self.relabel_canonical().assign, other.relabel_canonical().assign
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.assign, other.assign)

    __hash__ = None


@dataclass(frozen=True)
class Move:
    """対象 object をクラス from_class から to_class へ移す単一移動"""
    object: int
    from_class: int
    to_class: int

    def __post_init__(self):
        if self.from_class == self.to_class:
            raise PreconditionError(
                f"移動元と移動先が同じクラスです (object={self.object}, class={self.from_class})"
            )

    def inverse(self) -> "Move":
        return Move(self.object, self.to_class, self.from_class)


def check_move(assign: np.ndarray, sizes: np.ndarray, m: Move) -> None:
    """
    移動が現在の割当に対して正当か検証

    Raises:
        ParameterError: 添字が範囲外
        ConsistencyError: from_class が現在のクラスと異なる
        PreconditionError: 移動元クラスが空になる
    """
    k = sizes.shape[0]
    if not 0 <= m.object < assign.shape[0]:
        raise ParameterError(f"対象番号 {m.object} が範囲外です")
    if not 0 <= m.to_class < k or not 0 <= m.from_class < k:
        raise ParameterError(f"クラス番号が範囲外です ({m.from_class} → {m.to_class}, K={k})")
    if assign[m.object] != m.from_class:
        raise ConsistencyError(
            f"対象 {m.object} はクラス {assign[m.object]} に属しています (from_class={m.from_class})"
        )
    if sizes[m.from_class] < 2:
        raise PreconditionError(f"クラス {m.from_class} が空になる移動です")


def apply_move(p: Partition, m: Move) -> Partition:
    """
    移動を適用した新しい分割を返す

    Args:
        p: 元の分割
        m: 移動

    Returns:
        対象だけが to_class に移った分割
    """
    check_move(p.assign, p.class_sizes(), m)
    assign = p.assign.copy()
    assign[m.object] = m.to_class
    return Partition(assign, p.k)


def check_class_count(n: int, k: int) -> None:
    """最適化で扱うクラス数 2 ≤ K < n を検証"""
    if not 2 <= k < n:
        raise ParameterError(f"クラス数は 2 ≤ K < n でなければなりません (K={k}, n={n})")


def repair_assignment(assign: np.ndarray,
                      k: int,
                      rng: np.random.Generator,
                      source: str = "random") -> np.ndarray:
    """
    空のクラスを埋める修復

    Args:
        assign: 割当ベクトル（その場で変更する）
        k: クラス数
        rng: 乱数生成器
        source: "random" は大きさ2以上のクラスから無作為に1個、
                "largest" は最大クラスから無作為に1個を移す

    Returns:
        修復済みの割当ベクトル
    """
    if assign.shape[0] < k:
        raise ParameterError(f"対象数 {assign.shape[0]} がクラス数 {k} より少ないです")
    sizes = np.bincount(assign, minlength=k)
    for empty in np.flatnonzero(sizes == 0):
        if source == "largest":
            donor_class = int(np.argmax(sizes))
            candidates = np.flatnonzero(assign == donor_class)
        else:
            candidates = np.flatnonzero(sizes[assign] >= 2)
        victim = int(rng.choice(candidates))
        sizes[assign[victim]] -= 1
        assign[victim] = empty
        sizes[empty] += 1
    return assign


def random_partition(n: int, k: int, rng: np.random.Generator) -> Partition:
    """
    一様ランダムな割当を修復した K 分割

    Args:
        n: 対象数
        k: クラス数
        rng: 乱数生成器

    Returns:
        全クラスが空でない分割
    """
    check_class_count(n, k)
    assign = rng.integers(0, k, size=n)
    return Partition(repair_assignment(assign, k, rng), k)

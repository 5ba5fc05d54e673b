"""
集約基準
クラス内の異質性 δ_sum / δ_L1、分割の W / I / B、単一移動の差分 ΔW

δ_sum と I(Ω) は順序対の二重和（非順序対はそれぞれ2回数える）で定義する。
argmin は変わらず、B = I − W ≥ 0 とも整合する。
"""

import copy
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np

from core.model import (
    BinaryDataset,
    DissimilarityKind,
    DissimilarityMatrix,
    Move,
    Partition,
    check_move,
    compute_dissimilarity_matrix,
)
from utils.error_handler import ConfigurationError, DimensionError, PreconditionError

Number = Union[int, float]


class CriterionKind(str, Enum):
    """クラス内異質性の定義"""
    SUM_PAIRWISE = "sum"
    L1_MEDIAN = "l1"


@dataclass(frozen=True, eq=False)
class CriterionContext:
    """
    基準の評価に必要な不変の文脈

    I(Ω)、適応度、蟻の可視度のため非類似度行列は常に持つ。
    L1Median ではデータセットも必要。
    """
    kind: CriterionKind
    dissim: DissimilarityMatrix
    data: Optional[BinaryDataset] = None

    def __post_init__(self):
        kind = CriterionKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is CriterionKind.L1_MEDIAN and self.data is None:
            raise ConfigurationError("L1Median 基準にはデータセットが必要です")
        if self.data is not None and self.data.n != self.dissim.n:
            raise DimensionError(
                f"データセット (n={self.data.n}) と非類似度行列 (n={self.dissim.n}) の大きさが違います"
            )

    @property
    def n(self) -> int:
        return self.dissim.n

    @property
    def is_integer(self) -> bool:
        """W が整数で厳密に計算されるか"""
        if self.kind is CriterionKind.L1_MEDIAN:
            return True
        return self.dissim.is_integer

    @cached_property
    def total(self) -> Number:
        """I(Ω)（キャッシュ）"""
        return total_inertia(self.dissim)

    def scalar(self, value) -> Number:
        return int(value) if self.is_integer else float(value)


def build_context(data: BinaryDataset,
                  criterion: CriterionKind = CriterionKind.L1_MEDIAN,
                  dissim_kind: DissimilarityKind = DissimilarityKind.L1) -> CriterionContext:
    """データセットから基準の文脈を作成"""
    dissim = compute_dissimilarity_matrix(data, dissim_kind)
    return CriterionContext(CriterionKind(criterion), dissim, data)


def _members(cluster_members: Sequence[int]) -> np.ndarray:
    members = np.asarray(cluster_members, dtype=np.int64)
    if members.size == 0:
        raise PreconditionError("空のクラスには δ を定義できません")
    return members


def delta_sum(cluster_members: Sequence[int], d: DissimilarityMatrix) -> Number:
    """
    δ_sum: クラス内の全順序対の非類似度の和

    Args:
        cluster_members: クラスに属する対象の添字
        d: 非類似度行列

    Returns:
        非負の値（L1 なら整数）
    """
    members = _members(cluster_members)
    total = d.d[np.ix_(members, members)].sum()
    return int(total) if d.is_integer else float(total)


def median_vector(cluster_members: Sequence[int], data: BinaryDataset) -> np.ndarray:
    """
    クラスの中央値ベクトル（座標ごとの多数決、同数は0）

    Args:
        cluster_members: クラスに属する対象の添字
        data: データセット

    Returns:
        0/1ベクトル
    """
    members = _members(cluster_members)
    ones = data.values[members].sum(axis=0, dtype=np.int64)
    return (2 * ones > members.size).astype(np.int8)


def delta_l1(cluster_members: Sequence[int], data: BinaryDataset) -> int:
    """
    δ_L1: メンバーから中央値ベクトルへの L1 距離の和

    閉形式 Σ_j min(ones_j, size − ones_j) で計算する。
    """
    members = _members(cluster_members)
    ones = data.values[members].sum(axis=0, dtype=np.int64)
    return int(np.minimum(ones, members.size - ones).sum())


def _one_hot(assign: np.ndarray, k: int, dtype) -> np.ndarray:
    return np.eye(k, dtype=dtype)[assign]


def class_deltas(assign: np.ndarray, k: int, ctx: CriterionContext) -> np.ndarray:
    """全クラスの δ をまとめて計算"""
    if ctx.kind is CriterionKind.SUM_PAIRWISE:
        d = ctx.dissim.d
        onehot = _one_hot(assign, k, d.dtype)
        return ((d @ onehot) * onehot).sum(axis=0)
    sizes = np.bincount(assign, minlength=k).astype(np.int64)
    ones = _one_hot(assign, k, np.int64).T @ ctx.data.values.astype(np.int64)
    return np.minimum(ones, sizes[:, None] - ones).sum(axis=1)


def within_inertia(p: Partition, ctx: CriterionContext) -> Number:
    """
    W(P) = Σ_k δ(C_k)

    Args:
        p: 分割
        ctx: 基準の文脈

    Returns:
        非負の値
    """
    if p.n != ctx.n:
        raise DimensionError(f"分割の大きさ {p.n} が文脈の n={ctx.n} と違います")
    return ctx.scalar(class_deltas(p.assign, p.k, ctx).sum())


def total_inertia(d: DissimilarityMatrix) -> Number:
    """I(Ω): 全順序対の非類似度の二重和"""
    total = d.d.sum()
    return int(total) if d.is_integer else float(total)


def between_inertia(p: Partition, ctx: CriterionContext) -> Number:
    """B = I(Ω) − W(P)"""
    return ctx.total - within_inertia(p, ctx)


@dataclass
class ClusterStats:
    """
    ΔW を差分計算するためのクラスごとの集計

    Attributes:
        assign: 現在の割当
        sizes: クラスの大きさ
        one_counts: クラス×座標の1の個数（L1Median のみ）
        class_sums: 対象×クラスの非類似度和 Σ_{j∈C_k} d(i, j)（SumPairwise のみ）
        cached_delta: クラスごとの δ
        total_w: W(P)
        ctx: 基準の文脈
    """
    assign: np.ndarray
    sizes: np.ndarray
    one_counts: Optional[np.ndarray]
    class_sums: Optional[np.ndarray]
    cached_delta: np.ndarray
    total_w: Number
    ctx: CriterionContext

    @property
    def k(self) -> int:
        return int(self.sizes.shape[0])

    def partition(self) -> Partition:
        return Partition(self.assign.copy(), self.k)


def build_stats(p: Partition, ctx: CriterionContext) -> ClusterStats:
    """分割から集計を新規作成"""
    if p.n != ctx.n:
        raise DimensionError(f"分割の大きさ {p.n} が文脈の n={ctx.n} と違います")
    assign = p.assign.copy()
    k = p.k
    sizes = np.bincount(assign, minlength=k).astype(np.int64)
    one_counts = None
    class_sums = None
    if ctx.kind is CriterionKind.L1_MEDIAN:
        one_counts = _one_hot(assign, k, np.int64).T @ ctx.data.values.astype(np.int64)
        cached = np.minimum(one_counts, sizes[:, None] - one_counts).sum(axis=1)
    else:
        d = ctx.dissim.d
        class_sums = d @ _one_hot(assign, k, d.dtype)
        cached = (class_sums * _one_hot(assign, k, d.dtype)).sum(axis=0)
    return ClusterStats(
        assign=assign,
        sizes=sizes,
        one_counts=one_counts,
        class_sums=class_sums,
        cached_delta=cached,
        total_w=ctx.scalar(cached.sum()),
        ctx=ctx,
    )


def clone_stats(stats: ClusterStats) -> ClusterStats:
    """配列を複製した集計（文脈は共有）"""
    clone = copy.copy(stats)
    clone.assign = stats.assign.copy()
    clone.sizes = stats.sizes.copy()
    clone.cached_delta = stats.cached_delta.copy()
    clone.one_counts = None if stats.one_counts is None else stats.one_counts.copy()
    clone.class_sums = None if stats.class_sums is None else stats.class_sums.copy()
    return clone


def _l1_delta_after(stats: ClusterStats, m: Move):
    x = stats.ctx.data.values[m.object].astype(np.int64)
    from_ones = stats.one_counts[m.from_class] - x
    to_ones = stats.one_counts[m.to_class] + x
    from_size = stats.sizes[m.from_class] - 1
    to_size = stats.sizes[m.to_class] + 1
    new_from = np.minimum(from_ones, from_size - from_ones).sum()
    new_to = np.minimum(to_ones, to_size - to_ones).sum()
    return from_ones, to_ones, new_from, new_to


def delta_w_move(stats: ClusterStats, m: Move, ctx: Optional[CriterionContext] = None) -> Number:
    """
    移動による W の変化量を再計算なしで求める

    SumPairwise: ΔW = 2·(Σ_{j∈to} d(i,j) − Σ_{j∈from∖{i}} d(i,j))
    L1Median: 影響する2クラスの δ だけを1の個数から再計算

    Args:
        stats: 現在の集計
        m: 移動
        ctx: 基準の文脈（省略時は stats の文脈）

    Returns:
        W(移動後) − W(移動前)
    """
    ctx = ctx or stats.ctx
    check_move(stats.assign, stats.sizes, m)
    if ctx.kind is CriterionKind.SUM_PAIRWISE:
        row = stats.class_sums[m.object]
        return ctx.scalar(2 * (row[m.to_class] - row[m.from_class]))
    _, _, new_from, new_to = _l1_delta_after(stats, m)
    old = stats.cached_delta[m.from_class] + stats.cached_delta[m.to_class]
    return int(new_from + new_to - old)


def update_stats(stats: ClusterStats, m: Move) -> ClusterStats:
    """
    移動を集計に反映する（その場で更新し同じオブジェクトを返す）

    元の集計を残したい場合は clone_stats で複製してから呼ぶ。
    """
    ctx = stats.ctx
    check_move(stats.assign, stats.sizes, m)
    i, a, b = m.object, m.from_class, m.to_class
    if ctx.kind is CriterionKind.SUM_PAIRWISE:
        row = stats.class_sums[i]
        stats.cached_delta[a] -= 2 * row[a]
        stats.cached_delta[b] += 2 * row[b]
        column = ctx.dissim.d[:, i]
        stats.class_sums[:, a] -= column
        stats.class_sums[:, b] += column
    else:
        from_ones, to_ones, new_from, new_to = _l1_delta_after(stats, m)
        stats.one_counts[a] = from_ones
        stats.one_counts[b] = to_ones
        stats.cached_delta[a] = new_from
        stats.cached_delta[b] = new_to
    stats.sizes[a] -= 1
    stats.sizes[b] += 1
    stats.assign[i] = b
    stats.total_w = ctx.scalar(stats.cached_delta.sum())
    return stats

"""
比較用の古典的手法
- pam_medians: 0/1中央値を核とする交互最適化（L1）
- kmedoids_binary: クラス内で非類似度の和が最小の対象を核とする交互最適化
- hierarchical_average_linkage / cut_dendrogram: 群平均法による階層クラスタリング
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from config import BASELINE_DEFAULTS, FLOAT_TOLERANCE
from core.criteria import CriterionContext, CriterionKind
from core.model import (
    DissimilarityKind,
    DissimilarityMatrix,
    Partition,
    check_class_count,
    compute_dissimilarity_matrix,
    random_partition,
)
from heuristics.base_method import BaseMethod, RunResult, finish_run
from utils.error_handler import (
    ConfigurationError,
    ConsistencyError,
    DimensionError,
    ParameterError,
    get_logger,
)

logger = get_logger(__name__)

__all__ = [
    "BaselineParams", "HcParams", "Dendrogram",
    "pam_medians", "kmedoids_binary", "hierarchical_average_linkage", "cut_dendrogram",
    "PamMediansMethod", "KMedoidsMethod", "HierarchicalMethod",
]


@dataclass(frozen=True)
class BaselineParams:
    """交互最適化の反復上限"""
    max_iter: int = BASELINE_DEFAULTS["max_iter"]

    def __post_init__(self):
        if self.max_iter < 1:
            raise ParameterError(f"max_iter は1以上です (max_iter={self.max_iter})")


@dataclass(frozen=True)
class HcParams:
    """階層クラスタリングで使う非類似度"""
    dissim: DissimilarityKind = DissimilarityKind.L1

    def __post_init__(self):
        try:
            object.__setattr__(self, "dissim", DissimilarityKind(self.dissim))
        except ValueError as e:
            raise ParameterError(f"未知の非類似度です: {self.dissim!r}") from e


@dataclass(frozen=True)
class Dendrogram:
    """
    併合の記録

    葉は 0..n−1、t 番目の併合で作られるクラスタは n+t。
    merges の各要素は (クラスタa, クラスタb, 高さ, 併合後の大きさ)。
    """
    n: int
    merges: Tuple[Tuple[int, int, float, int], ...]

    def __post_init__(self):
        if len(self.merges) != self.n - 1:
            raise ConsistencyError(f"併合の数 {len(self.merges)} が n−1={self.n - 1} ではありません")

    @property
    def heights(self) -> np.ndarray:
        return np.array([m[2] for m in self.merges], dtype=np.float64)

    def to_linkage_matrix(self) -> np.ndarray:
        """scipy.cluster.hierarchy 形式の (n−1)×4 行列"""
        return np.array(self.merges, dtype=np.float64).reshape(-1, 4)


def _initial_assign(ctx: CriterionContext, k: int, rng: np.random.Generator,
                    p0: Optional[Partition]) -> np.ndarray:
    check_class_count(ctx.n, k)
    if p0 is None:
        return random_partition(ctx.n, k, rng).assign.copy()
    if p0.k != k or p0.n != ctx.n:
        raise DimensionError(f"初期分割 (n={p0.n}, K={p0.k}) が指定 (n={ctx.n}, K={k}) と一致しません")
    return p0.assign.copy()


def _nearest_keeping_current(dist: np.ndarray, assign: np.ndarray) -> np.ndarray:
    # 現在のクラスが最小距離に並んでいれば動かさない。それ以外は番号の小さい方
    best = dist.min(axis=1)
    current = dist[np.arange(dist.shape[0]), assign]
    return np.where(current <= best, assign, np.argmin(dist, axis=1))


def _median_kernels(values: np.ndarray, assign: np.ndarray, k: int) -> np.ndarray:
    onehot = np.eye(k, dtype=np.int64)[assign]
    ones = onehot.T @ values
    sizes = onehot.sum(axis=0)
    return (2 * ones > sizes[:, None]).astype(np.int64)


def _l1_to_kernels(values: np.ndarray, kernels: np.ndarray) -> np.ndarray:
    return values @ (1 - kernels).T + (1 - values) @ kernels.T


def pam_medians(ctx: CriterionContext,
                k: int,
                rng: np.random.Generator,
                p0: Optional[Partition] = None,
                max_iter: int = BASELINE_DEFAULTS["max_iter"]) -> RunResult:
    """
    0/1中央値を核とする交互最適化

    (a) 各クラスの中央値ベクトルを核とし、(b) 各対象を L1 で最も近い核へ割り当てる。
    割当が変わらなくなるまで繰り返す。空になったクラスには、自分の核から最も遠い対象を移す。

    Args:
        ctx: L1Median 基準の文脈
        k: クラス数
        rng: 乱数生成器（初期分割用）
        p0: 初期分割
        max_iter: 反復上限

    Returns:
        収束した分割と δ_L1 による W

    Raises:
        ConfigurationError: 基準が L1Median でない
    """
    if ctx.kind is not CriterionKind.L1_MEDIAN:
        raise ConfigurationError("PAM（中央値版）は L1Median 基準でのみ使えます")
    values = ctx.data.values.astype(np.int64)
    assign = _initial_assign(ctx, k, rng, p0)
    trajectory: List = []
    iterations = 0

    for iterations in range(1, max_iter + 1):
        kernels = _median_kernels(values, assign, k)
        dist = _l1_to_kernels(values, kernels)
        updated = _nearest_keeping_current(dist, assign)

        sizes = np.bincount(updated, minlength=k)
        for empty in np.flatnonzero(sizes == 0).tolist():
            own = dist[np.arange(ctx.n), updated].astype(np.float64)
            own[sizes[updated] < 2] = -np.inf
            victim = int(np.argmax(own))
            sizes[updated[victim]] -= 1
            updated[victim] = empty
            sizes[empty] += 1

        trajectory.append(int(dist[np.arange(ctx.n), assign].sum()))
        if np.array_equal(updated, assign):
            break
        assign = updated
    else:
        logger.warning(f"PAM が {max_iter} 回で収束しませんでした")

    return finish_run(assign, k, ctx, iterations, trajectory=trajectory)


def kmedoids_binary(ctx: CriterionContext,
                    k: int,
                    rng: np.random.Generator,
                    p0: Optional[Partition] = None,
                    max_iter: int = BASELINE_DEFAULTS["max_iter"]) -> RunResult:
    """
    0/1データの k-medoids

    各クラスの核を「クラス内の他の対象への非類似度の和が最小の対象」とし（同値は番号の小さい方）、
    各対象を最も近い核へ割り当て直す。割当が変わらなくなるまで繰り返す。

    Args:
        ctx: 基準の文脈（非類似度行列を使い、W は文脈の基準で評価する）
        k: クラス数
        rng: 乱数生成器（初期分割用）
        p0: 初期分割
        max_iter: 反復上限

    Returns:
        収束した分割と W
    """
    d = ctx.dissim.d
    assign = _initial_assign(ctx, k, rng, p0)
    iterations = 0

    for iterations in range(1, max_iter + 1):
        medoids = np.empty(k, dtype=np.int64)
        for c in range(k):
            members = np.flatnonzero(assign == c)
            medoids[c] = members[int(np.argmin(d[np.ix_(members, members)].sum(axis=1)))]
        # 核は自分のクラスとの距離0なので、どのクラスも空にならない
        updated = _nearest_keeping_current(d[:, medoids], assign)
        if np.array_equal(updated, assign):
            break
        assign = updated
    else:
        logger.warning(f"k-medoids が {max_iter} 回で収束しませんでした")

    return finish_run(assign, k, ctx, iterations)


def hierarchical_average_linkage(d: DissimilarityMatrix) -> Dendrogram:
    """
    群平均法（UPGMA）による凝集型階層クラスタリング

    クラスタ間の非類似度は全ての対の平均。最小値が並んだ場合はクラスタ番号の組が
    辞書順で最小のものを併合する。

    Args:
        d: 非類似度行列

    Returns:
        n−1 回の併合を記録したデンドログラム
    """
    n = d.n
    dist = d.d.astype(np.float64).copy()
    np.fill_diagonal(dist, np.inf)
    ids = np.arange(n)
    sizes = np.ones(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    merges = []

    for step in range(n - 1):
        lowest = dist.min()
        rows, cols = np.nonzero(dist <= lowest + FLOAT_TOLERANCE * max(1.0, abs(lowest)))
        upper = rows < cols
        pairs = np.stack([ids[rows[upper]], ids[cols[upper]]], axis=1)
        pairs.sort(axis=1)
        choice = np.lexsort((pairs[:, 1], pairs[:, 0]))[0]
        a, b = rows[upper][choice], cols[upper][choice]
        height = float(dist[a, b])

        merged = sizes[a] + sizes[b]
        merges.append((int(min(ids[a], ids[b])), int(max(ids[a], ids[b])), height, int(merged)))

        # 新しいクラスタはスロット a に置き、b を無効にする
        combined = (sizes[a] * dist[a] + sizes[b] * dist[b]) / merged
        combined[~active] = np.inf
        dist[a, :] = combined
        dist[:, a] = combined
        dist[a, a] = np.inf
        dist[b, :] = np.inf
        dist[:, b] = np.inf
        active[b] = False
        sizes[a] = merged
        ids[a] = n + step

    return Dendrogram(n, tuple(merges))


def cut_dendrogram(t: Dendrogram, k: int) -> Partition:
    """
    デンドログラムを切断して k クラスの分割を得る（最後の k−1 回の併合を取り消す）

    Args:
        t: デンドログラム
        k: クラス数 (1 ≤ k ≤ n)

    Returns:
        初出順にクラス番号を振った分割
    """
    if not 1 <= k <= t.n:
        raise ParameterError(f"クラス数 k={k} は 1..{t.n} の範囲でなければなりません")
    parent = list(range(t.n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    representative = list(range(t.n))
    for a, b, _, _ in t.merges[:t.n - k]:
        ra, rb = find(representative[a]), find(representative[b])
        parent[rb] = ra
        representative.append(ra)

    labels = np.empty(t.n, dtype=np.int64)
    seen = {}
    for i in range(t.n):
        root = find(i)
        if root not in seen:
            seen[root] = len(seen)
        labels[i] = seen[root]
    return Partition(labels, k)


class PamMediansMethod(BaseMethod):
    """PAM（0/1中央値版）"""

    params_class = BaselineParams

    def __init__(self):
        super().__init__("PAM", "baseline")

    def run(self, ctx, k, params, rng, p0=None) -> RunResult:
        params = params or self.default_params()
        return pam_medians(ctx, k, rng, p0, params.max_iter)


class KMedoidsMethod(BaseMethod):
    """0/1データの k-medoids"""

    params_class = BaselineParams

    def __init__(self):
        super().__init__("KMED", "baseline")

    def run(self, ctx, k, params, rng, p0=None) -> RunResult:
        params = params or self.default_params()
        return kmedoids_binary(ctx, k, rng, p0, params.max_iter)


class HierarchicalMethod(BaseMethod):
    """群平均法の階層クラスタリングを K で切断"""

    params_class = HcParams
    is_deterministic = True

    def __init__(self):
        super().__init__("HC", "baseline")

    def run(self, ctx, k, params, rng, p0=None) -> RunResult:
        params = params or self.default_params()
        check_class_count(ctx.n, k)
        if params.dissim is ctx.dissim.kind:
            d = ctx.dissim
        elif ctx.data is not None:
            d = compute_dissimilarity_matrix(ctx.data, params.dissim)
        else:
            raise ConfigurationError(
                f"非類似度 {params.dissim.value} を計算するにはデータセットが必要です"
            )
        tree = hierarchical_average_linkage(d)
        return finish_run(cut_dendrogram(tree, k).assign, k, ctx, tree.n - 1)

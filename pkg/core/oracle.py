"""
厳密解（全列挙）
小さなインスタンスで K クラスの全分割を制限成長列 (RGS) で列挙し、W の大域最小を求める

列挙は定数メモリのストリームで行い、評価はまとめて numpy で行う。
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from config import FLOAT_TOLERANCE, ORACLE_CONFIG
from core.criteria import CriterionContext, CriterionKind, Number
from core.model import Partition
from utils.error_handler import ConfigurationError, ParameterError, ResourceGuardError, get_logger

logger = get_logger(__name__)

BATCH_SIZE = 4096


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    """第2種スターリング数 S(n, k) = k·S(n−1, k) + S(n−1, k−1)"""
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def _check_guard(n: int, max_n: Optional[int], allow_large: bool) -> None:
    hard = ORACLE_CONFIG["hard_max_n"]
    limit = ORACLE_CONFIG["default_max_n"] if max_n is None else max_n
    if n > hard:
        raise ResourceGuardError(f"全列挙は n ≤ {hard} に限られます (n={n})")
    if n > limit and not allow_large:
        raise ResourceGuardError(
            f"n={n} は全列挙の既定上限 {limit} を超えています（allow_large で {hard} まで許可）"
        )


def _rgs_strings(n: int, k: int) -> Iterator[List[int]]:
    # 辞書順で次の RGS を作る。返すリストは呼び出し側で複製すること
    if k == 1:
        yield [0] * n
        return
    a = [0] * (n - k + 1) + list(range(1, k))
    while True:
        yield a
        prefix_max = [0] * n
        running = 0
        for i, v in enumerate(a):
            running = max(running, v)
            prefix_max[i] = running

        # 右端から、増やしても残りで K−1 まで届く位置を探す
        pivot = -1
        for i in range(n - 1, 0, -1):
            bound = prefix_max[i - 1] + 1
            value = a[i] + 1
            if value > bound or value > k - 1:
                continue
            reached = max(prefix_max[i - 1], value)
            if n - 1 - i >= k - 1 - reached:
                pivot = i
                break
        if pivot < 0:
            return

        a[pivot] += 1
        reached = max(prefix_max[pivot - 1], a[pivot])
        tail = n - 1 - pivot
        missing = k - 1 - reached
        a[pivot + 1:] = [0] * (tail - missing) + list(range(reached + 1, k))


def enumerate_partitions(n: int,
                         k: int,
                         max_n: Optional[int] = None,
                         allow_large: bool = False) -> Iterator[Partition]:
    """
    n 個の対象のちょうど k クラスへの全分割を1回ずつ生成

    Args:
        n: 対象数
        k: クラス数 (2 ≤ k < n)
        max_n: 対象数の上限（省略時は設定の既定値）
        allow_large: 既定上限を超えて絶対上限まで許可する

    Yields:
        分割（個数は S(n, k)）

    Raises:
        ResourceGuardError: 上限を超える n
    """
    if not 2 <= k < n:
        raise ParameterError(f"クラス数は 2 ≤ K < n でなければなりません (K={k}, n={n})")
    _check_guard(n, max_n, allow_large)
    for rgs in _rgs_strings(n, k):
        yield Partition(np.array(rgs, dtype=np.int64), k)


def _batch_w(batch: np.ndarray, k: int, ctx: CriterionContext) -> np.ndarray:
    if ctx.kind is CriterionKind.SUM_PAIRWISE:
        same = batch[:, :, None] == batch[:, None, :]
        return (same * ctx.dissim.d[None, :, :]).sum(axis=(1, 2))
    onehot = (batch[:, :, None] == np.arange(k)[None, None, :]).astype(np.int64)
    ones = np.einsum("bnk,np->bkp", onehot, ctx.data.values.astype(np.int64))
    sizes = onehot.sum(axis=1)
    return np.minimum(ones, sizes[:, :, None] - ones).sum(axis=(1, 2))


def brute_force_optimum(ctx: CriterionContext,
                        k: int,
                        max_n: Optional[int] = None,
                        allow_large: bool = False) -> Tuple[Partition, Number]:
    """
    全列挙による W の大域最小

    最小値が並んだ場合は列挙順（RGS の辞書順）で最初の分割を返す。

    Args:
        ctx: 基準の文脈
        k: クラス数
        max_n: 対象数の上限
        allow_large: 既定上限を超えることを許可する

    Returns:
        (最適な分割, その W)
    """
    n = ctx.n
    if not 2 <= k < n:
        raise ParameterError(f"クラス数は 2 ≤ K < n でなければなりません (K={k}, n={n})")
    _check_guard(n, max_n, allow_large)

    best_w = None
    best_assign = None
    buffer: List[List[int]] = []

    def flush():
        nonlocal best_w, best_assign
        batch = np.array(buffer, dtype=np.int64)
        ws = _batch_w(batch, k, ctx)
        idx = int(np.argmin(ws))
        if best_w is None or ws[idx] < best_w:
            best_w = ws[idx]
            best_assign = batch[idx].copy()
        buffer.clear()

    count = 0
    for rgs in _rgs_strings(n, k):
        buffer.append(list(rgs))
        count += 1
        if len(buffer) >= BATCH_SIZE:
            flush()
    if buffer:
        flush()

    logger.debug(f"全列挙: n={n}, K={k}, {count} 分割, 最小 W={best_w}")
    return Partition(best_assign, k), ctx.scalar(best_w)


@dataclass
class MonotonicityReport:
    """K ごとの最適 W の列と、非増加かどうか"""
    sequences: Dict[str, List[Tuple[int, Number]]] = field(default_factory=dict)

    def holds_for(self, criterion: str) -> bool:
        values = [w for _, w in self.sequences[criterion]]
        return all(b <= a + FLOAT_TOLERANCE * max(1.0, abs(a)) for a, b in zip(values, values[1:]))

    @property
    def holds(self) -> bool:
        return all(self.holds_for(c) for c in self.sequences)

    def to_dict(self) -> Dict:
        return {
            "holds": self.holds,
            "criteria": {
                c: {"monotone": self.holds_for(c),
                    "optimum": [{"k": k, "w": w} for k, w in seq]}
                for c, seq in self.sequences.items()
            },
        }


def verify_monotonicity(ctx: CriterionContext,
                        k_max: int,
                        max_n: Optional[int] = None,
                        allow_large: bool = False) -> MonotonicityReport:
    """
    K = 2..k_max の最適 W が K について非増加であることを δ_sum と δ_L1 の両方で確認

    δ_sum には文脈の非類似度行列を、δ_L1 には文脈のデータセットを使う。

    Args:
        ctx: 基準の文脈（データセットを含むこと）
        k_max: 調べる最大のクラス数 (< n)
        max_n: 対象数の上限
        allow_large: 既定上限を超えることを許可する

    Returns:
        基準ごとの最適 W の列
    """
    if ctx.data is None:
        raise ConfigurationError("単調性の確認にはデータセットが必要です")
    if not 2 <= k_max < ctx.n:
        raise ParameterError(f"k_max は 2 ≤ k_max < n でなければなりません (k_max={k_max}, n={ctx.n})")

    report = MonotonicityReport()
    for kind in (CriterionKind.SUM_PAIRWISE, CriterionKind.L1_MEDIAN):
        local = CriterionContext(kind, ctx.dissim, ctx.data)
        sequence = []
        for k in range(2, k_max + 1):
            _, w = brute_force_optimum(local, k, max_n, allow_large)
            sequence.append((k, w))
        report.sequences[kind.value] = sequence
        if not report.holds_for(kind.value):
            logger.warning(f"{kind.value}: 最適 W が K について増加しました {sequence}")
    return report

"""
近傍探索型メタヒューリスティクス
- simulated_annealing: 焼きなまし法 (Metropolis 規則)
- threshold_accepting: 閾値受理法
- tabu_search: タブー探索

いずれも単一移動の近傍と ΔW の差分計算を使う。
"""

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, List, Optional

import numpy as np
from scipy.optimize import bisect

from config import SA_DEFAULTS, TA_DEFAULTS, TS_DEFAULTS, MIN_TEMPERATURE
from core.criteria import (
    ClusterStats,
    CriterionContext,
    build_stats,
    delta_w_move,
    update_stats,
)
from core.model import Move, Partition, check_class_count, check_move, random_partition
from core.neighborhood import draw_move_sample, draw_random_move, legal_move_count
from heuristics.base_method import BaseMethod, RunResult, finish_run
from utils.error_handler import ParameterError, DimensionError, get_logger

logger = get_logger(__name__)

__all__ = [
    "SaParams", "TaParams", "TsParams", "TabuList", "RunResult",
    "calibrate_initial_temperature", "metropolis_accept", "simulated_annealing",
    "threshold_accepting", "tabu_code", "tabu_search",
    "SimulatedAnnealingMethod", "ThresholdAcceptingMethod", "TabuSearchMethod",
]


@dataclass(frozen=True)
class SaParams:
    """焼きなまし法のパラメータ"""
    chi0: float = SA_DEFAULTS["chi0"]
    chain_length: int = SA_DEFAULTS["chain_length"]
    gamma: float = SA_DEFAULTS["gamma"]
    epsilon: float = SA_DEFAULTS["epsilon"]
    max_chains: int = SA_DEFAULTS["max_chains"]
    calibration_samples: int = SA_DEFAULTS["calibration_samples"]

    def __post_init__(self):
        if not 0 < self.chi0 < 1:
            raise ParameterError(f"chi0 は (0, 1) の範囲です (chi0={self.chi0})")
        if not 0 < self.gamma < 1:
            raise ParameterError(f"gamma は (0, 1) の範囲です (gamma={self.gamma})")
        if self.chain_length < 1 or self.max_chains < 1 or self.calibration_samples < 1:
            raise ParameterError("chain_length, max_chains, calibration_samples は1以上です")
        if self.epsilon <= 0:
            raise ParameterError(f"epsilon は正の値です (epsilon={self.epsilon})")


@dataclass(frozen=True)
class TaParams:
    """
    閾値受理法のパラメータ

    relative=True の場合、th0 は無作為な移動の |ΔW| の平均に対する倍率として扱う。
    """
    th0: float = TA_DEFAULTS["th0"]
    gamma: float = TA_DEFAULTS["gamma"]
    maxiter: int = TA_DEFAULTS["maxiter"]
    epsilon: float = TA_DEFAULTS["epsilon"]
    relative: bool = TA_DEFAULTS["relative"]

    def __post_init__(self):
        if self.th0 < 0:
            raise ParameterError(f"th0 は非負です (th0={self.th0})")
        if not 0 < self.gamma < 1:
            raise ParameterError(f"gamma は (0, 1) の範囲です (gamma={self.gamma})")
        if self.maxiter < 1:
            raise ParameterError(f"maxiter は1以上です (maxiter={self.maxiter})")
        if self.epsilon <= 0:
            raise ParameterError(f"epsilon は正の値です (epsilon={self.epsilon})")


@dataclass(frozen=True)
class TsParams:
    """
    タブー探索のパラメータ

    tabu_len = 0 はタブーなしの「標本内最良近傍への降下」になる。
    """
    tabu_len: int = TS_DEFAULTS["tabu_len"]
    maxiter: int = TS_DEFAULTS["maxiter"]
    sample_fraction: float = TS_DEFAULTS["sample_fraction"]

    def __post_init__(self):
        if self.tabu_len < 0:
            raise ParameterError(f"tabu_len は非負です (tabu_len={self.tabu_len})")
        if self.maxiter < 1:
            raise ParameterError(f"maxiter は1以上です (maxiter={self.maxiter})")
        if not 0 < self.sample_fraction <= 1:
            raise ParameterError(f"sample_fraction は (0, 1] の範囲です ({self.sample_fraction})")


@dataclass
class TabuList:
    """
    タブーリスト T

    各要素は移動時に対象が属していたクラスのメンバー指示ベクトル（パック済み）。
    長さ tabu_len を超えると古いものから捨てる。
    """
    tabu_len: int
    entries: Deque[bytes] = field(default_factory=deque)

    def push(self, mask: np.ndarray) -> None:
        if self.tabu_len == 0:
            return
        self.entries.append(_pack(mask))
        while len(self.entries) > self.tabu_len:
            self.entries.popleft()

    def contains(self, mask: np.ndarray) -> bool:
        return _pack(mask) in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def _pack(mask: np.ndarray) -> bytes:
    return np.packbits(mask.astype(bool)).tobytes()


def _init_stats(ctx: CriterionContext, k: int, rng: np.random.Generator,
                p0: Optional[Partition]) -> ClusterStats:
    check_class_count(ctx.n, k)
    if p0 is None:
        p0 = random_partition(ctx.n, k, rng)
    elif p0.k != k or p0.n != ctx.n:
        raise DimensionError(f"初期分割 (n={p0.n}, K={p0.k}) が指定 (n={ctx.n}, K={k}) と一致しません")
    return build_stats(p0, ctx)


def calibrate_initial_temperature(p0: Partition,
                                  chi0: float,
                                  sample_size: int,
                                  ctx: CriterionContext,
                                  rng: np.random.Generator) -> float:
    """
    初期受理率 χ_0 から初期温度 c_0 を決める

    p0 から無作為な移動を sample_size 個評価し、Metropolis 規則での受理率
    mean(min(1, exp(−ΔW⁺/c))) = χ_0 を二分法で解く。改善・同値の移動は常に受理される。

    Args:
        p0: 初期分割
        chi0: 目標の初期受理率
        sample_size: 評価する移動の数
        ctx: 基準の文脈
        rng: 乱数生成器

    Returns:
        初期温度（悪化しない移動の割合が既に χ_0 以上なら下限温度）
    """
    if not 0 < chi0 < 1:
        raise ParameterError(f"chi0 は (0, 1) の範囲です (chi0={chi0})")
    stats = build_stats(p0, ctx)
    deltas = np.array([
        float(delta_w_move(stats, draw_random_move(stats.assign, stats.sizes, rng)))
        for _ in range(sample_size)
    ])
    worsening = deltas[deltas > 0]
    always_accepted = deltas.size - worsening.size
    if always_accepted >= chi0 * deltas.size:
        return MIN_TEMPERATURE

    # 悪化移動だけで満たすべき平均受理率
    target = (chi0 * deltas.size - always_accepted) / worsening.size
    log_target = -math.log(target)
    low = worsening.min() / log_target
    high = worsening.max() / log_target
    if math.isclose(low, high):
        return float(high)

    def excess(c: float) -> float:
        return (always_accepted + float(np.exp(-worsening / c).sum())) / deltas.size - chi0

    return float(bisect(excess, low, high, xtol=1e-12 * high, maxiter=200))


def metropolis_accept(delta_w: float, temperature: float, rng: np.random.Generator) -> bool:
    """
    Metropolis 規則: 改善なら受理、それ以外は確率 exp(−ΔW/c) で受理

    Args:
        delta_w: W の変化量
        temperature: 温度 (> 0)
        rng: 乱数生成器

    Returns:
        受理するか
    """
    if temperature <= 0:
        raise ParameterError(f"温度は正でなければなりません (temperature={temperature})")
    if delta_w < 0:
        return True
    return bool(rng.random() < math.exp(-delta_w / temperature))


def simulated_annealing(ctx: CriterionContext,
                        k: int,
                        params: SaParams,
                        rng: np.random.Generator,
                        p0: Optional[Partition] = None) -> RunResult:
    """
    焼きなまし法

    長さ L の Markov 連鎖を温度ごとに回し、c_{t+1} = γ·c_t で冷却する。
    連鎖全体の受理率が ε を下回るか max_chains に達したら停止する。

    Args:
        ctx: 基準の文脈
        k: クラス数
        params: パラメータ
        rng: 乱数生成器
        p0: 初期分割（省略時は一様ランダム）

    Returns:
        訪問した中で最良の分割
    """
    stats = _init_stats(ctx, k, rng, p0)
    temperature = calibrate_initial_temperature(
        stats.partition(), params.chi0, params.calibration_samples, ctx, rng
    )
    logger.debug(f"SA 初期温度 c0={temperature:.6g} (n={ctx.n}, K={k})")

    best_w = stats.total_w
    best_assign = stats.assign.copy()
    trajectory: List = [stats.total_w]
    total_accepted = 0
    chains = 0

    for chains in range(1, params.max_chains + 1):
        accepted = 0
        for _ in range(params.chain_length):
            m = draw_random_move(stats.assign, stats.sizes, rng)
            dw = delta_w_move(stats, m)
            if metropolis_accept(dw, temperature, rng):
                update_stats(stats, m)
                accepted += 1
                if stats.total_w < best_w:
                    best_w = stats.total_w
                    best_assign = stats.assign.copy()
        total_accepted += accepted
        trajectory.append(stats.total_w)
        if accepted / params.chain_length < params.epsilon:
            break
        temperature *= params.gamma

    return finish_run(best_assign, k, ctx, chains,
                      trajectory=trajectory, accepted=total_accepted)


def _mean_abs_delta(stats: ClusterStats, samples: int, rng: np.random.Generator) -> float:
    total = 0.0
    for _ in range(samples):
        total += abs(float(delta_w_move(stats, draw_random_move(stats.assign, stats.sizes, rng))))
    return total / samples


def threshold_accepting(ctx: CriterionContext,
                        k: int,
                        params: TaParams,
                        rng: np.random.Generator,
                        p0: Optional[Partition] = None) -> RunResult:
    """
    閾値受理法

    ΔW < Th_t の移動を決定的に受理する。maxiter 回の移動ごとに Th を γ 倍し、
    Th_t < ε·Th_0 になるか、1ブロックで1つも受理されなければ停止する。

    Args:
        ctx: 基準の文脈
        k: クラス数
        params: パラメータ
        rng: 乱数生成器
        p0: 初期分割（省略時は一様ランダム）

    Returns:
        訪問した中で最良の分割
    """
    stats = _init_stats(ctx, k, rng, p0)
    th0 = params.th0
    if params.relative:
        th0 *= _mean_abs_delta(stats, params.maxiter, rng)
    threshold = th0

    best_w = stats.total_w
    best_assign = stats.assign.copy()
    trajectory: List = [stats.total_w]
    total_accepted = 0
    levels = 0

    while True:
        levels += 1
        accepted = 0
        for _ in range(params.maxiter):
            m = draw_random_move(stats.assign, stats.sizes, rng)
            if delta_w_move(stats, m) < threshold:
                update_stats(stats, m)
                accepted += 1
                if stats.total_w < best_w:
                    best_w = stats.total_w
                    best_assign = stats.assign.copy()
        total_accepted += accepted
        trajectory.append(stats.total_w)
        if accepted == 0:
            break
        threshold *= params.gamma
        if threshold < params.epsilon * th0:
            break

    return finish_run(best_assign, k, ctx, levels,
                      trajectory=trajectory, accepted=total_accepted)


def tabu_code(p: Partition, m: Move) -> np.ndarray:
    """
    移動のタブーコード: 移動前に対象が属していたクラスの指示ベクトル

    Args:
        p: 移動前の分割
        m: 移動

    Returns:
        長さ n の真偽値ベクトル
    """
    check_move(p.assign, p.class_sizes(), m)
    return p.assign == m.from_class


class _TabuFilter:
    """現在の状態で、移動後の分割が T のコードと同じクラスを含むかを判定"""

    def __init__(self, stats: ClusterStats, tabu: TabuList):
        self.stats = stats
        self.tabu = tabu
        self.masks = [stats.assign == c for c in range(stats.k)]
        # 移動で変化しないクラスのうち既にタブーなもの
        self.tabu_classes = [tabu.contains(mask) for mask in self.masks] if len(tabu) else []

    def is_tabu(self, m: Move) -> bool:
        if not len(self.tabu):
            return False
        for c, flagged in enumerate(self.tabu_classes):
            if flagged and c not in (m.from_class, m.to_class):
                return True
        source = self.masks[m.from_class].copy()
        source[m.object] = False
        if self.tabu.contains(source):
            return True
        target = self.masks[m.to_class].copy()
        target[m.object] = True
        return self.tabu.contains(target)


def _best_move(stats: ClusterStats, moves: List[Move]) -> Move:
    # 同じ ΔW なら先に並ぶもの（対象番号、移動先の小さい順）
    deltas = [delta_w_move(stats, m) for m in moves]
    return moves[int(np.argmin(deltas))]


def tabu_search(ctx: CriterionContext,
                k: int,
                params: TsParams,
                rng: np.random.Generator,
                p0: Optional[Partition] = None) -> RunResult:
    """
    タブー探索

    毎反復 ⌈s·|N(P)|⌉ 個の移動を抽出し、タブーでない中の最良近傍へ（悪化でも）移る。
    実行した移動のタブーコードを T に積む。全てタブーなら1回だけ引き直し、
    それでも全てタブーなら標本内の最良移動を実行する（脱出規則、警告ログを出す）。

    Args:
        ctx: 基準の文脈
        k: クラス数
        params: パラメータ
        rng: 乱数生成器
        p0: 初期分割（省略時は一様ランダム）

    Returns:
        訪問した中で最良の分割
    """
    stats = _init_stats(ctx, k, rng, p0)
    tabu = TabuList(params.tabu_len)

    best_w = stats.total_w
    best_assign = stats.assign.copy()
    trajectory: List = [stats.total_w]
    escapes = 0

    for iteration in range(1, params.maxiter + 1):
        count = max(1, math.ceil(params.sample_fraction * legal_move_count(stats.sizes)))
        tabu_filter = _TabuFilter(stats, tabu)

        sample = draw_move_sample(stats.assign, stats.sizes, count, rng)
        candidates = [m for m in sample if not tabu_filter.is_tabu(m)]
        if not candidates:
            sample = draw_move_sample(stats.assign, stats.sizes, count, rng)
            candidates = [m for m in sample if not tabu_filter.is_tabu(m)]
        if not candidates:
            escapes += 1
            logger.warning(f"TS 反復 {iteration}: 標本が全てタブーのため最良移動を強制実行します")
            candidates = sample

        move = _best_move(stats, candidates)
        tabu.push(tabu_filter.masks[move.from_class])
        update_stats(stats, move)
        trajectory.append(stats.total_w)
        if stats.total_w < best_w:
            best_w = stats.total_w
            best_assign = stats.assign.copy()

    return finish_run(best_assign, k, ctx, params.maxiter,
                      trajectory=trajectory, accepted=params.maxiter, escapes=escapes)


class SimulatedAnnealingMethod(BaseMethod):
    """焼きなまし法 (SA)"""

    params_class = SaParams

    def __init__(self):
        super().__init__("SA", "trajectory")

    def run(self, ctx, k, params, rng, p0=None) -> RunResult:
        return simulated_annealing(ctx, k, params or self.default_params(), rng, p0)


class ThresholdAcceptingMethod(BaseMethod):
    """閾値受理法 (TA)"""

    params_class = TaParams

    def __init__(self):
        super().__init__("TA", "trajectory")

    def run(self, ctx, k, params, rng, p0=None) -> RunResult:
        return threshold_accepting(ctx, k, params or self.default_params(), rng, p0)


class TabuSearchMethod(BaseMethod):
    """タブー探索 (TS)"""

    params_class = TsParams

    def __init__(self):
        super().__init__("TS", "trajectory")

    def run(self, ctx, k, params, rng, p0=None) -> RunResult:
        return tabu_search(ctx, k, params or self.default_params(), rng, p0)

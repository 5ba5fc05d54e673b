"""
集団型メタヒューリスティクス
- genetic_algorithm: 遺伝的アルゴリズム（ルーレット選択＋エリート保存、クラス複写交叉）
- ant_colony: 蟻コロニー最適化（フェロモンに導かれた再割当）

適応度は f(P) = B(P)/I(Ω) で、W が小さいほど大きい。
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config import GA_DEFAULTS, AC_DEFAULTS
from core.criteria import CriterionContext, between_inertia, class_deltas
from core.model import Partition, check_class_count, random_partition, repair_assignment
from core.neighborhood import draw_random_move
from heuristics.base_method import BaseMethod, RunResult, finish_run
from utils.error_handler import DegenerateDataError, DimensionError, ParameterError, get_logger

logger = get_logger(__name__)

__all__ = [
    "GaParams", "Chromosome", "AcParams", "PheromoneState",
    "fitness", "select_parents", "crossover", "mutate", "roulette_select",
    "genetic_algorithm", "initial_pheromone", "transfer_probability",
    "pheromone_update", "ant_colony",
    "GeneticAlgorithmMethod", "AntColonyMethod",
]


@dataclass(frozen=True)
class GaParams:
    """遺伝的アルゴリズムのパラメータ"""
    pop_size: int = GA_DEFAULTS["pop_size"]
    p_crossover: float = GA_DEFAULTS["p_crossover"]
    p_mutation: float = GA_DEFAULTS["p_mutation"]
    maxiter: int = GA_DEFAULTS["maxiter"]
    epsilon: float = GA_DEFAULTS["epsilon"]
    elite_count: int = GA_DEFAULTS["elite_count"]

    def __post_init__(self):
        if self.pop_size < 2:
            raise ParameterError(f"pop_size は2以上です (pop_size={self.pop_size})")
        if not 0 <= self.p_crossover <= 1 or not 0 <= self.p_mutation <= 1:
            raise ParameterError("交叉・突然変異の確率は [0, 1] の範囲です")
        if self.maxiter < 1:
            raise ParameterError(f"maxiter は1以上です (maxiter={self.maxiter})")
        if self.epsilon <= 0:
            raise ParameterError(f"epsilon は正の値です (epsilon={self.epsilon})")
        if not 0 <= self.elite_count < self.pop_size:
            raise ParameterError(
                f"elite_count は 0 以上 pop_size 未満です (elite_count={self.elite_count})"
            )


@dataclass(frozen=True)
class AcParams:
    """蟻コロニー最適化のパラメータ"""
    alpha: float = AC_DEFAULTS["alpha"]
    beta: float = AC_DEFAULTS["beta"]
    rho: float = AC_DEFAULTS["rho"]
    n_ants: int = AC_DEFAULTS["n_ants"]
    maxiter: int = AC_DEFAULTS["maxiter"]
    epsilon: float = AC_DEFAULTS["epsilon"]
    tau0: float = AC_DEFAULTS["tau0"]
    visibility_floor: float = AC_DEFAULTS["visibility_floor"]
    stagnation_window: int = AC_DEFAULTS["stagnation_window"]

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ParameterError("alpha と beta は非負です")
        if not 0 < self.rho < 1:
            raise ParameterError(f"rho は (0, 1) の範囲です (rho={self.rho})")
        if self.n_ants < 1 or self.maxiter < 1 or self.stagnation_window < 1:
            raise ParameterError("n_ants, maxiter, stagnation_window は1以上です")
        if self.epsilon <= 0 or self.tau0 <= 0 or self.visibility_floor <= 0:
            raise ParameterError("epsilon, tau0, visibility_floor は正の値です")


@dataclass(frozen=True, eq=False)
class Chromosome:
    """
    染色体: {0, …, K−1} 上の長さ n のベクトルとその適応度

    遺伝子は修復済みで、全てのクラスが空でない。
    """
    genes: np.ndarray
    k: int
    fitness: float

    def partition(self) -> Partition:
        return Partition(self.genes, self.k)


@dataclass(frozen=True, eq=False)
class PheromoneState:
    """
    フェロモン τ（対称、正）と可視度 η = 1/max(d, floor)

    η は実行の最初に一度だけ計算する。
    """
    tau: np.ndarray
    eta: np.ndarray


def _total_or_raise(ctx: CriterionContext):
    total = ctx.total
    if total <= 0:
        raise DegenerateDataError("全ての行が同一のため I(Ω) = 0 で、適応度を定義できません")
    return total


def _fitness_of(assign: np.ndarray, k: int, ctx: CriterionContext) -> float:
    total = _total_or_raise(ctx)
    w = class_deltas(assign, k, ctx).sum()
    return float((total - w) / total)


def fitness(p: Partition, ctx: CriterionContext) -> float:
    """
    適応度 f(P) = B(P)/I(Ω)

    Args:
        p: 分割
        ctx: 基準の文脈

    Returns:
        [0, 1] の値

    Raises:
        DegenerateDataError: I(Ω) = 0
    """
    total = _total_or_raise(ctx)
    return float(between_inertia(p, ctx) / total)


def _chromosome(genes: np.ndarray, k: int, ctx: CriterionContext) -> Chromosome:
    return Chromosome(genes, k, _fitness_of(genes, k, ctx))


def select_parents(pop: Sequence[Chromosome],
                   rng: np.random.Generator) -> Tuple[Chromosome, Chromosome]:
    """
    一様に異なる2個体を選び、適応度の高い方を支配親とする（同値なら先に引いた方）

    Args:
        pop: 集団（2個体以上）
        rng: 乱数生成器

    Returns:
        (支配親, もう一方の親)
    """
    if len(pop) < 2:
        raise ParameterError(f"親の選択には2個体以上が必要です (集団の大きさ={len(pop)})")
    first, second = rng.choice(len(pop), size=2, replace=False)
    a, b = pop[int(first)], pop[int(second)]
    if b.fitness > a.fitness:
        return b, a
    return a, b


def crossover(dominant: Chromosome,
              other: Chromosome,
              rng: np.random.Generator,
              ctx: CriterionContext) -> Chromosome:
    """
    クラス複写交叉

    支配親のクラス c を一様に選び、その全メンバーを子（もう一方の親の複製）でもクラス c にする。
    空になったクラスは最大クラスから無作為に1個を移して埋める。

    Args:
        dominant: 支配親
        other: もう一方の親
        rng: 乱数生成器
        ctx: 基準の文脈（子の適応度計算用）

    Returns:
        子の染色体
    """
    if dominant.genes.shape != other.genes.shape or dominant.k != other.k:
        raise DimensionError("親の染色体の長さまたはクラス数が一致しません")
    c = int(rng.integers(dominant.k))
    genes = other.genes.copy()
    genes[dominant.genes == c] = c
    repair_assignment(genes, dominant.k, rng, source="largest")
    return _chromosome(genes, dominant.k, ctx)


def mutate(c: Chromosome, rng: np.random.Generator, ctx: CriterionContext) -> Chromosome:
    """
    突然変異: 1個の対象を別のクラスへ移す（クラスを空にする選択は除く）

    Args:
        c: 染色体
        rng: 乱数生成器
        ctx: 基準の文脈

    Returns:
        遺伝子が1つだけ変わった染色体
    """
    sizes = np.bincount(c.genes, minlength=c.k)
    m = draw_random_move(c.genes, sizes, rng)
    genes = c.genes.copy()
    genes[m.object] = m.to_class
    return _chromosome(genes, c.k, ctx)


def roulette_select(pop: Sequence[Chromosome], count: int, rng: np.random.Generator) -> List[Chromosome]:
    """適応度に比例した確率で復元抽出（全て0なら一様）"""
    weights = np.array([c.fitness for c in pop], dtype=np.float64)
    total = weights.sum()
    probs = weights / total if total > 0 else None
    picks = rng.choice(len(pop), size=count, replace=True, p=probs)
    return [pop[int(i)] for i in picks]


def genetic_algorithm(ctx: CriterionContext,
                      k: int,
                      params: GaParams,
                      rng: np.random.Generator,
                      p0: Optional[Partition] = None) -> RunResult:
    """
    遺伝的アルゴリズム

    世代ごとに上位 elite_count 個体をそのまま残し、残りをルーレットで選んだ交配プールから
    確率 p_c の交叉と確率 p_m の突然変異で作る。
    集団の適応度分散が初期分散の ε 倍以下になるか maxiter 世代で停止する。

    Args:
        ctx: 基準の文脈
        k: クラス数
        params: パラメータ
        rng: 乱数生成器
        p0: 集団に含める初期分割（任意）

    Returns:
        全世代を通じた最良の分割
    """
    check_class_count(ctx.n, k)
    _total_or_raise(ctx)

    population = [_chromosome(random_partition(ctx.n, k, rng).assign.copy(), k, ctx)
                  for _ in range(params.pop_size)]
    if p0 is not None:
        if p0.k != k or p0.n != ctx.n:
            raise DimensionError("初期分割の大きさまたはクラス数が一致しません")
        population[0] = _chromosome(p0.assign.copy(), k, ctx)

    best = max(population, key=lambda c: c.fitness)
    trajectory: List = [1.0 - best.fitness]
    initial_variance = float(np.var([c.fitness for c in population]))
    generations = 0

    while generations < params.maxiter:
        variance = float(np.var([c.fitness for c in population]))
        if variance <= params.epsilon * initial_variance:
            break
        generations += 1

        ranked = sorted(population, key=lambda c: c.fitness, reverse=True)
        offspring = ranked[:params.elite_count]
        pool = roulette_select(population, params.pop_size - params.elite_count, rng)
        parents = pool if len(pool) >= 2 else population
        for member in pool:
            if rng.random() < params.p_crossover:
                dominant, other = select_parents(parents, rng)
                child = crossover(dominant, other, rng, ctx)
            else:
                child = member
            if rng.random() < params.p_mutation:
                child = mutate(child, rng, ctx)
            offspring.append(child)
        population = offspring

        leader = max(population, key=lambda c: c.fitness)
        if leader.fitness > best.fitness:
            best = leader
        trajectory.append(1.0 - best.fitness)

    logger.debug(f"GA 終了: {generations} 世代, 最良適応度 {best.fitness:.6f}")
    return finish_run(best.genes, k, ctx, generations, trajectory=trajectory)


def initial_pheromone(ctx: CriterionContext, params: AcParams) -> PheromoneState:
    """τ を tau0 で一様に初期化し、可視度 η を計算"""
    d = ctx.dissim.d.astype(np.float64)
    tau = np.full(d.shape, params.tau0, dtype=np.float64)
    eta = 1.0 / np.maximum(d, params.visibility_floor)
    return PheromoneState(tau, eta)


def _transfer_weights(state: PheromoneState, params: AcParams) -> np.ndarray:
    weights = np.power(state.tau, params.alpha) * np.power(state.eta, params.beta)
    np.fill_diagonal(weights, 0.0)
    return weights


def transfer_probability(i: int, i_prime: int, state: PheromoneState, params: AcParams) -> float:
    """
    対象 i′ を対象 i と同じクラスへ移す確率

    p_{ii′} = τ_{ii′}^α η_{ii′}^β / Σ_{l≠i′} τ_{li′}^α η_{li′}^β
    （i′ を固定すると錨 i について和が1）

    Args:
        i: 錨となる対象
        i_prime: 移す対象
        state: フェロモンの状態
        params: パラメータ

    Returns:
        [0, 1] の確率
    """
    if i == i_prime:
        raise ParameterError(f"錨と移す対象は異なっていなければなりません (i={i})")
    column = np.power(state.tau[:, i_prime], params.alpha) * np.power(state.eta[:, i_prime], params.beta)
    column[i_prime] = 0.0
    return float(column[i] / column.sum())


def pheromone_update(state: PheromoneState,
                     ants: Sequence[Partition],
                     ctx: CriterionContext,
                     params: AcParams,
                     fitnesses: Optional[Sequence[float]] = None) -> PheromoneState:
    """
    τ(t+1) = (1−ρ)·τ(t) + ρ·Σ_m Δ^m τ

    Δ^m τ_{ii′} は蟻 m の分割で i, i′ が同じクラスなら f(P^m)、そうでなければ0。

    Args:
        state: 現在の状態
        ants: 各蟻の分割
        ctx: 基準の文脈
        params: パラメータ
        fitnesses: 計算済みの適応度（省略時は計算する）

    Returns:
        新しい状態（η は共有）
    """
    if fitnesses is None:
        fitnesses = [fitness(p, ctx) for p in ants]
    deposit = np.zeros_like(state.tau)
    for p, f in zip(ants, fitnesses):
        onehot = np.eye(p.k, dtype=np.float64)[p.assign]
        deposit += f * (onehot @ onehot.T)
    tau = (1.0 - params.rho) * state.tau + params.rho * deposit
    return PheromoneState(tau, state.eta)


def _draw_anchors(weights: np.ndarray, targets: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # 各移動対象 i′ の列の累積和から錨 i をまとめて引く
    cumulative = np.cumsum(weights, axis=0)[:, targets]
    thresholds = rng.random(targets.shape) * cumulative[-1]
    return np.argmax(cumulative > thresholds, axis=0)


def ant_colony(ctx: CriterionContext,
               k: int,
               params: AcParams,
               rng: np.random.Generator,
               p0: Optional[Partition] = None) -> RunResult:
    """
    蟻コロニー最適化

    各反復で全ての蟻が n 回の再割当（一様に選んだ i′ を、重みに比例して引いた錨 i のクラスへ移す。
    クラスを空にする移動は飛ばす）を行い、その後フェロモンを更新する。
    maxiter 回、または最良適応度の改善が stagnation_window 回の間 ε 未満なら停止する。

    Args:
        ctx: 基準の文脈
        k: クラス数
        params: パラメータ
        rng: 乱数生成器
        p0: 最初の蟻の初期分割（任意）

    Returns:
        全反復を通じた最良の分割
    """
    check_class_count(ctx.n, k)
    _total_or_raise(ctx)
    n = ctx.n

    assigns = [random_partition(n, k, rng).assign.copy() for _ in range(params.n_ants)]
    if p0 is not None:
        if p0.k != k or p0.n != n:
            raise DimensionError("初期分割の大きさまたはクラス数が一致しません")
        assigns[0] = p0.assign.copy()
    sizes = [np.bincount(a, minlength=k) for a in assigns]

    state = initial_pheromone(ctx, params)
    best_fitness = -np.inf
    best_assign = assigns[0].copy()
    history: List[float] = []
    trajectory: List = []
    iterations = 0

    for iterations in range(1, params.maxiter + 1):
        weights = _transfer_weights(state, params)
        targets = rng.integers(n, size=(params.n_ants, n))
        anchors = _draw_anchors(weights, targets.ravel(), rng).reshape(targets.shape)

        for ant, (assign, size) in enumerate(zip(assigns, sizes)):
            for i_prime, i in zip(targets[ant].tolist(), anchors[ant].tolist()):
                source, target = assign[i_prime], assign[i]
                if source == target or size[source] < 2:
                    continue
                assign[i_prime] = target
                size[source] -= 1
                size[target] += 1

        fitnesses = [_fitness_of(a, k, ctx) for a in assigns]
        leader = int(np.argmax(fitnesses))
        if fitnesses[leader] > best_fitness:
            best_fitness = fitnesses[leader]
            best_assign = assigns[leader].copy()
        history.append(best_fitness)
        trajectory.append(1.0 - best_fitness)

        ants = [Partition(a, k) for a in assigns]
        state = pheromone_update(state, ants, ctx, params, fitnesses)

        window = params.stagnation_window
        if len(history) > window and history[-1] - history[-1 - window] < params.epsilon:
            break

    logger.debug(f"AC 終了: {iterations} 反復, 最良適応度 {best_fitness:.6f}")
    return finish_run(best_assign, k, ctx, iterations, trajectory=trajectory)


class GeneticAlgorithmMethod(BaseMethod):
    """遺伝的アルゴリズム (GA)"""

    params_class = GaParams

    def __init__(self):
        super().__init__("GA", "population")

    def run(self, ctx, k, params, rng, p0=None) -> RunResult:
        return genetic_algorithm(ctx, k, params or self.default_params(), rng, p0)


class AntColonyMethod(BaseMethod):
    """蟻コロニー最適化 (AC)"""

    params_class = AcParams

    def __init__(self):
        super().__init__("AC", "population")

    def run(self, ctx, k, params, rng, p0=None) -> RunResult:
        return ant_colony(ctx, k, params or self.default_params(), rng, p0)

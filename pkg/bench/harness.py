"""
マルチスタート実験
各手法をシード base_seed+0 … base_seed+m−1 で m 回実行し、
全手法を通じた最良値 W*、手法ごとの平均 W と誘引率 a_r を集計する
"""

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import BENCH_CONFIG, DATAGEN_CONFIG, FLOAT_TOLERANCE, METHOD_ORDER, get_worker_budget
from core.criteria import CriterionContext, CriterionKind, Number, build_context
from core.dataset_io import read_dataset_csv
from core.model import BinaryDataset, DissimilarityKind, Partition
from heuristics import get_method
from heuristics.base_method import RunResult
from utils.error_handler import (
    ConfigurationError,
    MethodRunError,
    ParameterError,
    error_handler,
    get_logger,
)
from utils.sample_data import builtin_spec, generate

logger = get_logger(__name__)


@dataclass
class ExperimentConfig:
    """
    実験の設定

    データは data_path（CSV）か builtins（組み込み表の番号）で指定する（load_datasets を使う場合）。
    k を省略すると組み込み表の K を使う。
    """
    data_path: Optional[str] = None
    builtins: Tuple[int, ...] = ()
    p: int = DATAGEN_CONFIG["default_p"]
    data_seed: int = DATAGEN_CONFIG["default_seed"]
    criterion: CriterionKind = CriterionKind.L1_MEDIAN
    dissim: DissimilarityKind = DissimilarityKind.L1
    k: Optional[int] = None
    methods: Tuple[str, ...] = tuple(METHOD_ORDER)
    multistart: int = BENCH_CONFIG["multistart"]
    base_seed: int = BENCH_CONFIG["base_seed"]
    relative_error_tol: float = BENCH_CONFIG["relative_error_tol"]
    overrides: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    per_method_w_star: bool = False
    workers: Optional[int] = None

    def __post_init__(self):
        try:
            self.criterion = CriterionKind(self.criterion)
            self.dissim = DissimilarityKind(self.dissim)
        except ValueError as e:
            raise ConfigurationError(f"基準または非類似度の指定が不正です: {e}") from e
        self.builtins = tuple(int(b) for b in self.builtins)
        self.methods = tuple(m.strip().upper() for m in self.methods)
        self.overrides = {m.upper(): dict(v) for m, v in self.overrides.items()}
        if self.multistart < 1:
            raise ConfigurationError(f"マルチスタートの回数は1以上です (m={self.multistart})")
        if self.relative_error_tol <= 0:
            raise ConfigurationError(f"許容誤差は正の値です (tol={self.relative_error_tol})")
        if not self.methods:
            raise ConfigurationError("手法が指定されていません")
        unknown = [m for m in list(self.methods) + list(self.overrides) if m not in METHOD_ORDER]
        if unknown:
            raise ConfigurationError(
                f"未知の手法です: {', '.join(unknown)} (使用可能: {', '.join(METHOD_ORDER)})"
            )
        for method_id in self.methods:
            get_method(method_id).build_params(self.overrides.get(method_id))

    def to_dict(self) -> Dict[str, Any]:
        record = asdict(self)
        record["criterion"] = self.criterion.value
        record["dissim"] = self.dissim.value
        record["builtins"] = list(self.builtins)
        record["methods"] = list(self.methods)
        record.pop("workers")
        return record

    def config_hash(self) -> str:
        """実行結果に影響する設定のハッシュ"""
        payload = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha1(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True, eq=False)
class DatasetEntry:
    """実験対象のデータセット"""
    name: str
    data: BinaryDataset
    k: int
    truth: Optional[Partition] = None


@dataclass
class MethodSummary:
    """1手法の集計"""
    method: str
    runs: int
    mean_w: Optional[float] = None
    best_w: Optional[Number] = None
    attraction_rate: Optional[float] = None
    mean_seconds: float = 0.0
    seeds: List[int] = field(default_factory=list)
    ws: List[Number] = field(default_factory=list)
    error: Optional[str] = None


@dataclass
class DatasetReport:
    """1データセットの集計"""
    name: str
    n: int
    p: int
    k: int
    dataset_hash: str
    w_star: Optional[Number]
    methods: List[MethodSummary] = field(default_factory=list)

    def summary(self, method: str) -> MethodSummary:
        for s in self.methods:
            if s.method == method:
                return s
        raise KeyError(method)


@dataclass
class BenchReport:
    """実験全体の結果"""
    config: Dict[str, Any]
    config_hash: str
    datasets: List[DatasetReport] = field(default_factory=list)
    started_at: str = ""
    seconds: float = 0.0

    def body(self) -> Dict[str, Any]:
        """時刻・所要時間を含まない本体（同じ設定なら常に同一）"""
        return {
            "config": self.config,
            "config_hash": self.config_hash,
            "datasets": [
                {
                    "name": d.name,
                    "n": d.n,
                    "p": d.p,
                    "k": d.k,
                    "dataset_hash": d.dataset_hash,
                    "w_star": d.w_star,
                    "methods": [
                        {
                            "method": s.method,
                            "runs": s.runs,
                            "mean_w": s.mean_w,
                            "best_w": s.best_w,
                            "attraction_rate": s.attraction_rate,
                            "seeds": s.seeds,
                            "ws": s.ws,
                            "error": s.error,
                        }
                        for s in d.methods
                    ],
                }
                for d in self.datasets
            ],
        }

    def meta(self) -> Dict[str, Any]:
        return {
            "started_at": self.started_at,
            "seconds": round(self.seconds, 6),
            "mean_seconds": {
                d.name: {s.method: round(s.mean_seconds, 6) for s in d.methods}
                for d in self.datasets
            },
        }


def attraction_rate(ws: Sequence[Number], w_star: Number, tol: float) -> float:
    """
    誘引率: W ≤ W*·(1+tol) となった実行の割合（W* = 0 なら W = 0 の割合）

    Args:
        ws: 各実行の W
        w_star: 最良値
        tol: 相対誤差の許容値

    Returns:
        [0, 1] の割合
    """
    if len(ws) == 0:
        raise ParameterError("誘引率の計算には1つ以上の実行結果が必要です")
    if tol <= 0:
        raise ParameterError(f"許容誤差は正の値です (tol={tol})")
    values = np.asarray(ws, dtype=np.float64)
    if w_star == 0:
        hits = np.abs(values) <= FLOAT_TOLERANCE
    else:
        hits = values <= w_star * (1 + tol) + FLOAT_TOLERANCE * abs(w_star)
    return float(hits.mean())


def _run_one(method_id: str,
             ctx: CriterionContext,
             k: int,
             seed: int,
             overrides: Optional[Dict[str, Any]]) -> RunResult:
    return get_method(method_id).execute(ctx, k, seed, overrides)


def multistart(config: ExperimentConfig,
               method_id: str,
               ctx: CriterionContext,
               k: int) -> List[RunResult]:
    """
    1手法を m 回（決定的な手法は1回）実行

    ワーカー数が2以上ならプロセスで並列に実行する。結果はシード順に並べる。

    Args:
        config: 実験の設定
        method_id: 手法ID
        ctx: 基準の文脈
        k: クラス数

    Returns:
        実行結果のリスト

    Raises:
        MethodRunError: いずれかの実行が失敗した（実行番号付き）
    """
    method = get_method(method_id)
    runs = 1 if method.is_deterministic else config.multistart
    seeds = [config.base_seed + i for i in range(runs)]
    overrides = config.overrides.get(method.id)
    workers = min(config.workers or get_worker_budget(), runs)

    results: List[RunResult] = []
    if workers <= 1:
        for index, seed in enumerate(seeds):
            try:
                results.append(_run_one(method.id, ctx, k, seed, overrides))
            except Exception as e:
                raise MethodRunError(method.id, index, e) from e
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one, method.id, ctx, k, seed, overrides) for seed in seeds]
            for index, future in enumerate(futures):
                try:
                    results.append(future.result())
                except Exception as e:
                    raise MethodRunError(method.id, index, e) from e

    return sorted(results, key=lambda r: r.seed)


def load_datasets(config: ExperimentConfig) -> List[DatasetEntry]:
    """設定からデータセットを読み込む・生成する"""
    if config.data_path is None and not config.builtins:
        raise ConfigurationError("データファイルか組み込み表の番号を指定してください")
    if config.data_path is not None and config.k is None:
        raise ConfigurationError("データファイルを使う場合はクラス数 k が必要です")
    entries = []
    if config.data_path is not None:
        data = read_dataset_csv(config.data_path)
        entries.append(DatasetEntry(Path(config.data_path).stem, data, config.k))
    for index in config.builtins:
        planted = generate(builtin_spec(index, config.p, config.data_seed))
        k = config.k if config.k is not None else planted.spec.k
        entries.append(DatasetEntry(planted.spec.name, planted.dataset, k, planted.truth))
    return entries


def _summarize(method_id: str, results: List[RunResult]) -> MethodSummary:
    ws = [r.best_w for r in results]
    return MethodSummary(
        method=method_id,
        runs=len(results),
        mean_w=float(np.mean(ws)),
        best_w=min(ws),
        mean_seconds=float(np.mean([r.seconds for r in results])),
        seeds=[r.seed for r in results],
        ws=ws,
    )


def run_dataset(config: ExperimentConfig, entry: DatasetEntry) -> DatasetReport:
    """1データセットで全手法を実行して集計（失敗した手法は記録して続行）"""
    ctx = build_context(entry.data, config.criterion, config.dissim)
    summaries: List[MethodSummary] = []
    for method_id in config.methods:
        started = time.perf_counter()
        try:
            results = multistart(config, method_id, ctx, entry.k)
        except MethodRunError as e:
            error_handler.handle_error(e)
            summaries.append(MethodSummary(method=method_id, runs=0, error=str(e)))
            continue
        summary = _summarize(method_id, results)
        summaries.append(summary)
        logger.info(
            f"{entry.name} / {method_id}: {summary.runs} 回, 最良 W={summary.best_w}, "
            f"平均 W={summary.mean_w:.3f} ({time.perf_counter() - started:.2f}s)"
        )

    recorded = [s for s in summaries if s.error is None]
    w_star = min((s.best_w for s in recorded), default=None)
    for s in recorded:
        if get_method(s.method).is_deterministic:
            continue
        reference = s.best_w if config.per_method_w_star else w_star
        s.attraction_rate = attraction_rate(s.ws, reference, config.relative_error_tol)

    return DatasetReport(
        name=entry.name,
        n=entry.data.n,
        p=entry.data.p,
        k=entry.k,
        dataset_hash=entry.data.hash(),
        w_star=w_star,
        methods=summaries,
    )


def run_experiment(config: ExperimentConfig,
                   datasets: Optional[List[DatasetEntry]] = None) -> BenchReport:
    """
    実験を実行

    Args:
        config: 実験の設定
        datasets: データセット（省略時は設定から読み込む）

    Returns:
        集計結果
    """
    started = time.perf_counter()
    report = BenchReport(
        config=config.to_dict(),
        config_hash=config.config_hash(),
        started_at=datetime.now().isoformat(timespec="seconds"),
    )
    for entry in datasets if datasets is not None else load_datasets(config):
        report.datasets.append(run_dataset(config, entry))
    report.seconds = time.perf_counter() - started
    return report

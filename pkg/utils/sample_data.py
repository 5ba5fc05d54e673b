"""
サンプルデータ生成モジュール
クラスごとの Bernoulli(π_k) で 0/1 データを作る「埋め込み分割」データの生成

組み込みの16表は n ∈ {120, 1200} × K ∈ {3, 5} × 大きさ {均等, 1つが半分} × {分離, 曖昧}。
"""

import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import DATAGEN_CONFIG
from core.model import BinaryDataset, Partition
from utils.error_handler import ParameterError, get_logger

logger = get_logger(__name__)


class CardinalityScheme(str, Enum):
    """クラスの大きさの決め方"""
    EQUAL = "equal"
    ONE_BIG_HALF = "onebighalf"


# K ごとの π（分離、曖昧）
SEPARATION_LEVELS = {
    3: {
        "separated": (0.1, 0.5, 0.9),
        "fuzzy": (0.3, 0.5, 0.7),
    },
    5: {
        "separated": (0.05, 0.25, 0.5, 0.75, 0.95),
        "fuzzy": (0.2, 0.35, 0.5, 0.65, 0.8),
    },
}


@dataclass(frozen=True)
class GeneratorSpec:
    """
    生成条件

    Attributes:
        n: 対象数
        p: 変数の数
        k: クラス数
        scheme: クラスの大きさの決め方
        pis: クラスごとの Bernoulli 確率（長さ K、各値は (0, 1)）
        seed: 乱数シード
        name: 表示名（任意）
    """
    n: int
    p: int
    k: int
    scheme: CardinalityScheme
    pis: Tuple[float, ...]
    seed: int = DATAGEN_CONFIG["default_seed"]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "scheme", CardinalityScheme(self.scheme))
        object.__setattr__(self, "pis", tuple(float(x) for x in self.pis))
        if self.p < 1:
            raise ParameterError(f"変数の数 p は1以上です (p={self.p})")
        if not 1 <= self.k <= self.n:
            raise ParameterError(f"クラス数 K={self.k} は 1..n={self.n} の範囲です")
        if len(self.pis) != self.k:
            raise ParameterError(f"π の個数 {len(self.pis)} がクラス数 {self.k} と違います")
        for pi in self.pis:
            if not 0 < pi < 1:
                raise ParameterError(f"π_k は (0, 1) の範囲でなければなりません (π={pi})")

    def to_dict(self) -> Dict[str, Any]:
        record = asdict(self)
        record["scheme"] = self.scheme.value
        record["pis"] = list(self.pis)
        record["sizes"] = cardinalities(self.n, self.k, self.scheme)
        return record


@dataclass(frozen=True, eq=False)
class PlantedDataset:
    """生成されたデータセットと埋め込まれた正解の分割"""
    dataset: BinaryDataset
    truth: Partition
    spec: GeneratorSpec


def cardinalities(n: int, k: int, scheme: CardinalityScheme) -> List[int]:
    """
    クラスの大きさ

    均等: 差は高々1（余りは先頭のクラスから1つずつ）
    1つが半分: 先頭のクラスが ⌈n/2⌉、残りを均等に分ける

    Returns:
        合計が n の大きさのリスト
    """
    scheme = CardinalityScheme(scheme)
    if not 1 <= k <= n:
        raise ParameterError(f"クラス数 K={k} は 1..n={n} の範囲です")
    if scheme is CardinalityScheme.EQUAL or k == 1:
        base, extra = divmod(n, k)
        return [base + (1 if c < extra else 0) for c in range(k)]
    first = math.ceil(n / 2)
    if n - first < k - 1:
        raise ParameterError(f"n={n} では K={k} クラスの「1つが半分」を作れません")
    return [first] + cardinalities(n - first, k - 1, CardinalityScheme.EQUAL)


def generate(spec: GeneratorSpec, rng: Optional[np.random.Generator] = None) -> PlantedDataset:
    """
    埋め込み分割データを生成

    クラス k の対象は p 個の座標を独立に Bernoulli(π_k) で引く。
    行はクラス順に並ぶ。

    Args:
        spec: 生成条件
        rng: 乱数生成器（省略時は spec.seed から作成）

    Returns:
        データセットと正解の分割
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    sizes = cardinalities(spec.n, spec.k, spec.scheme)
    labels = np.repeat(np.arange(spec.k), sizes)
    probs = np.asarray(spec.pis)[labels]
    values = (rng.random((spec.n, spec.p)) < probs[:, None]).astype(np.int8)
    logger.debug(f"データ生成: {spec.name or 'custom'} (n={spec.n}, p={spec.p}, K={spec.k}, sizes={sizes})")
    return PlantedDataset(BinaryDataset(values), Partition(labels, spec.k), spec)


def builtin_specs(p: int = DATAGEN_CONFIG["default_p"],
                  seed: int = DATAGEN_CONFIG["default_seed"]) -> List[GeneratorSpec]:
    """
    組み込みの16表の生成条件（表番号の順）

    n = 1200 の表は n = 120 の大きさの比率を10倍にしたもの。
    表 i のシードは seed + i − 1。

    Args:
        p: 変数の数
        seed: 基準シード

    Returns:
        16個の生成条件
    """
    if p < 1:
        raise ParameterError(f"変数の数 p は1以上です (p={p})")
    specs = []
    for n in (120, 1200):
        for k in (3, 5):
            for scheme in (CardinalityScheme.EQUAL, CardinalityScheme.ONE_BIG_HALF):
                for level in ("separated", "fuzzy"):
                    index = len(specs) + 1
                    specs.append(GeneratorSpec(
                        n=n, p=p, k=k, scheme=scheme,
                        pis=SEPARATION_LEVELS[k][level],
                        seed=seed + index - 1,
                        name=f"table{index:02d}",
                    ))
    return specs


def builtin_spec(index: int,
                 p: int = DATAGEN_CONFIG["default_p"],
                 seed: int = DATAGEN_CONFIG["default_seed"]) -> GeneratorSpec:
    """組み込み表 index (1..16) の生成条件"""
    count = DATAGEN_CONFIG["builtin_count"]
    if not 1 <= index <= count:
        raise ParameterError(f"組み込み表の番号は 1..{count} です (index={index})")
    return builtin_specs(p, seed)[index - 1]


def random_instance(n: int, p: int, rng: np.random.Generator, density: float = 0.5) -> BinaryDataset:
    """全セル独立に Bernoulli(density) の小さな検証用データ"""
    return BinaryDataset((rng.random((n, p)) < density).astype(np.int8))


def duplicate_blocks(sizes: Sequence[int], p: int, rng: np.random.Generator) -> PlantedDataset:
    """
    ブロック内の行が全て同一なデータ（ブロック同士は異なる行）

    正解の分割で W = 0 になる。
    """
    k = len(sizes)
    if 2 ** p < k:
        raise ParameterError(f"p={p} では {k} 個の異なる行を作れません")
    rows = set()
    patterns = []
    while len(patterns) < k:
        row = tuple(int(v) for v in rng.integers(0, 2, size=p))
        if row not in rows:
            rows.add(row)
            patterns.append(row)
    labels = np.repeat(np.arange(k), sizes)
    values = np.asarray(patterns, dtype=np.int8)[labels]
    n = int(sum(sizes))
    spec = GeneratorSpec(n=n, p=p, k=k, scheme=CardinalityScheme.EQUAL,
                         pis=(0.5,) * k, seed=0, name="duplicate-blocks")
    return PlantedDataset(BinaryDataset(values), Partition(labels, k), spec)


class PlantedPartitionGenerator:
    """データ生成クラス（Streamlit 画面と CLI から使う）"""

    def __init__(self, p: int = DATAGEN_CONFIG["default_p"], seed: int = DATAGEN_CONFIG["default_seed"]):
        """
        初期化

        Args:
            p: 組み込み表の変数の数
            seed: 組み込み表の基準シード
        """
        self.p = p
        self.seed = seed

    def builtin(self, index: int) -> PlantedDataset:
        """組み込み表 index を生成"""
        return generate(builtin_spec(index, self.p, self.seed))

    def custom(self, n: int, k: int, pis: Sequence[float],
               scheme: CardinalityScheme = CardinalityScheme.EQUAL,
               seed: Optional[int] = None) -> PlantedDataset:
        """任意の条件で生成"""
        spec = GeneratorSpec(n=n, p=self.p, k=k, scheme=scheme, pis=tuple(pis),
                             seed=self.seed if seed is None else seed, name="custom")
        return generate(spec)

    def catalog(self) -> pd.DataFrame:
        """組み込み表の一覧"""
        rows = []
        for spec in builtin_specs(self.p, self.seed):
            record = spec.to_dict()
            rows.append({
                "表": spec.name,
                "n": spec.n,
                "K": spec.k,
                "大きさ": "/".join(str(s) for s in record["sizes"]),
                "π": ", ".join(f"{x:g}" for x in spec.pis),
                "seed": spec.seed,
            })
        return pd.DataFrame(rows)

    @staticmethod
    def to_frame(planted: PlantedDataset) -> pd.DataFrame:
        """データ表示用の DataFrame（先頭列に正解のクラス）"""
        frame = pd.DataFrame(planted.dataset.values,
                             columns=[f"v{j + 1}" for j in range(planted.dataset.p)])
        frame.insert(0, "class", planted.truth.assign)
        return frame

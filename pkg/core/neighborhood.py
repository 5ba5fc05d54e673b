"""
近傍 N(P)
単一移動（1個の対象を別のクラスへ移す）の列挙・標本抽出・一様乱択

クラスを空にする移動は生成時点で除外する。
"""

from dataclasses import dataclass
from typing import Iterator, List, Tuple

import numpy as np

from core.model import Move, Partition
from utils.error_handler import ParameterError, PreconditionError


@dataclass(frozen=True)
class NeighborhoodView:
    """分割の正当な移動の一覧"""
    moves: Tuple[Move, ...]
    source_partition_fingerprint: str

    def __len__(self) -> int:
        return len(self.moves)

    def __iter__(self) -> Iterator[Move]:
        return iter(self.moves)


def legal_move_count(sizes: np.ndarray) -> int:
    """|N(P)| = (K−1)·(大きさ2以上のクラスに属する対象の数)"""
    k = sizes.shape[0]
    return int((k - 1) * sizes[sizes >= 2].sum())


def movable_objects(assign: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """移動元になれる対象（属するクラスの大きさが2以上）"""
    return np.flatnonzero(sizes[assign] >= 2)


def _decode(assign: np.ndarray, movable: np.ndarray, k: int, index: int) -> Move:
    # 対象ごとに (K−1) 個の移動先を、現在のクラスを飛ばして番号付けする
    obj = int(movable[index // (k - 1)])
    current = int(assign[obj])
    target = index % (k - 1)
    if target >= current:
        target += 1
    return Move(obj, current, target)


def draw_random_move(assign: np.ndarray, sizes: np.ndarray, rng: np.random.Generator) -> Move:
    """割当と大きさから一様に1つの正当な移動を引く"""
    k = sizes.shape[0]
    movable = movable_objects(assign, sizes)
    if movable.size == 0 or k < 2:
        raise PreconditionError("正当な移動がありません")
    return _decode(assign, movable, k, int(rng.integers(movable.size * (k - 1))))


def draw_move_sample(assign: np.ndarray,
                     sizes: np.ndarray,
                     count: int,
                     rng: np.random.Generator) -> List[Move]:
    """割当と大きさから非復元で count 個の移動を引く（対象番号、移動先の順に並べる）"""
    if count < 1:
        raise ParameterError(f"標本数は1以上でなければなりません (count={count})")
    k = sizes.shape[0]
    movable = movable_objects(assign, sizes)
    total = movable.size * (k - 1)
    if total == 0:
        return []
    if count >= total:
        indices = np.arange(total)
    else:
        indices = np.sort(rng.choice(total, size=count, replace=False))
    return [_decode(assign, movable, k, int(i)) for i in indices]


def enumerate_moves(p: Partition) -> NeighborhoodView:
    """
    全ての正当な移動を列挙（対象番号、移動先クラスの順）

    Args:
        p: 分割

    Returns:
        近傍ビュー
    """
    sizes = p.class_sizes()
    moves = []
    for obj in movable_objects(p.assign, sizes).tolist():
        current = int(p.assign[obj])
        for target in range(p.k):
            if target != current:
                moves.append(Move(obj, current, target))
    return NeighborhoodView(tuple(moves), p.fingerprint())


def sample_moves(p: Partition, count: int, rng: np.random.Generator) -> List[Move]:
    """
    近傍から非復元一様抽出（count ≥ |N(P)| なら近傍全体）

    Args:
        p: 分割
        count: 抽出数
        rng: 乱数生成器

    Returns:
        移動のリスト
    """
    return draw_move_sample(p.assign, p.class_sizes(), count, rng)


def random_move(p: Partition, rng: np.random.Generator) -> Move:
    """近傍から一様に1つの移動を引く"""
    return draw_random_move(p.assign, p.class_sizes(), rng)

"""
全列挙による厳密解のテスト
"""

import pytest
import sys
from pathlib import Path
from itertools import product
import numpy as np

# プロジェクトルートをパスに追加
root_path = Path(__file__).parent.parent
sys.path.insert(0, str(root_path))

from core.criteria import CriterionContext, CriterionKind, build_context, within_inertia
from core.model import DissimilarityKind
from core.oracle import (
    brute_force_optimum,
    enumerate_partitions,
    stirling2,
    verify_monotonicity,
)
from utils.error_handler import ConfigurationError, ParameterError, ResourceGuardError
from utils.sample_data import duplicate_blocks, random_instance


class TestEnumeration:
    """分割の列挙のテスト"""

    @pytest.mark.parametrize("n,k,expected", [(4, 2, 7), (5, 3, 25), (6, 3, 90), (7, 4, 350)])
    def test_stirling_numbers(self, n, k, expected):
        """S(n, k) の値"""
        assert stirling2(n, k) == expected

    @pytest.mark.parametrize("n,k", [(4, 2), (5, 3), (6, 2), (6, 5), (7, 4)])
    def test_count_and_uniqueness(self, n, k):
        """列挙の個数は S(n, k) で、重複がない"""
        seen = set()
        for p in enumerate_partitions(n, k):
            key = tuple(p.relabel_canonical().assign.tolist())
            assert key == tuple(p.assign.tolist())
            seen.add(key)

        assert len(seen) == stirling2(n, k)

    def test_matches_filtered_product(self):
        """全ての割当から K クラスのものを数えた結果と一致する"""
        n, k = 6, 3
        expected = set()
        for assign in product(range(k), repeat=n):
            if len(set(assign)) == k:
                relabeled = {}
                expected.add(tuple(relabeled.setdefault(c, len(relabeled)) for c in assign))

        listed = {tuple(p.assign.tolist()) for p in enumerate_partitions(n, k)}

        assert listed == expected

    def test_lexicographic_order(self):
        """RGS の辞書順に並ぶ"""
        listed = [tuple(p.assign.tolist()) for p in enumerate_partitions(4, 2)]

        assert listed == sorted(listed)
        assert listed[0] == (0, 0, 0, 1)
        assert listed[-1] == (0, 1, 1, 1)

    def test_guard(self):
        """既定上限を超える n は ResourceGuardError"""
        with pytest.raises(ResourceGuardError):
            next(enumerate_partitions(13, 2))
        with pytest.raises(ResourceGuardError):
            next(enumerate_partitions(15, 2, allow_large=True))

    def test_allow_large(self):
        """allow_large で絶対上限まで許可する"""
        first = next(enumerate_partitions(13, 2, allow_large=True))

        assert first.n == 13

    def test_invalid_k(self):
        """2 ≤ K < n"""
        with pytest.raises(ParameterError):
            next(enumerate_partitions(5, 5))


class TestBruteForce:
    """大域最小のテスト"""

    @pytest.mark.parametrize("criterion,dissim", [
        (CriterionKind.SUM_PAIRWISE, DissimilarityKind.L1),
        (CriterionKind.SUM_PAIRWISE, DissimilarityKind.JACCARD),
        (CriterionKind.L1_MEDIAN, DissimilarityKind.L1),
    ])
    def test_matches_scalar_evaluation(self, criterion, dissim):
        """まとめて評価した最小値が1つずつ評価した最小値と一致する"""
        data = random_instance(7, 6, np.random.default_rng(4))
        ctx = build_context(data, criterion, dissim)

        partition, w = brute_force_optimum(ctx, 3)

        expected = min(within_inertia(p, ctx) for p in enumerate_partitions(7, 3))
        assert w == pytest.approx(expected)
        assert within_inertia(partition, ctx) == pytest.approx(w)

    def test_duplicate_blocks_reach_zero(self):
        """同一行のブロックは W = 0 の正解を復元する"""
        planted = duplicate_blocks([3, 3, 2], 5, np.random.default_rng(1))
        ctx = build_context(planted.dataset, CriterionKind.L1_MEDIAN)

        partition, w = brute_force_optimum(ctx, 3)

        assert w == 0
        assert partition.same_grouping(planted.truth)

    def test_integer_result(self):
        """L1 では整数を返す"""
        data = random_instance(6, 5, np.random.default_rng(2))
        ctx = build_context(data, CriterionKind.SUM_PAIRWISE)

        _, w = brute_force_optimum(ctx, 2)

        assert isinstance(w, int)


class TestMonotonicity:
    """最適 W の K についての単調性のテスト"""

    def test_optimum_non_increasing(self):
        """両方の基準で K について非増加"""
        data = random_instance(8, 6, np.random.default_rng(3))
        ctx = build_context(data, CriterionKind.SUM_PAIRWISE)

        report = verify_monotonicity(ctx, 5)

        assert report.holds
        assert set(report.sequences) == {"sum", "l1"}
        assert [k for k, _ in report.sequences["l1"]] == [2, 3, 4, 5]
        assert report.to_dict()["criteria"]["sum"]["monotone"]

    @staticmethod
    def _violations(count, sizes, seed):
        rng = np.random.default_rng(seed)
        violations = []
        for index in range(count):
            n = int(rng.choice(sizes))
            data = random_instance(n, int(rng.integers(3, 9)), rng)
            report = verify_monotonicity(build_context(data, CriterionKind.SUM_PAIRWISE), min(5, n - 1))
            if not report.holds:
                violations.append((index, report.to_dict()))
        return violations

    def test_many_small_instances(self):
        """20個の無作為データ (n ≤ 8) で違反なし"""
        assert self._violations(20, [5, 6, 7, 8], seed=40) == []

    @pytest.mark.slow
    def test_hundred_instances(self):
        """100個の無作為データ (n ≤ 10, K ≤ 5) で違反なし"""
        assert self._violations(100, [6, 7, 8, 9, 10], seed=41) == []

    def test_requires_dataset(self):
        """データセットのない文脈では ConfigurationError"""
        data = random_instance(6, 4, np.random.default_rng(0))
        dissim = build_context(data, CriterionKind.SUM_PAIRWISE).dissim
        ctx = CriterionContext(CriterionKind.SUM_PAIRWISE, dissim, None)

        with pytest.raises(ConfigurationError):
            verify_monotonicity(ctx, 3)

    def test_k_max_range(self):
        """k_max は n 未満"""
        data = random_instance(5, 4, np.random.default_rng(0))
        ctx = build_context(data, CriterionKind.SUM_PAIRWISE)

        with pytest.raises(ParameterError):
            verify_monotonicity(ctx, 5)

"""
古典的手法（PAM, k-medoids, 階層クラスタリング）のテスト
"""

import pytest
import sys
from pathlib import Path
import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

# プロジェクトルートをパスに追加
root_path = Path(__file__).parent.parent
sys.path.insert(0, str(root_path))

from core.criteria import CriterionKind, build_context, median_vector, within_inertia
from core.model import DissimilarityKind, DissimilarityMatrix, Partition
from heuristics import get_method
from heuristics.baselines import (
    Dendrogram,
    HcParams,
    cut_dendrogram,
    hierarchical_average_linkage,
    kmedoids_binary,
    pam_medians,
)
from utils.error_handler import ConfigurationError, ConsistencyError, ParameterError
from utils.sample_data import CardinalityScheme, GeneratorSpec, duplicate_blocks, generate


@pytest.fixture
def planted():
    """3クラスの埋め込み分割データ（n=30）"""
    return generate(GeneratorSpec(n=30, p=15, k=3, scheme=CardinalityScheme.ONE_BIG_HALF,
                                  pis=(0.1, 0.5, 0.9), seed=12))


class TestPamMedians:
    """PAM（中央値版）のテスト"""

    def test_converges_to_fixed_point(self, planted):
        """収束した分割では各対象が自分のクラスの中央値に最も近い"""
        ctx = build_context(planted.dataset, CriterionKind.L1_MEDIAN)

        result = pam_medians(ctx, 3, np.random.default_rng(0))

        values = planted.dataset.values.astype(int)
        p = result.best_partition
        medians = np.array([median_vector(p.members(c), planted.dataset) for c in range(3)])
        dist = np.abs(values[:, None, :] - medians[None, :, :]).sum(axis=2)
        own = dist[np.arange(ctx.n), p.assign]
        assert np.all(own <= dist.min(axis=1))
        assert result.best_w == within_inertia(p, ctx)

    def test_trajectory_ends_at_result(self, planted):
        """軌跡の最後は収束した分割の W"""
        ctx = build_context(planted.dataset, CriterionKind.L1_MEDIAN)

        result = pam_medians(ctx, 3, np.random.default_rng(1))

        assert len(result.trajectory) == result.iterations
        assert result.trajectory[-1] == result.best_w

    def test_planted_truth_is_stable(self):
        """ブロックが同一行なら正解の分割から動かない"""
        blocks = duplicate_blocks([5, 4, 3], 8, np.random.default_rng(2))
        ctx = build_context(blocks.dataset, CriterionKind.L1_MEDIAN)

        result = pam_medians(ctx, 3, np.random.default_rng(0), p0=blocks.truth)

        assert result.best_partition == blocks.truth
        assert result.best_w == 0
        assert result.iterations == 1

    def test_requires_l1_median(self, planted):
        """SumPairwise 基準では ConfigurationError"""
        ctx = build_context(planted.dataset, CriterionKind.SUM_PAIRWISE)

        with pytest.raises(ConfigurationError):
            pam_medians(ctx, 3, np.random.default_rng(0))


class TestKMedoids:
    """k-medoids のテスト"""

    @pytest.mark.parametrize("criterion", [CriterionKind.SUM_PAIRWISE, CriterionKind.L1_MEDIAN])
    def test_converges_to_fixed_point(self, planted, criterion):
        """収束した分割では各対象が自分のクラスの核に最も近い"""
        ctx = build_context(planted.dataset, criterion)

        result = kmedoids_binary(ctx, 3, np.random.default_rng(0))

        d = ctx.dissim.d
        p = result.best_partition
        medoids = []
        for c in range(3):
            members = p.members(c)
            medoids.append(members[int(np.argmin(d[np.ix_(members, members)].sum(axis=1)))])
        dist = d[:, medoids]
        own = dist[np.arange(ctx.n), p.assign]
        assert np.all(own <= dist.min(axis=1))
        assert result.best_w == within_inertia(p, ctx)

    def test_reproducible(self, planted):
        """同じシードなら同じ結果"""
        ctx = build_context(planted.dataset, CriterionKind.SUM_PAIRWISE)

        a = kmedoids_binary(ctx, 3, np.random.default_rng(5))
        b = kmedoids_binary(ctx, 3, np.random.default_rng(5))

        assert a.best_partition == b.best_partition


class TestHierarchical:
    """群平均法のテスト"""

    @pytest.fixture
    def distinct_matrix(self):
        """値が全て異なる 9×9 の非類似度行列"""
        rng = np.random.default_rng(0)
        condensed = rng.random(36)
        return DissimilarityMatrix(squareform(condensed), DissimilarityKind.JACCARD)

    def test_heights_match_scipy(self, distinct_matrix):
        """併合の高さが scipy の average 法と一致する"""
        tree = hierarchical_average_linkage(distinct_matrix)
        reference = linkage(squareform(distinct_matrix.d), method="average")

        assert np.allclose(tree.heights, reference[:, 2])
        assert np.allclose(tree.to_linkage_matrix()[:, 3], reference[:, 3])

    @pytest.mark.parametrize("k", [2, 3, 5])
    def test_cut_matches_scipy(self, distinct_matrix, k):
        """切断した分割が scipy の maxclust と同じ"""
        tree = hierarchical_average_linkage(distinct_matrix)
        reference = linkage(squareform(distinct_matrix.d), method="average")
        labels = fcluster(reference, k, criterion="maxclust") - 1

        cut = cut_dendrogram(tree, k)

        assert cut.same_grouping(Partition(labels, k))

    def test_ties_merge_smallest_pair(self):
        """同じ高さなら番号の組が辞書順で最小のものを併合する"""
        d = DissimilarityMatrix(np.ones((4, 4), dtype=int) - np.eye(4, dtype=int), DissimilarityKind.L1)

        tree = hierarchical_average_linkage(d)

        assert tree.merges == ((0, 1, 1.0, 2), (2, 3, 1.0, 2), (4, 5, 1.0, 4))

    def test_cut_extremes(self):
        """k=1 は全体、k=n は各対象が1クラス"""
        d = DissimilarityMatrix(np.ones((4, 4), dtype=int) - np.eye(4, dtype=int), DissimilarityKind.L1)
        tree = hierarchical_average_linkage(d)

        assert cut_dendrogram(tree, 1).assign.tolist() == [0, 0, 0, 0]
        assert cut_dendrogram(tree, 2).assign.tolist() == [0, 0, 1, 1]
        assert cut_dendrogram(tree, 4).assign.tolist() == [0, 1, 2, 3]
        with pytest.raises(ParameterError):
            cut_dendrogram(tree, 5)

    def test_dendrogram_merge_count(self):
        """併合の数は n−1"""
        with pytest.raises(ConsistencyError):
            Dendrogram(3, ((0, 1, 1.0, 2),))

    def test_method_is_deterministic(self, planted):
        """HC はシードに依存しない"""
        ctx = build_context(planted.dataset, CriterionKind.L1_MEDIAN)
        method = get_method("HC")

        a = method.execute(ctx, 3, seed=0)
        b = method.execute(ctx, 3, seed=99)

        assert method.is_deterministic
        assert a.best_partition == b.best_partition
        assert a.best_w == within_inertia(a.best_partition, ctx)

    def test_dissimilarity_override(self, planted):
        """hc.dissim で Jaccard の木を使える"""
        ctx = build_context(planted.dataset, CriterionKind.SUM_PAIRWISE, DissimilarityKind.L1)
        method = get_method("HC")

        result = method.execute(ctx, 3, seed=0, overrides={"dissim": "jaccard"})

        assert method.build_params({"dissim": "jaccard"}) == HcParams(DissimilarityKind.JACCARD)
        assert result.best_w == within_inertia(result.best_partition, ctx)

    def test_invalid_dissimilarity(self):
        """未知の非類似度は ConfigurationError"""
        with pytest.raises(ConfigurationError):
            get_method("HC").build_params({"dissim": "cosine"})

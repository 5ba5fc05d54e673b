"""
埋め込み分割データ生成のテスト
"""

import pytest
import sys
from pathlib import Path
import numpy as np

# プロジェクトルートをパスに追加
root_path = Path(__file__).parent.parent
sys.path.insert(0, str(root_path))

from core.criteria import CriterionKind, build_context, within_inertia
from utils.error_handler import ParameterError
from utils.sample_data import (
    CardinalityScheme,
    GeneratorSpec,
    PlantedPartitionGenerator,
    builtin_spec,
    builtin_specs,
    cardinalities,
    duplicate_blocks,
    generate,
    random_instance,
)


class TestCardinalities:
    """クラスの大きさのテスト"""

    @pytest.mark.parametrize("n,k,scheme,expected", [
        (120, 3, CardinalityScheme.EQUAL, [40, 40, 40]),
        (10, 3, CardinalityScheme.EQUAL, [4, 3, 3]),
        (120, 3, CardinalityScheme.ONE_BIG_HALF, [60, 30, 30]),
        (120, 5, CardinalityScheme.ONE_BIG_HALF, [60, 15, 15, 15, 15]),
        (1200, 5, CardinalityScheme.ONE_BIG_HALF, [600, 150, 150, 150, 150]),
        (11, 3, CardinalityScheme.ONE_BIG_HALF, [6, 3, 2]),
    ])
    def test_sizes(self, n, k, scheme, expected):
        """大きさの合計は n"""
        assert cardinalities(n, k, scheme) == expected

    def test_too_small_for_one_big_half(self):
        """1つが半分を作れない n は ParameterError"""
        with pytest.raises(ParameterError):
            cardinalities(4, 4, CardinalityScheme.ONE_BIG_HALF)


class TestGeneratorSpec:
    """生成条件の検証のテスト"""

    def test_probability_bounds(self):
        """π は開区間 (0, 1)"""
        with pytest.raises(ParameterError):
            GeneratorSpec(n=10, p=5, k=2, scheme="equal", pis=(0.0, 0.5))
        with pytest.raises(ParameterError):
            GeneratorSpec(n=10, p=5, k=2, scheme="equal", pis=(0.5, 1.0))

    def test_pis_length(self):
        """π の個数は K"""
        with pytest.raises(ParameterError):
            GeneratorSpec(n=10, p=5, k=3, scheme="equal", pis=(0.2, 0.8))

    def test_to_dict(self):
        """記録用の辞書に大きさを含む"""
        spec = GeneratorSpec(n=12, p=4, k=3, scheme="onebighalf", pis=(0.1, 0.5, 0.9))

        record = spec.to_dict()

        assert record["scheme"] == "onebighalf"
        assert record["sizes"] == [6, 3, 3]


class TestGenerate:
    """データ生成のテスト"""

    def test_shape_and_truth(self):
        """行はクラス順で、正解の大きさが指定通り"""
        spec = GeneratorSpec(n=30, p=8, k=3, scheme="onebighalf", pis=(0.1, 0.5, 0.9), seed=1)

        planted = generate(spec)

        assert planted.dataset.n == 30
        assert planted.dataset.p == 8
        assert planted.truth.class_sizes().tolist() == [15, 8, 7]
        assert planted.truth.assign.tolist() == sorted(planted.truth.assign.tolist())

    def test_reproducible(self):
        """同じシードなら同じデータ"""
        spec = GeneratorSpec(n=20, p=6, k=2, scheme="equal", pis=(0.2, 0.8), seed=5)

        assert generate(spec).dataset == generate(spec).dataset

    def test_class_frequencies(self):
        """各クラスの1の割合は π_k に近い"""
        planted = generate(builtin_spec(1))
        values = planted.dataset.values

        for c, pi in enumerate(planted.spec.pis):
            rows = planted.truth.members(c)
            assert values[rows].mean() == pytest.approx(pi, abs=0.08)

    def test_random_instance(self):
        """検証用の小さなデータ"""
        data = random_instance(8, 5, np.random.default_rng(0))

        assert (data.n, data.p) == (8, 5)

    def test_duplicate_blocks_have_zero_within(self):
        """ブロックが同一行のデータでは正解の W = 0"""
        planted = duplicate_blocks([3, 2, 2], 4, np.random.default_rng(0))
        ctx = build_context(planted.dataset, CriterionKind.SUM_PAIRWISE)

        assert within_inertia(planted.truth, ctx) == 0
        assert len({tuple(r) for r in planted.dataset.values.tolist()}) == 3


class TestBuiltinTables:
    """組み込み表のテスト"""

    def test_sixteen_tables(self):
        """16表が番号順に並ぶ"""
        specs = builtin_specs()

        assert len(specs) == 16
        assert [s.name for s in specs] == [f"table{i:02d}" for i in range(1, 17)]
        assert len({(s.n, s.k, s.scheme, s.pis) for s in specs}) == 16

    def test_first_and_last(self):
        """先頭は n=120, K=3 均等・分離、最後は n=1200, K=5 1つが半分・曖昧"""
        first = builtin_spec(1)
        last = builtin_spec(16)

        assert (first.n, first.k, first.scheme) == (120, 3, CardinalityScheme.EQUAL)
        assert first.pis == (0.1, 0.5, 0.9)
        assert (last.n, last.k, last.scheme) == (1200, 5, CardinalityScheme.ONE_BIG_HALF)
        assert last.pis == (0.2, 0.35, 0.5, 0.65, 0.8)

    def test_seeds_follow_index(self):
        """表 i のシードは基準シード + i − 1"""
        assert builtin_spec(1, seed=100).seed == 100
        assert builtin_spec(7, seed=100).seed == 106

    def test_index_out_of_range(self):
        """番号は 1..16"""
        with pytest.raises(ParameterError):
            builtin_spec(0)
        with pytest.raises(ParameterError):
            builtin_spec(17)

    def test_generator_catalog(self):
        """一覧は16行"""
        generator = PlantedPartitionGenerator(p=10)

        catalog = generator.catalog()

        assert len(catalog) == 16
        assert catalog.iloc[0]["大きさ"] == "40/40/40"

    def test_generator_frame(self):
        """表示用の DataFrame の先頭列は正解のクラス"""
        generator = PlantedPartitionGenerator(p=6)

        frame = generator.to_frame(generator.custom(n=12, k=2, pis=(0.2, 0.8)))

        assert list(frame.columns) == ["class", "v1", "v2", "v3", "v4", "v5", "v6"]
        assert frame["class"].tolist() == [0] * 6 + [1] * 6

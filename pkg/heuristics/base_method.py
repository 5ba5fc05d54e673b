"""
基底手法クラス
全てのクラスタリング手法（メタヒューリスティクスと古典手法）の基底となるクラス
"""

from abc import ABC, abstractmethod
import dataclasses
import json
import time
import typing
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Type

import numpy as np

from core.criteria import CriterionContext, Number, within_inertia
from core.model import Partition
from utils.error_handler import ConfigurationError, ParameterError

META_FILE = Path(__file__).resolve().parent.parent / "data" / "methods_meta.json"


@dataclass
class RunResult:
    """
    1回の実行結果

    best_w は常に best_partition を最初から計算し直した W と一致する。
    """
    best_partition: Partition
    best_w: Number
    iterations: int
    seed: Optional[int] = None
    method: str = ""
    trajectory: Optional[List[Number]] = None
    accepted: int = 0
    seconds: float = 0.0
    escapes: int = 0


def finish_run(best_assign: np.ndarray,
               k: int,
               ctx: CriterionContext,
               iterations: int,
               **extra) -> RunResult:
    """最良の割当から W を厳密に再計算して結果を作成"""
    best = Partition(best_assign, k)
    return RunResult(best_partition=best, best_w=within_inertia(best, ctx),
                     iterations=iterations, **extra)


def _load_all_metadata() -> Dict[str, Dict[str, Any]]:
    if not META_FILE.exists():
        return {}
    with open(META_FILE, 'r', encoding='utf-8') as f:
        data = json.load(f)
    return {m['id']: m for m in data.get('methods', [])}


def _coerce(value: Any, target: Any) -> Any:
    """文字列などの上書き値をフィールドの型に変換"""
    origin = typing.get_origin(target)
    if origin is typing.Union:
        options = [t for t in typing.get_args(target) if t is not type(None)]
        if value is None or (isinstance(value, str) and value.lower() == "none"):
            return None
        target = options[0]
    if isinstance(target, type) and issubclass(target, bool):
        if isinstance(value, str):
            lowered = value.strip().lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"真偽値として解釈できません: {value!r}")
        return bool(value)
    if isinstance(target, type) and issubclass(target, int):
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(f"整数ではありません: {value!r}")
        return int(value)
    if isinstance(target, type) and issubclass(target, float):
        return float(value)
    if isinstance(target, type):
        return target(value)
    return value


class BaseMethod(ABC):
    """全手法の基底クラス"""

    params_class: Optional[Type] = None
    is_deterministic: bool = False

    def __init__(self, method_id: str, family: str = ""):
        """
        初期化

        Args:
            method_id: 手法の一意識別子 (SA, TA, ...)
            family: 手法のカテゴリ
        """
        self.id = method_id
        self.family = family
        self.metadata = self._load_metadata()

    def _load_metadata(self) -> Dict[str, Any]:
        """手法のメタデータを読み込み"""
        meta = _load_all_metadata().get(self.id)
        if meta is not None:
            return meta

        # デフォルトのメタデータを返す
        return {
            'id': self.id,
            'name': self.id,
            'family': self.family,
            'description': f'{self.id} 手法',
            'parameters': []
        }

    @property
    def name(self) -> str:
        return self.metadata.get('name', self.id)

    @abstractmethod
    def run(self,
            ctx: CriterionContext,
            k: int,
            params: Any,
            rng: np.random.Generator,
            p0: Optional[Partition] = None) -> RunResult:
        """
        手法を1回実行
        サブクラスで必ず実装する
        """

    def default_params(self) -> Any:
        """既定パラメータ"""
        if self.params_class is None:
            return None
        return self.params_class()

    def build_params(self, overrides: Optional[Dict[str, Any]] = None) -> Any:
        """
        上書き値を反映したパラメータを作成

        Args:
            overrides: パラメータ名 → 値（CLI由来の文字列も可、'-' は '_' とみなす）

        Returns:
            パラメータのデータクラス
        """
        if not overrides:
            return self.default_params()
        if self.params_class is None:
            raise ConfigurationError(f"{self.id} には調整できるパラメータがありません")

        hints = typing.get_type_hints(self.params_class)
        names = {f.name for f in dataclasses.fields(self.params_class)}
        values = {}
        for raw_name, value in overrides.items():
            name = raw_name.replace('-', '_')
            if name not in names:
                raise ConfigurationError(
                    f"{self.id} に未知のパラメータ '{raw_name}' が指定されました (使用可能: {', '.join(sorted(names))})"
                )
            try:
                values[name] = _coerce(value, hints[name])
            except (TypeError, ValueError) as e:
                raise ConfigurationError(f"{self.id}.{raw_name} の値 {value!r} が不正です: {e}") from e
        try:
            return dataclasses.replace(self.default_params(), **values)
        except ParameterError as e:
            raise ConfigurationError(f"{self.id} のパラメータが不正です: {e}") from e

    def execute(self,
                ctx: CriterionContext,
                k: int,
                seed: int,
                overrides: Optional[Dict[str, Any]] = None,
                p0: Optional[Partition] = None) -> RunResult:
        """
        シードを固定して1回実行し、所要時間を記録

        Args:
            ctx: 基準の文脈
            k: クラス数
            seed: 乱数シード
            overrides: パラメータの上書き
            p0: 初期分割

        Returns:
            実行結果
        """
        params = self.build_params(overrides)
        rng = np.random.default_rng(seed)
        start = time.perf_counter()
        result = self.run(ctx, k, params, rng, p0)
        result.seconds = time.perf_counter() - start
        result.seed = seed
        result.method = self.id
        return result

    def render_parameter_controls(self) -> Dict[str, Any]:
        """パラメータ調整UIをレンダリングし、上書き値を返す"""
        import streamlit as st

        params: Dict[str, Any] = {}
        if not self.metadata.get('parameters'):
            return params

        # 既定値は config 由来のパラメータクラスを優先する
        current = self.default_params()
        defaults = dataclasses.asdict(current) if current is not None else {}

        st.subheader(f"⚙️ {self.name} のパラメータ")
        for param in self.metadata['parameters']:
            params[param['name']] = self._render_param_control(
                st,
                param['name'],
                param['type'],
                param.get('description', ''),
                defaults.get(param['name'], param.get('default'))
            )
        return params

    def _render_param_control(self, st, name: str, param_type: str,
                              description: str, default: Any) -> Any:
        """個別パラメータコントロールをレンダリング"""
        display_name = name.replace('_', ' ')
        key = f"{self.id}_{name}"

        if param_type == 'int':
            return st.number_input(display_name, value=int(default or 0),
                                   help=description, key=key, step=1)
        elif param_type == 'float':
            return st.number_input(display_name, value=float(default or 0.0),
                                   help=description, key=key, format="%.4f")
        elif param_type == 'bool':
            return st.checkbox(display_name, value=bool(default), help=description, key=key)
        else:
            default = getattr(default, 'value', default)
            return st.text_input(display_name, value='' if default is None else str(default),
                                 help=description, key=key)

    def describe(self) -> Dict[str, Any]:
        """一覧表示用の情報"""
        return {
            'id': self.id,
            'name': self.name,
            'family': self.family,
            'deterministic': self.is_deterministic,
            'description': self.metadata.get('description', ''),
        }

"""
手法の登録簿
手法ID (SA, TA, TS, GA, AC, PAM, KMED, HC) から実装クラスを引く
"""

from typing import Dict, List, Type

from config import METHOD_ORDER
from heuristics.base_method import BaseMethod, RunResult
from heuristics.baselines import HierarchicalMethod, KMedoidsMethod, PamMediansMethod
from heuristics.population import AntColonyMethod, GeneticAlgorithmMethod
from heuristics.trajectory import (
    SimulatedAnnealingMethod,
    TabuSearchMethod,
    ThresholdAcceptingMethod,
)
from utils.error_handler import ConfigurationError

METHOD_REGISTRY: Dict[str, Type[BaseMethod]] = {
    "SA": SimulatedAnnealingMethod,
    "TA": ThresholdAcceptingMethod,
    "TS": TabuSearchMethod,
    "GA": GeneticAlgorithmMethod,
    "AC": AntColonyMethod,
    "PAM": PamMediansMethod,
    "KMED": KMedoidsMethod,
    "HC": HierarchicalMethod,
}


def get_method(method_id: str) -> BaseMethod:
    """
    手法IDから手法を作成（大文字小文字は区別しない）

    Raises:
        ConfigurationError: 未知の手法ID
    """
    key = method_id.strip().upper()
    if key not in METHOD_REGISTRY:
        raise ConfigurationError(
            f"未知の手法です: {method_id} (使用可能: {', '.join(METHOD_ORDER)})"
        )
    return METHOD_REGISTRY[key]()


def list_methods(family: str = None) -> List[BaseMethod]:
    """登録されている手法を METHOD_ORDER の順に返す"""
    methods = [METHOD_REGISTRY[m]() for m in METHOD_ORDER]
    if family:
        methods = [m for m in methods if m.family == family]
    return methods


__all__ = ["METHOD_REGISTRY", "get_method", "list_methods", "BaseMethod", "RunResult"]

"""
エラーハンドリングモジュール
例外階層と統一的なエラー処理・ロギングを提供するユーティリティ
"""

from enum import Enum
from typing import Optional, Callable, Any, Dict, List
import logging
import traceback
from functools import wraps
from datetime import datetime

from config import LOG_LEVEL, LOG_FORMAT, ERROR_CONFIG


class ClusteringError(Exception):
    """本パッケージの全例外の基底クラス"""


class DimensionError(ClusteringError, ValueError):
    """ベクトル長・行列サイズの不一致"""


class PreconditionError(ClusteringError, ValueError):
    """操作の事前条件違反（空クラスを生む移動など）"""


class ConsistencyError(ClusteringError, ValueError):
    """状態の不整合（移動元クラスが現在の割当と異なるなど）"""


class ParameterError(ClusteringError, ValueError):
    """パラメータの範囲外"""


class ConfigurationError(ClusteringError, ValueError):
    """実行設定の誤り（未知の手法、基準の組合せ違いなど）"""


class DataFormatError(ClusteringError, ValueError):
    """データファイルの形式エラー"""


class DegenerateDataError(ClusteringError, ValueError):
    """全inertiaが0など、計算できない退化データ"""


class ResourceGuardError(ClusteringError, MemoryError):
    """全列挙の規模上限超過"""


class MethodRunError(ClusteringError, RuntimeError):
    """マルチスタート中の個別実行の失敗"""

    def __init__(self, method_id: str, run_index: int, cause: BaseException):
        self.method_id = method_id
        self.run_index = run_index
        self.cause = cause
        super().__init__(f"{method_id} の実行 #{run_index} が失敗しました: {cause}")


class ErrorLevel(Enum):
    """エラーレベル定義"""
    DEBUG = "debug"
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"
    CRITICAL = "critical"


_configured_loggers: Dict[str, logging.Logger] = {}


def get_logger(name: str) -> logging.Logger:
    """
    パッケージ共通形式のロガーを取得

    Args:
        name: ロガー名

    Returns:
        設定済みのロガー
    """
    logger = logging.getLogger(name)
    logger.setLevel(LOG_LEVEL)
    _configured_loggers[name] = logger

    # ハンドラーが既に設定されていない場合のみ追加
    if not logger.handlers:
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(console_handler)
        logger.propagate = False

    return logger


def set_log_level(level: int) -> None:
    """パッケージ配下の全ロガーのレベルを変更"""
    for logger in _configured_loggers.values():
        logger.setLevel(level)


class ErrorHandler:
    """統一的なエラーハンドリングクラス"""

    def __init__(self,
                 logger_name: str = __name__,
                 notifier: Optional[Callable[[str, ErrorLevel], None]] = None):
        """
        初期化

        Args:
            logger_name: ロガー名
            notifier: ユーザー通知関数（Streamlitアプリが設定する）
        """
        self.logger = get_logger(logger_name)
        self.notifier = notifier
        self.error_count = 0
        self.error_history: List[Dict[str, Any]] = []

    def set_notifier(self, notifier: Optional[Callable[[str, ErrorLevel], None]]) -> None:
        """ユーザー通知関数を設定"""
        self.notifier = notifier

    def handle_error(self,
                     error: Exception,
                     level: ErrorLevel = ErrorLevel.ERROR,
                     user_message: Optional[str] = None,
                     show_traceback: bool = False) -> None:
        """
        エラーを処理

        Args:
            error: 発生したエラー
            level: エラーレベル
            user_message: ユーザーに表示するメッセージ
            show_traceback: トレースバックを記録するか
        """
        self.error_count += 1

        error_info = {
            'timestamp': datetime.now().isoformat(),
            'type': type(error).__name__,
            'message': str(error),
            'level': level.value,
            'traceback': traceback.format_exc() if show_traceback else None
        }
        self.error_history.append(error_info)
        max_history = ERROR_CONFIG["max_error_history"]
        if len(self.error_history) > max_history:
            self.error_history = self.error_history[-max_history:]

        if ERROR_CONFIG["log_errors"]:
            log_method = getattr(self.logger, level.value)
            log_method(f"Error occurred: {error}", exc_info=show_traceback)

        if self.notifier is not None:
            self.notifier(user_message or self._get_default_message(error), level)

    def _get_default_message(self, error: Exception) -> str:
        """デフォルトのエラーメッセージを取得"""
        error_messages = {
            DimensionError: "ベクトルまたは行列のサイズが一致しません。",
            PreconditionError: "操作の前提条件を満たしていません。",
            ConsistencyError: "分割の状態が不整合です。",
            ParameterError: "パラメータが範囲外です。設定値を確認してください。",
            ConfigurationError: "実行設定が正しくありません。",
            DataFormatError: "データファイルの形式が正しくありません（0/1のみ使用できます）。",
            DegenerateDataError: "全ての行が同一のため計算できません。",
            ResourceGuardError: "全列挙の規模が上限を超えています。nを小さくしてください。",
            MethodRunError: "手法の実行中にエラーが発生しました。",
            FileNotFoundError: "ファイルが見つかりません。ファイルパスを確認してください。",
            ValueError: "入力値が正しくありません。入力内容を確認してください。",
        }

        return error_messages.get(
            type(error),
            f"予期しないエラーが発生しました: {type(error).__name__}"
        )

    def safe_execute(self,
                     func: Callable,
                     *args,
                     default_return: Any = None,
                     error_message: Optional[str] = None,
                     **kwargs) -> Any:
        """
        安全に関数を実行

        Args:
            func: 実行する関数
            *args: 関数の引数
            default_return: エラー時のデフォルト戻り値
            error_message: エラー時のメッセージ
            **kwargs: 関数のキーワード引数

        Returns:
            関数の戻り値またはデフォルト値
        """
        try:
            return func(*args, **kwargs)
        except Exception as e:
            self.handle_error(
                e,
                level=ErrorLevel.ERROR,
                user_message=error_message
            )
            return default_return

    def error_boundary(self,
                       level: ErrorLevel = ErrorLevel.ERROR,
                       message: Optional[str] = None,
                       default_return: Any = None):
        """
        デコレーターとしてのエラーバウンダリ

        Args:
            level: エラーレベル
            message: エラーメッセージ
            default_return: エラー時のデフォルト戻り値
        """
        def decorator(func: Callable) -> Callable:
            @wraps(func)
            def wrapper(*args, **kwargs):
                try:
                    return func(*args, **kwargs)
                except Exception as e:
                    self.handle_error(
                        e,
                        level=level,
                        user_message=message
                    )
                    return default_return
            return wrapper
        return decorator

    def get_error_stats(self) -> Dict[str, Any]:
        """
        エラー統計を取得

        Returns:
            エラー統計情報
        """
        error_types: Dict[str, int] = {}
        for error in self.error_history:
            error_types[error['type']] = error_types.get(error['type'], 0) + 1

        return {
            'total_errors': self.error_count,
            'error_types': error_types,
            'recent_errors': self.error_history[-5:]
        }

    def clear_error_history(self) -> None:
        """エラー履歴をクリア"""
        self.error_history = []
        self.error_count = 0


# グローバルインスタンス
error_handler = ErrorHandler("binclust")

# 画面のエントリーポイント用
error_boundary = error_handler.error_boundary

"""
アプリケーション設定ファイル
二値データクラスタリング（組合せ最適化ヒューリスティクス）の既定値
"""

import os
import logging

# アプリケーション基本設定
APP_NAME = "二値データクラスタリング・ベンチマーク"
APP_VERSION = "1.0.0"
APP_DESCRIPTION = "組合せ最適化メタヒューリスティクスによる0/1データのクラスタリング"

# ログ設定
LOG_LEVEL = logging.INFO
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# 並列実行のワーカー数を指定する環境変数
WORKERS_ENV_VAR = "BINCLUST_WORKERS"
DEFAULT_WORKERS = 1

# 手法カテゴリ
METHOD_FAMILIES = {
    "trajectory": {
        "name": "近傍探索型",
        "icon": "🧭",
        "description": "単一移動近傍を辿るメタヒューリスティクス (SA, TA, TS)"
    },
    "population": {
        "name": "集団型",
        "icon": "🐜",
        "description": "解の集団を扱うメタヒューリスティクス (GA, AC)"
    },
    "baseline": {
        "name": "古典的手法",
        "icon": "📐",
        "description": "比較用の古典手法 (PAM, k-medoids, 階層クラスタリング)"
    }
}

# 手法IDの並び順（レポートの列順にも使用）
METHOD_ORDER = ["SA", "TA", "TS", "GA", "AC", "PAM", "KMED", "HC"]

# 各手法の既定パラメータ
SA_DEFAULTS = {
    "chi0": 0.95,
    "chain_length": 50,
    "gamma": 0.91,
    "epsilon": 0.01,
    "max_chains": 1000,  # 連鎖数の上限
    "calibration_samples": 100
}

TA_DEFAULTS = {
    "th0": 100.0,
    "gamma": 0.9,
    "maxiter": 50,
    "epsilon": 0.01,
    "relative": False
}

TS_DEFAULTS = {
    "tabu_len": 5,
    "maxiter": 150,
    "sample_fraction": 0.1
}

GA_DEFAULTS = {
    "pop_size": 20,
    "p_crossover": 0.8,
    "p_mutation": 0.1,
    "maxiter": 500,
    "epsilon": 0.01,
    "elite_count": 1
}

AC_DEFAULTS = {
    "alpha": 0.5,
    "beta": 0.2,
    "rho": 0.5,
    "n_ants": 10,
    "maxiter": 500,
    "epsilon": 0.01,
    "tau0": 1.0,
    "visibility_floor": 1e-6,
    "stagnation_window": 50
}

BASELINE_DEFAULTS = {
    "max_iter": 1000
}

# SAの初期温度が決まらない場合（全ての移動が改善）の下限温度
MIN_TEMPERATURE = 1e-6

# 実数値の W を比較するときの相対許容誤差
FLOAT_TOLERANCE = 1e-9

# データ生成設定
DATAGEN_CONFIG = {
    "default_p": 20,
    "default_seed": 42,
    "builtin_count": 16
}

# 厳密解（全列挙）設定
ORACLE_CONFIG = {
    "default_max_n": 12,
    "hard_max_n": 14
}

# ベンチマーク設定
BENCH_CONFIG = {
    "multistart": 100,
    "relative_error_tol": 0.05,
    "base_seed": 0,
    "formats": ["table", "json", "csv"]
}

# ページ設定
PAGE_CONFIG = {
    "page_title": APP_NAME,
    "page_icon": "🧮",
    "layout": "wide",
    "initial_sidebar_state": "expanded"
}

# エラーハンドリング設定
ERROR_CONFIG = {
    "show_error_details": True,
    "log_errors": True,
    "max_error_history": 50
}


def get_worker_budget() -> int:
    """
    並列実行のワーカー数を環境変数から取得

    Returns:
        1以上のワーカー数
    """
    raw = os.environ.get(WORKERS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return DEFAULT_WORKERS
    try:
        workers = int(raw)
    except ValueError:
        logging.getLogger(__name__).warning(
            f"{WORKERS_ENV_VAR}={raw!r} は整数ではありません。{DEFAULT_WORKERS} を使用します"
        )
        return DEFAULT_WORKERS
    if workers < 1:
        logging.getLogger(__name__).warning(
            f"{WORKERS_ENV_VAR}={workers} は1未満です。{DEFAULT_WORKERS} を使用します"
        )
        return DEFAULT_WORKERS
    return workers

"""
アプリケーション状態管理モジュール
StreamlitのSessionStateで現在のデータセット、設定、実行履歴を管理する
"""

import json
from datetime import datetime
from typing import Any, Dict, List

import streamlit as st

from config import DATAGEN_CONFIG

HISTORY_LIMIT = 100


class StateManager:
    """アプリケーション状態管理クラス"""

    def __init__(self):
        """初期化"""
        self._initialize_state()

    def _initialize_state(self):
        """初期状態を設定"""
        if 'initialized' not in st.session_state:
            st.session_state.initialized = True
            st.session_state.dataset = None
            st.session_state.dataset_name = None
            st.session_state.truth = None
            st.session_state.k = 3
            st.session_state.criterion = "l1"
            st.session_state.dissim = "l1"
            st.session_state.p = DATAGEN_CONFIG["default_p"]
            st.session_state.method_params = {}
            st.session_state.last_report = None
            st.session_state.history = []

    def get(self, key: str, default: Any = None) -> Any:
        """
        状態値を取得

        Args:
            key: 取得するキー
            default: デフォルト値

        Returns:
            状態値
        """
        return st.session_state.get(key, default)

    def set(self, key: str, value: Any) -> None:
        """状態値を設定"""
        st.session_state[key] = value

    def set_dataset(self, name: str, dataset: Any, truth: Any = None) -> None:
        """
        現在のデータセットを設定

        Args:
            name: 表示名
            dataset: BinaryDataset
            truth: 正解の分割（生成データのみ）
        """
        st.session_state.dataset = dataset
        st.session_state.dataset_name = name
        st.session_state.truth = truth
        st.session_state.last_report = None

    def has_dataset(self) -> bool:
        return st.session_state.get('dataset') is not None

    def update_method_params(self, method_id: str, params: Dict) -> None:
        """手法のパラメータ上書き値を保存"""
        if 'method_params' not in st.session_state:
            st.session_state.method_params = {}
        st.session_state.method_params[method_id] = params

    def get_method_params(self, method_id: str) -> Dict:
        """手法のパラメータ上書き値を取得"""
        if 'method_params' not in st.session_state:
            return {}
        return st.session_state.method_params.get(method_id, {})

    def record_run(self, kind: str, summary: Dict[str, Any]) -> None:
        """
        実行結果の要約を履歴に追加

        Args:
            kind: run / bench / oracle
            summary: 表示用の要約
        """
        if 'history' not in st.session_state:
            st.session_state.history = []

        st.session_state.history.append({
            'timestamp': datetime.now().isoformat(timespec='seconds'),
            'kind': kind,
            'dataset': st.session_state.get('dataset_name'),
            **summary
        })

        if len(st.session_state.history) > HISTORY_LIMIT:
            st.session_state.history = st.session_state.history[-HISTORY_LIMIT:]

    def get_recent_history(self, limit: int = 10) -> List[Dict]:
        """最近の履歴を取得"""
        if 'history' not in st.session_state:
            return []
        return st.session_state.history[-limit:]

    def clear_history(self) -> None:
        """履歴をクリア"""
        st.session_state.history = []

    def export_state(self) -> str:
        """
        設定と履歴をJSON形式でエクスポート

        Returns:
            JSON文字列
        """
        state_dict = {
            'dataset_name': self.get('dataset_name'),
            'k': self.get('k'),
            'criterion': self.get('criterion'),
            'dissim': self.get('dissim'),
            'p': self.get('p'),
            'method_params': self.get('method_params', {}),
            'history': self.get('history', []),
            'timestamp': datetime.now().isoformat()
        }
        return json.dumps(state_dict, indent=2, ensure_ascii=False, default=str)

    def import_state(self, json_str: str) -> bool:
        """
        JSON形式の設定をインポート（データセット本体は含まない）

        Returns:
            成功した場合True
        """
        try:
            state_dict = json.loads(json_str)
        except json.JSONDecodeError:
            return False
        for key in ('k', 'criterion', 'dissim', 'p', 'method_params', 'history'):
            if key in state_dict:
                self.set(key, state_dict[key])
        return True

    def reset_state(self) -> None:
        """状態を初期化"""
        for key in list(st.session_state.keys()):
            del st.session_state[key]
        self._initialize_state()


# グローバルインスタンス
state_manager = StateManager()

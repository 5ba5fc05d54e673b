"""
二値データクラスタリング・ベンチマーク
メインアプリケーション - データ生成、単発実行、マルチスタート実験、厳密解
"""

import sys
from pathlib import Path

import pandas as pd
import streamlit as st

# プロジェクトルートをパスに追加
sys.path.insert(0, str(Path(__file__).parent))

# 設定のインポート
from config import (
    APP_NAME,
    APP_VERSION,
    APP_DESCRIPTION,
    BENCH_CONFIG,
    DATAGEN_CONFIG,
    METHOD_FAMILIES,
    METHOD_ORDER,
    ORACLE_CONFIG,
    PAGE_CONFIG,
)

# ユーティリティのインポート
from bench.harness import BenchReport, DatasetEntry, ExperimentConfig, run_dataset
from bench.report import format_report, report_frame
from core.criteria import CriterionKind, build_context, within_inertia
from core.dataset_io import read_dataset_csv
from core.model import DissimilarityKind
from core.oracle import brute_force_optimum, stirling2, verify_monotonicity
from heuristics import get_method, list_methods
from utils.error_handler import ErrorLevel, error_boundary, error_handler
from utils.sample_data import CardinalityScheme, PlantedPartitionGenerator
from utils.state_manager import state_manager

# ページ設定
st.set_page_config(**PAGE_CONFIG)


def notify(message: str, level: ErrorLevel) -> None:
    """エラーハンドラーからの通知を画面に表示"""
    if level in (ErrorLevel.WARNING,):
        st.warning(f"⚠️ {message}")
    elif level in (ErrorLevel.DEBUG, ErrorLevel.INFO):
        st.info(message)
    else:
        st.error(f"❌ {message}")


def initialize_session_state():
    """セッション状態の初期化"""
    if 'initialized' not in st.session_state:
        state_manager._initialize_state()
    error_handler.set_notifier(notify)


def render_sidebar():
    """サイドバーのレンダリング"""
    with st.sidebar:
        st.title(f"{PAGE_CONFIG['page_icon']} {APP_NAME}")
        st.caption(f"Version {APP_VERSION}")
        st.caption(APP_DESCRIPTION)

        st.divider()

        st.subheader("📂 データセット")
        source = st.radio("データの取得元", ["組み込み表", "CSVアップロード"], horizontal=True)
        if source == "組み込み表":
            p = st.number_input("変数の数 p", min_value=1, value=int(state_manager.get('p')), step=1)
            index = st.selectbox("表", list(range(1, DATAGEN_CONFIG["builtin_count"] + 1)),
                                 format_func=lambda i: f"table{i:02d}")
            if st.button("読み込む", use_container_width=True):
                generator = PlantedPartitionGenerator(p=int(p))
                planted = error_handler.safe_execute(generator.builtin, index)
                if planted is not None:
                    state_manager.set('p', int(p))
                    state_manager.set('k', planted.spec.k)
                    state_manager.set_dataset(planted.spec.name, planted.dataset, planted.truth)
        else:
            uploaded = st.file_uploader("0/1のCSV", type=["csv"])
            if uploaded is not None and st.button("読み込む", use_container_width=True):
                dataset = error_handler.safe_execute(read_dataset_csv, uploaded)
                if dataset is not None:
                    state_manager.set_dataset(Path(uploaded.name).stem, dataset)

        if state_manager.has_dataset():
            data = state_manager.get('dataset')
            st.success(f"{state_manager.get('dataset_name')}: n={data.n}, p={data.p}")

        st.divider()

        st.subheader("⚙️ 基準")
        state_manager.set('k', int(st.number_input("クラス数 K", min_value=2,
                                                   value=int(state_manager.get('k')), step=1)))
        criteria = [c.value for c in CriterionKind]
        state_manager.set('criterion', st.selectbox(
            "クラス内異質性 δ", criteria, index=criteria.index(state_manager.get('criterion')),
            format_func=lambda v: {"sum": "δ_sum（対の和）", "l1": "δ_L1（中央値への距離）"}[v]
        ))
        kinds = [d.value for d in DissimilarityKind]
        state_manager.set('dissim', st.selectbox(
            "非類似度", kinds, index=kinds.index(state_manager.get('dissim'))
        ))

        st.divider()

        st.subheader("🕘 履歴")
        history = state_manager.get_recent_history(5)
        if history:
            st.dataframe(pd.DataFrame(history), hide_index=True, use_container_width=True)
            st.download_button("📥 設定と履歴をエクスポート", state_manager.export_state(),
                               "binclust_state.json", "application/json")
            if st.button("履歴をクリア"):
                state_manager.clear_history()
        else:
            st.caption("まだ実行していません")


def current_context():
    """現在の設定から基準の文脈を作成"""
    return build_context(
        state_manager.get('dataset'),
        CriterionKind(state_manager.get('criterion')),
        DissimilarityKind(state_manager.get('dissim')),
    )


def render_generate_tab():
    """データ生成タブ"""
    st.subheader("埋め込み分割データの生成")
    generator = PlantedPartitionGenerator(p=int(state_manager.get('p')))
    with st.expander("組み込み表の一覧", expanded=False):
        st.dataframe(generator.catalog(), hide_index=True, use_container_width=True)

    col1, col2 = st.columns([1, 2])
    with col1:
        n = st.number_input("対象数 n", min_value=3, value=120, step=1)
        k = st.number_input("クラス数", min_value=2, max_value=10, value=3, step=1, key="gen_k")
        pis_text = st.text_input("π（カンマ区切り）", "0.1,0.5,0.9")
        scheme = st.selectbox("大きさ", [s.value for s in CardinalityScheme])
        seed = st.number_input("シード", value=DATAGEN_CONFIG["default_seed"], step=1)
        if st.button("生成", key="gen_custom"):
            pis = error_handler.safe_execute(
                lambda: [float(x) for x in pis_text.split(",")],
                error_message="π は数値のカンマ区切りで指定してください",
            )
            if pis is not None:
                planted = error_handler.safe_execute(
                    generator.custom, int(n), int(k), pis, scheme, int(seed)
                )
                if planted is not None:
                    state_manager.set('k', int(k))
                    state_manager.set_dataset("custom", planted.dataset, planted.truth)

    with col2:
        if state_manager.has_dataset():
            data = state_manager.get('dataset')
            frame = pd.DataFrame(data.values, columns=[f"v{j + 1}" for j in range(data.p)])
            truth = state_manager.get('truth')
            if truth is not None:
                frame.insert(0, "class", truth.assign)
            st.dataframe(frame, use_container_width=True, height=320)
            st.download_button("📥 CSVダウンロード", frame.drop(columns=["class"], errors="ignore")
                               .to_csv(index=False), f"{state_manager.get('dataset_name')}.csv", "text/csv")
        else:
            st.info("サイドバーからデータセットを読み込むか、左で生成してください")


def render_run_tab():
    """単発実行タブ"""
    st.subheader("手法を1回実行")
    col1, col2 = st.columns([1, 2])
    with col1:
        method_id = st.selectbox(
            "手法", METHOD_ORDER,
            format_func=lambda m: f"{METHOD_FAMILIES[get_method(m).family]['icon']} {get_method(m).name}"
        )
        method = get_method(method_id)
        st.caption(method.metadata.get('description', ''))
        seed = st.number_input("シード", value=0, step=1, key="run_seed")
        with st.expander("パラメータ", expanded=False):
            params = method.render_parameter_controls()
            state_manager.update_method_params(method_id, params)
        tips = method.metadata.get('tips', [])
        for tip in tips:
            st.caption(f"💡 {tip}")

    with col2:
        if st.button("▶️ 実行", type="primary"):
            ctx = error_handler.safe_execute(current_context)
            if ctx is None:
                return
            with st.spinner(f"{method.name} を実行中..."):
                result = error_handler.safe_execute(
                    method.execute, ctx, int(state_manager.get('k')), int(seed),
                    state_manager.get_method_params(method_id)
                )
            if result is None:
                return
            c1, c2, c3 = st.columns(3)
            c1.metric("W", f"{result.best_w:.4g}" if isinstance(result.best_w, float) else result.best_w)
            c2.metric("反復", result.iterations)
            c3.metric("秒", f"{result.seconds:.3f}")
            truth = state_manager.get('truth')
            if truth is not None and truth.k == result.best_partition.k:
                st.caption(f"正解の分割の W = {within_inertia(truth, ctx)}")
            st.dataframe(pd.DataFrame({"label": result.best_partition.assign}).T,
                         use_container_width=True)
            state_manager.record_run("run", {"method": method_id, "seed": int(seed), "W": result.best_w})


def render_bench_tab():
    """マルチスタート実験タブ"""
    st.subheader("マルチスタート実験")
    col1, col2 = st.columns([1, 2])
    with col1:
        methods = st.multiselect("手法", METHOD_ORDER, default=["SA", "TA", "TS", "PAM", "HC"])
        multistart = st.number_input("実行回数 m", min_value=1, value=10, step=1,
                                     help=f"既定の比較は {BENCH_CONFIG['multistart']} 回")
        base_seed = st.number_input("基準シード", value=BENCH_CONFIG["base_seed"], step=1)
        tol = st.number_input("相対誤差", min_value=0.001, value=BENCH_CONFIG["relative_error_tol"],
                              format="%.3f")
        per_method = st.checkbox("W* を手法ごとに計算")

    with col2:
        if st.button("▶️ 実験を実行", type="primary") and methods:
            data = state_manager.get('dataset')
            config = error_handler.safe_execute(
                ExperimentConfig,
                criterion=state_manager.get('criterion'),
                dissim=state_manager.get('dissim'),
                k=int(state_manager.get('k')),
                methods=tuple(methods),
                multistart=int(multistart),
                base_seed=int(base_seed),
                relative_error_tol=float(tol),
                overrides={m: state_manager.get_method_params(m) for m in methods},
                per_method_w_star=per_method,
            )
            if config is None:
                return
            entry = DatasetEntry(state_manager.get('dataset_name'), data, int(state_manager.get('k')),
                                 state_manager.get('truth'))
            with st.spinner("実行中..."):
                dataset_report = error_handler.safe_execute(run_dataset, config, entry)
            if dataset_report is None:
                return
            report = BenchReport(config=config.to_dict(), config_hash=config.config_hash(),
                                 datasets=[dataset_report])
            state_manager.set('last_report', report)
            state_manager.record_run("bench", {"methods": ",".join(methods), "W*": dataset_report.w_star})

        report = state_manager.get('last_report')
        if report is not None:
            st.metric("W*", report.datasets[0].w_star)
            st.dataframe(report_frame(report), hide_index=True, use_container_width=True)
            st.download_button("📥 JSON", format_report(report, "json"), "bench.json", "application/json")
            st.download_button("📥 CSV", format_report(report, "csv"), "bench.csv", "text/csv")


def render_oracle_tab():
    """厳密解タブ"""
    st.subheader("全列挙による厳密解")
    data = state_manager.get('dataset')
    k = int(state_manager.get('k'))
    if data.n > ORACLE_CONFIG["hard_max_n"]:
        st.warning(f"全列挙は n ≤ {ORACLE_CONFIG['hard_max_n']} のデータに限られます (n={data.n})")
        return
    if 2 <= k < data.n:
        st.caption(f"分割の数 S({data.n}, {k}) = {stirling2(data.n, k):,}")
    allow_large = st.checkbox(f"n > {ORACLE_CONFIG['default_max_n']} を許可")
    k_max = st.number_input("単調性を確認する最大の K", min_value=2, max_value=max(2, data.n - 1),
                            value=min(4, max(2, data.n - 1)), step=1)

    if st.button("▶️ 全列挙", type="primary"):
        ctx = error_handler.safe_execute(current_context)
        if ctx is None:
            return
        with st.spinner("列挙中..."):
            found = error_handler.safe_execute(brute_force_optimum, ctx, k, None, allow_large)
            report = error_handler.safe_execute(verify_monotonicity, ctx, int(k_max), None, allow_large)
        if found is not None:
            partition, w = found
            st.metric("最適な W", w)
            st.dataframe(pd.DataFrame({"label": partition.assign}).T, use_container_width=True)
            state_manager.record_run("oracle", {"k": k, "W": w})
        if report is not None:
            rows = [{"基準": c, "K": kk, "最適 W": w} for c, seq in report.sequences.items() for kk, w in seq]
            st.dataframe(pd.DataFrame(rows), hide_index=True, use_container_width=True)
            if report.holds:
                st.success("最適 W は K について非増加です")
            else:
                st.error("単調性が成り立ちません")


def render_methods_tab():
    """手法の一覧"""
    st.subheader("手法一覧")
    st.dataframe(pd.DataFrame([m.describe() for m in list_methods()]),
                 hide_index=True, use_container_width=True)


def render_main_content():
    """メインコンテンツのレンダリング"""
    st.title(APP_NAME)
    tabs = st.tabs(["🧪 データ生成", "▶️ 単発実行", "📊 マルチスタート", "🔎 厳密解", "📚 手法"])
    with tabs[0]:
        render_generate_tab()
    with tabs[4]:
        render_methods_tab()
    if not state_manager.has_dataset():
        for tab in tabs[1:4]:
            with tab:
                st.info("先にデータセットを読み込んでください")
        return
    with tabs[1]:
        render_run_tab()
    with tabs[2]:
        render_bench_tab()
    with tabs[3]:
        render_oracle_tab()


@error_boundary(message="アプリケーションエラーが発生しました")
def main():
    """メインアプリケーション"""
    initialize_session_state()
    render_sidebar()
    render_main_content()

    st.divider()
    col1, col2 = st.columns(2)
    with col1:
        st.caption(f"{APP_NAME} v{APP_VERSION}")
    with col2:
        st.caption(f"履歴: {len(state_manager.get_recent_history(100))} 件")


if __name__ == "__main__":
    main()

"""
実験結果の出力
表（標準出力向け）、JSON、CSV
"""

import json
from pathlib import Path
from typing import Optional, Union

import pandas as pd

from bench.harness import BenchReport
from config import BENCH_CONFIG
from utils.error_handler import ConfigurationError

CSV_COLUMNS = ["dataset", "w_star", "method", "a_r", "mean_w", "runs", "mean_seconds"]


def report_frame(report: BenchReport) -> pd.DataFrame:
    """データセット×手法ごとに1行の DataFrame"""
    rows = []
    for d in report.datasets:
        for s in d.methods:
            rows.append({
                "dataset": d.name,
                "w_star": d.w_star,
                "method": s.method,
                "a_r": s.attraction_rate,
                "mean_w": s.mean_w,
                "runs": s.runs,
                "mean_seconds": s.mean_seconds if s.error is None else None,
            })
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def _table(report: BenchReport) -> str:
    frame = report_frame(report)
    if frame.empty:
        return "(結果なし)"
    frame["a_r"] = frame["a_r"].map(lambda v: "-" if pd.isna(v) else f"{v:.0%}")
    frame["mean_w"] = frame["mean_w"].map(lambda v: "error" if pd.isna(v) else f"{v:.2f}")
    frame["mean_seconds"] = frame["mean_seconds"].map(lambda v: "" if pd.isna(v) else f"{v:.3f}")
    lines = [frame.to_string(index=False)]
    errors = [f"{d.name} / {s.method}: {s.error}" for d in report.datasets for s in d.methods if s.error]
    if errors:
        lines.append("")
        lines.extend(errors)
    return "\n".join(lines)


def format_report(report: BenchReport, fmt: str = "table", include_meta: bool = True) -> str:
    """
    結果を文字列に整形

    Args:
        report: 実験結果
        fmt: table / json / csv
        include_meta: JSON に時刻などの "meta" を含めるか

    Returns:
        整形済みの文字列
    """
    if fmt not in BENCH_CONFIG["formats"]:
        raise ConfigurationError(
            f"未知の出力形式です: {fmt} (使用可能: {', '.join(BENCH_CONFIG['formats'])})"
        )
    if fmt == "json":
        payload = {"report": report.body()}
        if include_meta:
            payload["meta"] = report.meta()
        return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False)
    if fmt == "csv":
        return report_frame(report).to_csv(index=False)
    return _table(report)


def write_report(report: BenchReport, path: Union[str, Path], fmt: Optional[str] = None) -> Path:
    """結果をファイルに書き出す（形式は省略時に拡張子から決める）"""
    path = Path(path)
    if fmt is None:
        fmt = {".json": "json", ".csv": "csv"}.get(path.suffix.lower(), "table")
    path.write_text(format_report(report, fmt), encoding="utf-8")
    return path

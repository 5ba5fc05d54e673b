"""
コマンドラインインターフェース

    python cli.py generate --builtin 1 --out table01.csv
    python cli.py run --builtin 1 --method SA --seed 3 --sa.chi0 0.9
    python cli.py bench --builtin 1,3 --methods SA,TS,HC --multistart 25 --format json
    python cli.py oracle --data small.csv --k 2 --monotonicity 4

手法ごとのパラメータは --<手法>.<名前> <値> で上書きする（例: --ts.tabu-len 7）。
設定の誤りは終了コード2、実行時の失敗は1で終了する。
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from bench.harness import ExperimentConfig, run_experiment
from bench.report import format_report
from config import APP_NAME, BENCH_CONFIG, DATAGEN_CONFIG, METHOD_ORDER, ORACLE_CONFIG
from core.criteria import CriterionKind, build_context
from core.dataset_io import read_dataset_csv, write_dataset_csv, write_labels
from core.model import BinaryDataset, DissimilarityKind, Partition
from core.oracle import brute_force_optimum, verify_monotonicity
from heuristics import get_method
from utils.error_handler import (
    ClusteringError,
    ConfigurationError,
    MethodRunError,
    ParameterError,
    get_logger,
    set_log_level,
)
from utils.sample_data import CardinalityScheme, GeneratorSpec, builtin_spec, generate

logger = get_logger("binclust.cli")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def parse_overrides(extra: Sequence[str]) -> Dict[str, Dict[str, str]]:
    """
    --sa.chi0 0.9 / --ts.tabu-len=7 形式の引数を手法ごとの辞書にする

    Raises:
        ConfigurationError: 解釈できない引数
    """
    overrides: Dict[str, Dict[str, str]] = {}
    tokens = list(extra)
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith("--") or "." not in token:
            raise ConfigurationError(f"解釈できない引数です: {token}")
        key = token[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ConfigurationError(f"{token} に値がありません")
            value = tokens[i + 1]
            i += 2
        method, name = key.split(".", 1)
        method = method.upper()
        if method not in METHOD_ORDER:
            raise ConfigurationError(f"未知の手法です: {method} (使用可能: {', '.join(METHOD_ORDER)})")
        overrides.setdefault(method, {})[name] = value
    return overrides


def parse_builtins(text: Optional[str]) -> Tuple[int, ...]:
    """"1,3,5" や "all" を組み込み表の番号にする"""
    if not text:
        return ()
    if text.strip().lower() == "all":
        return tuple(range(1, DATAGEN_CONFIG["builtin_count"] + 1))
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as e:
        raise ConfigurationError(f"組み込み表の番号が不正です: {text}") from e


def _add_data_arguments(parser: argparse.ArgumentParser, multiple: bool = False) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--data", help="0/1のCSVファイル")
    source.add_argument(
        "--builtin",
        help="組み込み表の番号 1..16" + ("（カンマ区切り、all で全て）" if multiple else ""),
    )
    parser.add_argument("--p", type=int, default=DATAGEN_CONFIG["default_p"], help="組み込み表の変数の数")
    parser.add_argument("--data-seed", type=int, default=DATAGEN_CONFIG["default_seed"],
                        help="組み込み表の基準シード")
    parser.add_argument("--k", type=int, help="クラス数（組み込み表では省略可）")
    parser.add_argument("--criterion", choices=[c.value for c in CriterionKind],
                        default=CriterionKind.L1_MEDIAN.value, help="クラス内異質性 δ")
    parser.add_argument("--dissim", choices=[d.value for d in DissimilarityKind],
                        default=DissimilarityKind.L1.value, help="非類似度")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="binclust", description=APP_NAME)
    parser.add_argument("--verbose", "-v", action="store_true", help="DEBUGログを出力")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="埋め込み分割データを生成")
    gen.add_argument("--builtin", type=int, help="組み込み表の番号 1..16")
    gen.add_argument("--n", type=int, help="対象数")
    gen.add_argument("--k", type=int, help="クラス数")
    gen.add_argument("--pis", help="クラスごとの π（カンマ区切り）")
    gen.add_argument("--scheme", choices=[s.value for s in CardinalityScheme],
                     default=CardinalityScheme.EQUAL.value, help="クラスの大きさの決め方")
    gen.add_argument("--p", type=int, default=DATAGEN_CONFIG["default_p"], help="変数の数")
    gen.add_argument("--seed", type=int, default=DATAGEN_CONFIG["default_seed"], help="乱数シード")
    gen.add_argument("--out", help="出力CSVのパス（既定: <表名>.csv）")

    run = sub.add_parser("run", help="1つの手法を1回実行")
    _add_data_arguments(run)
    run.add_argument("--method", required=True, help=f"手法ID ({', '.join(METHOD_ORDER)})")
    run.add_argument("--seed", type=int, default=BENCH_CONFIG["base_seed"], help="乱数シード")
    run.add_argument("--out", help="クラスラベルの出力先")

    bench = sub.add_parser("bench", help="マルチスタート実験")
    _add_data_arguments(bench, multiple=True)
    bench.add_argument("--methods", default=",".join(METHOD_ORDER), help="手法ID（カンマ区切り）")
    bench.add_argument("--multistart", type=int, default=BENCH_CONFIG["multistart"], help="実行回数 m")
    bench.add_argument("--seed", type=int, default=BENCH_CONFIG["base_seed"], help="基準シード")
    bench.add_argument("--tol", type=float, default=BENCH_CONFIG["relative_error_tol"],
                       help="誘引率の相対誤差")
    bench.add_argument("--format", choices=BENCH_CONFIG["formats"], default="table", help="出力形式")
    bench.add_argument("--out", help="結果の出力先（省略時は標準出力）")
    bench.add_argument("--per-method-w-star", action="store_true", help="W* を手法ごとに計算")
    bench.add_argument("--workers", type=int, help="並列ワーカー数（既定は環境変数）")

    oracle = sub.add_parser("oracle", help="全列挙による厳密解")
    _add_data_arguments(oracle)
    oracle.add_argument("--monotonicity", type=int, metavar="K_MAX",
                        help="K = 2..K_MAX の最適 W の単調性も確認")
    oracle.add_argument("--max-n", type=int, default=ORACLE_CONFIG["default_max_n"], help="対象数の上限")
    oracle.add_argument("--allow-large", action="store_true",
                        help=f"n ≤ {ORACLE_CONFIG['hard_max_n']} まで許可")
    oracle.add_argument("--out", help="JSONの出力先")
    return parser


def _load_single(args) -> Tuple[str, BinaryDataset, int, Optional[Partition]]:
    if args.data:
        if args.k is None:
            raise ConfigurationError("--data を使う場合は --k が必要です")
        return Path(args.data).stem, read_dataset_csv(args.data), args.k, None
    builtins = parse_builtins(args.builtin)
    if len(builtins) != 1:
        raise ConfigurationError("このコマンドでは組み込み表を1つだけ指定してください")
    planted = generate(builtin_spec(builtins[0], args.p, args.data_seed))
    k = args.k if args.k is not None else planted.spec.k
    return planted.spec.name, planted.dataset, k, planted.truth


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
        logger.info(f"書き出しました: {out}")
    else:
        print(text)


def cmd_generate(args, overrides) -> int:
    if args.builtin is not None:
        spec = builtin_spec(args.builtin, args.p, args.seed)
    else:
        if args.n is None or args.k is None or not args.pis:
            raise ConfigurationError("--builtin か、--n --k --pis の組を指定してください")
        try:
            pis = tuple(float(x) for x in args.pis.split(","))
        except ValueError as e:
            raise ConfigurationError(f"--pis が不正です: {args.pis}") from e
        spec = GeneratorSpec(n=args.n, p=args.p, k=args.k, scheme=args.scheme,
                             pis=pis, seed=args.seed, name="custom")
    planted = generate(spec)

    out = Path(args.out or f"{spec.name}.csv")
    write_dataset_csv(planted.dataset, out)
    truth_path = out.with_name(f"{out.stem}.truth.csv")
    write_labels(planted.truth, truth_path)
    spec_path = out.with_name(f"{out.stem}.spec.json")
    spec_path.write_text(json.dumps(spec.to_dict(), indent=2, ensure_ascii=False), encoding="utf-8")
    print(f"{out} (n={spec.n}, p={spec.p}, K={spec.k}) / {truth_path} / {spec_path}")
    return EXIT_OK


def cmd_run(args, overrides) -> int:
    name, data, k, _ = _load_single(args)
    method = get_method(args.method)
    ctx = build_context(data, CriterionKind(args.criterion), DissimilarityKind(args.dissim))
    try:
        result = method.execute(ctx, k, args.seed, overrides.get(method.id))
    except ClusteringError:
        raise
    except Exception as e:
        raise MethodRunError(method.id, 0, e) from e

    print(f"dataset={name} method={method.id} seed={args.seed} K={k}")
    print(f"W={result.best_w} iterations={result.iterations} accepted={result.accepted} "
          f"seconds={result.seconds:.3f}")
    if result.escapes:
        print(f"escapes={result.escapes}")
    if args.out:
        write_labels(result.best_partition, args.out)
        logger.info(f"クラスラベルを書き出しました: {args.out}")
    return EXIT_OK


def cmd_bench(args, overrides) -> int:
    config = ExperimentConfig(
        data_path=args.data,
        builtins=parse_builtins(args.builtin),
        p=args.p,
        data_seed=args.data_seed,
        criterion=args.criterion,
        dissim=args.dissim,
        k=args.k,
        methods=tuple(m for m in args.methods.split(",") if m.strip()),
        multistart=args.multistart,
        base_seed=args.seed,
        relative_error_tol=args.tol,
        overrides=overrides,
        per_method_w_star=args.per_method_w_star,
        workers=args.workers,
    )
    report = run_experiment(config)
    _emit(format_report(report, args.format), args.out)
    failed = any(s.error for d in report.datasets for s in d.methods)
    return EXIT_FAILURE if failed else EXIT_OK


def cmd_oracle(args, overrides) -> int:
    name, data, k, _ = _load_single(args)
    ctx = build_context(data, CriterionKind(args.criterion), DissimilarityKind(args.dissim))
    partition, w = brute_force_optimum(ctx, k, args.max_n, args.allow_large)
    payload: Dict[str, Any] = {
        "dataset": name,
        "criterion": ctx.kind.value,
        "k": k,
        "w": w,
        "labels": partition.assign.tolist(),
    }
    if args.monotonicity is not None:
        payload["monotonicity"] = verify_monotonicity(
            ctx, args.monotonicity, args.max_n, args.allow_large
        ).to_dict()
    _emit(json.dumps(payload, indent=2, ensure_ascii=False), args.out)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "run": cmd_run,
    "bench": cmd_bench,
    "oracle": cmd_oracle,
}

CONFIG_ERRORS = (ConfigurationError, ParameterError)


def _is_config_error(error: BaseException) -> bool:
    if isinstance(error, MethodRunError):
        return isinstance(error.cause, CONFIG_ERRORS)
    return isinstance(error, (ClusteringError, FileNotFoundError))


def main(argv: Optional[List[str]] = None) -> int:
    """
    エントリーポイント

    Returns:
        終了コード
    """
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    if args.verbose:
        set_log_level(logging.DEBUG)

    try:
        overrides = parse_overrides(extra)
        return COMMANDS[args.command](args, overrides)
    except Exception as e:
        print(f"binclust: error: {e}", file=sys.stderr)
        if args.verbose:
            logger.exception("Error occurred")
        return EXIT_CONFIG if _is_config_error(e) else EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

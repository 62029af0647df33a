"""
葉層 germ の分類ツールのメインモジュール
"""
import argparse
import logging
import os
import sys
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .battery import run_battery
from .classifier import UNKNOWN, classify_2d, conjectured_equivalent_nd, equivalent_2d
from .config import get_config, load_config
from .errors import FoliationError, ProfileAmbiguousError, RationalityUndecidedError
from .germ import GermPoly, germ_to_json, load_germ
from .normal_form import canonical_form_2d, poincare_dulac
from .reporter import (build_verdict, dumps_verdict, eigenvalue_json, equivalence_json, generate_battery_report,
                       nd_verdict_json, normal_form_json, resonance_json, save_report, save_trajectory_csv)
from .resonance import enumerate_resonances, resonance_bound
from .spectral import eigenvalues, linear_part, spectrum
from .sphere_trace import orientation_self_test, trace_leaf, trace_report

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNDECIDED = 2

logger = logging.getLogger(__name__)

# (結果の文書, 終了コード)
Outcome = Tuple[Dict[str, Any], int]


def parse_args(args: Optional[List[str]] = None) -> argparse.Namespace:
    """
    コマンドライン引数をパースする

    Args:
        args (Optional[List[str]]): 引数。指定しない場合は sys.argv

    Returns:
        argparse.Namespace: パースされた引数
    """
    parser = argparse.ArgumentParser(prog='foliationgerms', description='Poincaré 型の葉層 germ の位相的分類ツール')
    parser.add_argument('-c', '--config', help='設定ファイルのパス')
    parser.add_argument('-v', '--verbose', action='store_true', help='デバッグログを出力する')
    parser.add_argument('-o', '--output', help='JSON の出力先 (デフォルト: 標準出力)')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('classify', help='2 次元の germ の同値類を判定する')
    p.add_argument('germ')

    p = sub.add_parser('equiv', help='2 つの 2 次元 germ が位相同値かを判定する')
    p.add_argument('germ1')
    p.add_argument('germ2')

    p = sub.add_parser('resonances', help='共鳴を列挙する')
    p.add_argument('germ')

    p = sub.add_parser('normal-form', help='Poincaré–Dulac 正規形を計算する')
    p.add_argument('germ')
    p.add_argument('--degree', type=int, help='打ち切り次数')

    p = sub.add_parser('trace', help='球面上の交差葉層の葉をトレースする')
    p.add_argument('germ')
    p.add_argument('--start', required=True, help='開始点 (re1,im1,re2,im2,...)')
    p.add_argument('--tmax', type=float, help='トレースの長さ')
    p.add_argument('--tol', type=float, help='局所誤差許容値')
    p.add_argument('--backward', action='store_true', help='後ろ向きにトレースする')
    p.add_argument('--out', help='軌道の CSV の出力先')

    p = sub.add_parser('invariants', help='不変量バッテリーを実行する')
    p.add_argument('germ')
    p.add_argument('--report', help='Markdown の表の出力先')
    p.add_argument('--workers', type=int, help='並列ワーカー数')
    p.add_argument('--m', type=int, help='頂点の残差に使う m')
    p.add_argument('--seed', type=int, help='乱数の種')
    p.add_argument('--starts', type=int, help='開始点の数')
    p.add_argument('--tmax', type=float, help='トレースの長さ')

    p = sub.add_parser('nd-equiv', help='n 次元の germ の位相同値性を予想に基づいて判定する')
    p.add_argument('germ1')
    p.add_argument('germ2')

    return parser.parse_args(args)


def parse_start(text: str, n: int) -> np.ndarray:
    """
    're1,im1,re2,im2,...' を複素ベクトルにする

    Raises:
        ValueError: 成分の数が 2n でない場合
    """
    values = [float(v) for v in text.split(',')]
    if len(values) != 2 * n:
        raise ValueError(f"開始点には {2 * n} 個の数が必要です: {text}")
    return np.array(values[0::2]) + 1j * np.array(values[1::2])


def cmd_classify(parsed: argparse.Namespace, germ: GermPoly) -> Outcome:
    try:
        cls = classify_2d(germ)
    except RationalityUndecidedError as e:
        result = {"class": None, "undecided": {"value": e.value, "witness": list(e.witness), "error": e.error}}
        return build_verdict('classify', vars(parsed), [germ], result), EXIT_UNDECIDED
    form = canonical_form_2d(germ)
    result = cls.to_json()
    result["canonical_form"] = {"kind": form.kind, "swapped": form.swapped, "germ": germ_to_json(form.germ)}
    return build_verdict('classify', vars(parsed), [germ], result, {"path": form.path}), EXIT_OK


def cmd_resonances(parsed: argparse.Namespace, germ: GermPoly) -> Outcome:
    eigs = eigenvalues(linear_part(germ))
    found = enumerate_resonances(eigs)
    spec = spectrum(germ)
    result = {
        "eigenvalues": [eigenvalue_json(v) for v in eigs],
        "c": float(spec.c),
        "bound": resonance_bound(eigs),
        "resonances": [resonance_json(r) for r in found],
    }
    return build_verdict('resonances', vars(parsed), [germ], result, {"path": spec.path}), EXIT_OK


def cmd_normal_form(parsed: argparse.Namespace, germ: GermPoly) -> Outcome:
    nf = poincare_dulac(germ, parsed.degree)
    return build_verdict('normal-form', vars(parsed), [germ], normal_form_json(nf), {"path": nf.path}), EXIT_OK


def cmd_trace(parsed: argparse.Namespace, germ: GermPoly) -> Outcome:
    orientation_self_test()
    config = get_config()
    start = parse_start(parsed.start, germ.dimension)
    t_max = config.get_t_max() if parsed.tmax is None else parsed.tmax
    step_tol = config.get_step_tol() if parsed.tol is None else parsed.tol
    traj = trace_leaf(germ, start, t_max, step_tol, backward=parsed.backward)
    if parsed.out:
        save_trajectory_csv(traj, parsed.out)
        print(f"軌道を保存しました: {parsed.out}", file=sys.stderr)
    result = {
        "report": trace_report(traj).to_json(),
        "samples": len(traj.times),
        "t_range": [float(traj.times[0]), float(traj.times[-1])],
        "csv": parsed.out,
    }
    numerics = {"step_tol": step_tol, "t_max": t_max, "backward": parsed.backward}
    return build_verdict('trace', vars(parsed), [germ], result, numerics), EXIT_OK


def cmd_invariants(parsed: argparse.Namespace, germ: GermPoly) -> Outcome:
    orientation_self_test()
    config = get_config()
    seed = config.get_seed() if parsed.seed is None else parsed.seed
    workers = config.get_workers() if parsed.workers is None else parsed.workers
    result = run_battery(germ, starts=parsed.starts, seed=seed, t_max=parsed.tmax, workers=workers, m=parsed.m)
    if parsed.report:
        title = os.path.splitext(os.path.basename(parsed.germ))[0]
        save_report(generate_battery_report(result, title), parsed.report)
        print(f"レポートを保存しました: {parsed.report}", file=sys.stderr)
    numerics = {"seed": seed, "workers": workers, "t_max": result.t_max}
    code = EXIT_OK if result.consistent else EXIT_UNDECIDED
    return build_verdict('invariants', vars(parsed), [germ], result.to_json(), numerics), code


def cmd_equiv(parsed: argparse.Namespace, g1: GermPoly, g2: GermPoly) -> Outcome:
    result = equivalent_2d(g1, g2)
    code = EXIT_UNDECIDED if result.equivalent is None else EXIT_OK
    return build_verdict('equiv', vars(parsed), [g1, g2], equivalence_json(result)), code


def cmd_nd_equiv(parsed: argparse.Namespace, g1: GermPoly, g2: GermPoly) -> Outcome:
    verdict = conjectured_equivalent_nd(g1, g2)
    code = EXIT_UNDECIDED if verdict.result == UNKNOWN else EXIT_OK
    return build_verdict('nd-equiv', vars(parsed), [g1, g2], nd_verdict_json(verdict)), code


SINGLE: Dict[str, Callable[[argparse.Namespace, GermPoly], Outcome]] = {
    'classify': cmd_classify,
    'resonances': cmd_resonances,
    'normal-form': cmd_normal_form,
    'trace': cmd_trace,
    'invariants': cmd_invariants,
}
PAIR: Dict[str, Callable[[argparse.Namespace, GermPoly, GermPoly], Outcome]] = {
    'equiv': cmd_equiv,
    'nd-equiv': cmd_nd_equiv,
}


def main(args: Optional[List[str]] = None) -> int:
    """
    メイン関数

    Args:
        args (Optional[List[str]], optional): コマンドライン引数。指定しない場合は sys.argv が使用される。

    Returns:
        int: 終了コード (0: 判定済み, 1: エラー, 2: 判定不能)
    """
    try:
        parsed_args = parse_args(args)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_ERROR

    logging.basicConfig(level=logging.DEBUG if parsed_args.verbose else logging.INFO,
                        format='%(levelname)s: %(message)s')

    try:
        # 設定ファイルが指定されている場合、存在するか確認
        if parsed_args.config and not os.path.exists(parsed_args.config):
            print(f"エラー: 設定ファイルが見つかりません: {parsed_args.config}", file=sys.stderr)
            return EXIT_ERROR
        load_config(parsed_args.config)

        if parsed_args.command in PAIR:
            g1, g2 = load_germ(parsed_args.germ1), load_germ(parsed_args.germ2)
            document, code = PAIR[parsed_args.command](parsed_args, g1, g2)
        else:
            germ = load_germ(parsed_args.germ)
            document, code = SINGLE[parsed_args.command](parsed_args, germ)

        if parsed_args.output:
            with open(parsed_args.output, 'w', encoding='utf-8') as f:
                f.write(dumps_verdict(document))
            print(f"結果を保存しました: {parsed_args.output}", file=sys.stderr)
        else:
            sys.stdout.write(dumps_verdict(document))
        return code

    except (RationalityUndecidedError, ProfileAmbiguousError) as e:
        print(f"エラー: {e}", file=sys.stderr)
        return EXIT_UNDECIDED
    except (FoliationError, OSError, ValueError) as e:
        print(f"エラー: {e}", file=sys.stderr)
        logger.debug("例外の詳細", exc_info=True)
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())

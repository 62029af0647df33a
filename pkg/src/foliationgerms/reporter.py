"""
判定結果を JSON・CSV・Markdown の表として出力するモジュール
"""
import csv
import hashlib
import json
import math
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from sympy import QQ_I

from .battery import BatteryResult, StartRow
from .classifier import EquivalenceResult, NdVerdict
from .config import get_config
from .germ import GermPoly, germ_to_json, serialize_germ
from .normal_form import NormalFormResult
from .resonance import Resonance
from .spectral import ALGEBRAIC_PATH, to_complex, value_kind
from .sphere_trace import Trajectory


def germ_digest(germ: GermPoly) -> str:
    """
    germ の正規化した JSON テキストの sha256
    """
    return hashlib.sha256(serialize_germ(germ).encode('utf-8')).hexdigest()


def eigenvalue_json(value) -> Dict[str, Any]:
    """
    固有値を JSON に変換する (厳密な場合は式も出力する)
    """
    z = to_complex(value)
    data: Dict[str, Any] = {"re": z.real, "im": z.imag, "kind": value_kind(value)}
    if QQ_I.of_type(value):
        data["expr"] = str(QQ_I.to_sympy(value))
    elif data["kind"] == ALGEBRAIC_PATH:
        data["expr"] = str(value)
    return data


def _clean(value):
    """JSON に書けない値 (numpy の型・非有限の浮動小数点数・Fraction) を変換する"""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": _clean(value.real), "im": _clean(value.imag)}
    return value


def build_verdict(command: str, arguments: Dict[str, Any], germs: Sequence[GermPoly], result: Dict[str, Any],
                  numerics: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    出力文書 (コマンド・入力の digest・結果・数値計算の記録) を組み立てる

    Args:
        command (str): サブコマンド名
        arguments (Dict[str, Any]): コマンドライン引数
        germs (Sequence[GermPoly]): 入力の germ
        result (Dict[str, Any]): 結果
        numerics (Optional[Dict[str, Any]]): 経路や種など、許容誤差以外の数値計算の記録

    Returns:
        Dict[str, Any]: 出力文書
    """
    record = {"tolerances": get_config().tolerances()}
    record.update(numerics or {})
    return _clean({
        "command": command,
        "arguments": arguments,
        "inputs": [{"n": germ.dimension, "sha256": germ_digest(germ)} for germ in germs],
        "result": result,
        "numerics": record,
    })


def dumps_verdict(document: Dict[str, Any]) -> str:
    """
    出力文書を決定的な JSON テキストにする (キーは整列)
    """
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def save_verdict(document: Dict[str, Any], output_path: str) -> None:
    with open(output_path, 'w', encoding='utf-8') as f:
        f.write(dumps_verdict(document))


def equivalence_json(result: EquivalenceResult) -> Dict[str, Any]:
    return {
        "equivalent": result.equivalent,
        "certificate": list(result.certificate),
        "classes": [None if cls is None else cls.to_json() for cls in result.classes],
    }


def nd_verdict_json(verdict: NdVerdict) -> Dict[str, Any]:
    return {"verdict": verdict.result, "reasons": list(verdict.reasons)}


def resonance_json(resonance: Resonance) -> Dict[str, Any]:
    return {
        "component": resonance.target + 1,
        "m": list(resonance.m),
        "order": resonance.order,
        "trivial": resonance.trivial,
        "essential": resonance.essential,
        "defect": resonance.defect,
    }


def normal_form_json(result: NormalFormResult) -> Dict[str, Any]:
    return {
        "degree": result.degree,
        "path": result.path,
        "eigenvalues": [eigenvalue_json(v) for v in result.eigenvalues],
        "normal": germ_to_json(result.normal),
        "change": {"forward": germ_to_json(result.change.forward), "inverse": germ_to_json(result.change.inverse)},
        "resonant_support": [{"component": i + 1, "exponents": list(exps)} for i, exps in result.resonant_support],
    }


def trajectory_header(n: int) -> List[str]:
    """
    軌道の CSV のヘッダー t,re_z1,im_z1,...,arg1,...,abs1,...
    """
    header = ["t"]
    for k in range(1, n + 1):
        header += [f"re_z{k}", f"im_z{k}"]
    header += [f"arg{k}" for k in range(1, n + 1)]
    header += [f"abs{k}" for k in range(1, n + 1)]
    return header


def trajectory_rows(traj: Trajectory) -> List[List[str]]:
    """
    受理したステップごとに 1 行 (浮動小数点数は repr で書く)
    """
    rows = []
    for t, z, args, radii in zip(traj.times, traj.points, traj.args, traj.radii):
        row = [repr(float(t))]
        for value in z:
            row += [repr(float(value.real)), repr(float(value.imag))]
        row += [repr(float(a)) for a in args]
        row += [repr(float(r)) for r in radii]
        rows.append(row)
    return rows


def save_trajectory_csv(traj: Trajectory, output_path: str) -> None:
    """
    軌道を CSV ファイルに保存する
    """
    with open(output_path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(trajectory_header(traj.n))
        writer.writerows(trajectory_rows(traj))


def _fmt(value: Optional[float], spec: str = '.6g') -> str:
    if value is None:
        return "-"
    return format(value, spec)


def format_table_row(row: StartRow) -> str:
    """
    表の行をフォーマットする

    Args:
        row (StartRow): 開始点ごとの結果

    Returns:
        str: フォーマットされた表の行
    """
    start = ", ".join(f"{v.real:+.4f}{v.imag:+.4f}i" for v in row.start)
    closed = "閉" if row.closed else "開"
    windings = "-" if row.windings is None else ",".join("?" if w is None else str(w) for w in row.windings)
    return (f"| {row.index:<4} | {start:<36} | {closed:<4} | {windings:<8} | {row.profile or '-':<10} "
            f"| {_fmt(row.slope):<10} | {_fmt(row.apex_residual, '.3e'):<10} | {_fmt(row.margin, '.3e'):<10} |")


def generate_table_header() -> str:
    """
    表のヘッダーを生成する

    Returns:
        str: 表のヘッダー
    """
    header = ("| 番号 | 開始点                               | 閉包 | 巻き数   | プロファイル | 傾き       "
              "| 頂点の残差 | 横断性     |")
    separator = ("|------|--------------------------------------|------|----------|------------|------------"
                 "|------------|------------|")
    return f"{header}\n{separator}"


def generate_battery_report(result: BatteryResult, title: str) -> List[str]:
    """
    バッテリーの結果からレポートの行 (表のヘッダー除く) を生成する

    Args:
        result (BatteryResult): バッテリーの結果
        title (str): 見出し

    Returns:
        List[str]: 見出し・概要・表の行
    """
    lines = [f"# {title}", "",
             f"- 同値類: {result.equiv_class.label()}",
             f"- 予想: 閉じた葉 {result.signature['closed_leaves']}, プロファイル {result.signature['profile']}",
             f"- 閉じた葉: {result.closed_count} / {len(result.rows)}",
             f"- 種: {result.seed}, 長さ: {result.t_max}"]
    for axis, estimate in sorted(result.holonomy.items()):
        if estimate is None:
            lines.append(f"- ホロノミー ({axis}): {result.holonomy_notes.get(axis, '-')}")
        else:
            lines.append(f"- ホロノミー ({axis}): {estimate.multiplier:.6g} (位数 {estimate.order or '-'})")
    lines.append(f"- 予想との一致: {'一致' if result.consistent else '不一致'}")
    lines += [f"  - {mismatch}" for mismatch in result.mismatches]
    lines.append("")
    lines += [format_table_row(row) for row in result.rows]
    return lines


def save_report(lines: List[str], output_path: str) -> None:
    """
    レポートをファイルに保存する (表のヘッダー行をこのタイミングで追加)

    Args:
        lines (List[str]): 見出し・概要・表の行
        output_path (str): 出力ファイルのパス
    """
    first_row = next((i for i, line in enumerate(lines) if line.startswith("| ")), len(lines))
    content = "\n".join(lines[:first_row] + [generate_table_header()] + lines[first_row:])
    with open(output_path, 'w', encoding='utf-8') as f:
        f.write(content + "\n")

"""
不変量バッテリー

2 次元の germ を分類し、標準形のモデル germ を球面上でトレースして
閉じた葉・プロファイル・傾き・頂点・ホロノミー・横断性を調べ、同値類から予想される性質と照合する。
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .classifier import GENERIC, IRRATIONAL, RATIONAL, RESONANT, EquivClass2D, class_signature, classify_2d
from .config import get_config
from .errors import FoliationError, NoApexError, ProfileAmbiguousError
from .germ import GermPoly
from .normal_form import canonical_form_2d
from .resonant_leaf import resonant_apex
from .sphere_trace import (CONSTANT, MONOTONE, UNIQUE_MAX, HolonomyEstimate, TraceReport, Trajectory,
                           disk_transversality_margin, extended_slope_estimate, holonomy_estimate, trace_many,
                           trace_report)

logger = logging.getLogger(__name__)

HOLONOMY_DISK_RADIUS = 1e-2
HOLONOMY_T_MAX = 200.0


def sphere_starts(n: int, count: int, seed: Optional[int] = None, axis_reject: Optional[float] = None) -> np.ndarray:
    """
    S^{2n-1} 上の一様な乱数の点 (どの座標も絶対値が axis_reject 以上)

    Args:
        n (int): 次元
        count (int): 点の数
        seed (Optional[int]): 乱数の種
        axis_reject (Optional[float]): 座標の絶対値の下限

    Returns:
        np.ndarray: 形状 (count, n) の複素配列
    """
    config = get_config()
    seed = config.get_seed() if seed is None else seed
    axis_reject = config.get_axis_reject() if axis_reject is None else axis_reject
    rng = np.random.default_rng(seed)
    points: List[np.ndarray] = []
    while len(points) < count:
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        z /= np.linalg.norm(z)
        if np.all(np.abs(z) >= axis_reject):
            points.append(z)
    return np.array(points, dtype=complex).reshape(count, n)


@dataclass
class StartRow:
    """
    開始点ごとの結果

    Attributes:
        index (int): 開始点の番号
        start (np.ndarray): 開始点
        closed (bool): 葉が閉じているか
        windings (Optional[tuple]): 閉じている場合の巻き数
        period (Optional[float]): 閉じている場合の周期
        profile (Optional[str]): 半径のプロファイル
        slope (Optional[float]): 傾きの推定値
        apex_residual (Optional[float]): 共鳴型の頂点の残差
        margin (float): 横断性の余裕
        margin_bound (Optional[float]): 共鳴型での余裕の下界 1 - max|x||y|^m
    """
    index: int
    start: np.ndarray
    closed: bool
    windings: Optional[tuple] = None
    period: Optional[float] = None
    profile: Optional[str] = None
    slope: Optional[float] = None
    apex_residual: Optional[float] = None
    margin: float = 0.0
    margin_bound: Optional[float] = None

    def to_json(self) -> Dict:
        return {
            "index": self.index,
            "start": [{"re": float(v.real), "im": float(v.imag)} for v in self.start],
            "closed": self.closed,
            "windings": None if self.windings is None else list(self.windings),
            "period": self.period,
            "profile": self.profile,
            "slope": self.slope,
            "apex_residual": self.apex_residual,
            "margin": self.margin,
            "margin_bound": self.margin_bound,
        }


@dataclass
class BatteryResult:
    """
    バッテリーの結果

    Attributes:
        equiv_class (EquivClass2D): 同値類
        signature (Dict[str, str]): 同値類から予想される性質
        rows (List[StartRow]): 開始点ごとの結果
        holonomy (Dict[str, Optional[HolonomyEstimate]]): 軸ごとのホロノミー
        holonomy_notes (Dict[str, str]): ホロノミーを求められなかった理由
        disk_margins (Dict[str, float]): ホロノミーの横断円板の横断性の余裕
        consistent (bool): 数値結果が予想と一致したか
        mismatches (List[str]): 一致しなかった項目
        seed (int): 乱数の種
        t_max (float): トレースの長さ
    """
    equiv_class: EquivClass2D
    signature: Dict[str, str]
    rows: List[StartRow]
    holonomy: Dict[str, Optional[HolonomyEstimate]]
    holonomy_notes: Dict[str, str]
    disk_margins: Dict[str, float]
    consistent: bool
    mismatches: List[str] = field(default_factory=list)
    seed: int = 0
    t_max: float = 0.0

    @property
    def closed_count(self) -> int:
        return sum(1 for row in self.rows if row.closed)

    def to_json(self) -> Dict:
        return {
            "class": self.equiv_class.to_json(),
            "signature": dict(self.signature),
            "starts": [row.to_json() for row in self.rows],
            "census": {"closed": self.closed_count, "not_closed": len(self.rows) - self.closed_count},
            "holonomy": {axis: None if estimate is None else estimate.to_json()
                         for axis, estimate in sorted(self.holonomy.items())},
            "holonomy_notes": dict(self.holonomy_notes),
            "disk_margins": dict(self.disk_margins),
            "consistent": self.consistent,
            "mismatches": list(self.mismatches),
            "seed": self.seed,
            "t_max": self.t_max,
        }


def _expected_profile(cls: EquivClass2D) -> str:
    return {GENERIC: MONOTONE, RATIONAL: CONSTANT, IRRATIONAL: CONSTANT, RESONANT: UNIQUE_MAX}[cls.tag]


def _expected_slope(cls: EquivClass2D) -> Optional[float]:
    """標準形のモデル (x 座標が λ >= 1 の側) で予想される傾き"""
    if cls.tag == RATIONAL:
        return cls.p / cls.q
    if cls.tag == IRRATIONAL:
        return float(cls.value)
    return None


def _row_slope(traj: Trajectory, report: TraceReport, min_crossings: int) -> Optional[float]:
    """
    開始点の傾き

    閉じた葉では 1 周期の巻き数の比を使い、閉じていなければ交差回数が揃うまでトレースを延ばして推定する。
    """
    if report.slope_estimate is not None:
        return report.slope_estimate
    if report.closure.closed:
        windings = report.closure.windings
        return windings[0] / windings[1]
    try:
        return extended_slope_estimate(traj, min_crossings)[0]
    except FoliationError as e:
        logger.warning(f"傾きを推定できません: {e}")
        return None


def _check_rows(cls: EquivClass2D, rows: List[StartRow], axis_row: Optional[int],
                min_crossings: Optional[int] = None) -> List[str]:
    """
    数値結果と同値類から予想される性質を照合し、一致しなかった項目を返す

    傾きは |傾き - λ| < 1 / min_crossings (既定の 100 回では 1e-2) を要求する。
    """
    signature = class_signature(cls)
    required = get_config().get_min_crossings() if min_crossings is None else min_crossings
    expected_slope = _expected_slope(cls)
    mismatches = []
    for row in rows:
        on_axis = row.index == axis_row
        expected_closed = signature["closed_leaves"] == "all" or on_axis
        if row.closed != expected_closed:
            mismatches.append(f"開始点 {row.index}: 閉じた葉の判定が予想と異なります ({row.closed})")
        if not on_axis and row.profile != _expected_profile(cls):
            mismatches.append(f"開始点 {row.index}: プロファイル {row.profile} (予想 {_expected_profile(cls)})")
        if expected_slope is not None and not on_axis:
            if row.slope is None:
                mismatches.append(f"開始点 {row.index}: 傾きを推定できませんでした (予想 {expected_slope:.6g})")
            elif abs(row.slope - expected_slope) >= 1 / required:
                mismatches.append(f"開始点 {row.index}: 傾き {row.slope:.6g} (予想 {expected_slope:.6g})")
        if row.margin_bound is not None and row.margin < row.margin_bound - 1e-6:
            mismatches.append(f"開始点 {row.index}: 横断性の余裕 {row.margin:.3e} が下界 {row.margin_bound:.3e} 未満")
    return mismatches


def _holonomy(germ: GermPoly, axis: str, step_tol: Optional[float], result: BatteryResult):
    try:
        result.disk_margins[axis] = disk_transversality_margin(germ, axis, 0.0, HOLONOMY_DISK_RADIUS)
        result.holonomy[axis] = holonomy_estimate(germ, axis, HOLONOMY_DISK_RADIUS, t_max=HOLONOMY_T_MAX,
                                                  step_tol=step_tol)
    except FoliationError as e:
        result.holonomy[axis] = None
        result.holonomy_notes[axis] = str(e)


def run_battery(germ: GermPoly, starts: Optional[int] = None, seed: Optional[int] = None,
                t_max: Optional[float] = None, step_tol: Optional[float] = None, workers: Optional[int] = None,
                m: Optional[int] = None, holonomy: bool = True,
                min_crossings: Optional[int] = None) -> BatteryResult:
    """
    2 次元の germ に不変量バッテリーを実行する

    共鳴型では開始点の 1 つを閉じた葉 {y=0} 上に置き、残りは前後にトレースして頂点を求める。

    Args:
        germ (GermPoly): 2 次元の Poincaré 型 germ
        starts (Optional[int]): 開始点の数
        seed (Optional[int]): 乱数の種
        t_max (Optional[float]): トレースの長さ (共鳴型では前後それぞれの長さ)
        step_tol (Optional[float]): 局所誤差許容値
        workers (Optional[int]): 並列ワーカー数
        m (Optional[int]): 頂点の残差に使う m (省略時は分類で得た m)
        holonomy (bool): ホロノミーも求める場合は True
        min_crossings (Optional[int]): 閉じない葉の傾きの推定に必要な交差回数

    Returns:
        BatteryResult: 結果
    """
    config = get_config()
    starts = config.get_battery_starts() if starts is None else starts
    seed = config.get_seed() if seed is None else seed
    cls = classify_2d(germ)
    resonant = cls.tag == RESONANT
    t_max = config.get_t_max(resonant=resonant) if t_max is None else t_max
    min_crossings = config.get_min_crossings() if min_crossings is None else min_crossings
    expected_slope = _expected_slope(cls)
    model = canonical_form_2d(germ).germ
    m = cls.m if m is None and resonant else m

    points = sphere_starts(2, starts, seed)
    axis_row = None
    if resonant and starts > 0:
        # 閉じた葉 {y=0} 上の開始点
        points[0] = np.array([np.exp(1j * 2 * math.pi * np.random.default_rng(seed).random()), 0.0])
        axis_row = 0
    logger.info(f"不変量バッテリーを実行します: 同値類={cls.label()}, 開始点={starts}, 種={seed}, 長さ={t_max}")

    trajectories = trace_many(model, points, t_max, step_tol, through=resonant, workers=workers)
    rows = []
    for index, (start, traj) in enumerate(zip(points, trajectories)):
        report = trace_report(traj)
        row = StartRow(index, start, report.closure.closed, margin=report.transversality_margin,
                       profile=None if report.torus_profile is None else report.torus_profile.kind,
                       slope=report.slope_estimate)
        if expected_slope is not None and row.profile == CONSTANT:
            row.slope = _row_slope(traj, report, min_crossings)
        if report.closure.closed:
            row.windings = report.closure.windings
            row.period = report.closure.period
        if resonant:
            row.margin_bound = float(1 - np.max(traj.radii[:, 0] * traj.radii[:, 1] ** cls.m))
            if index != axis_row:
                try:
                    row.apex_residual = resonant_apex(traj, m).residual
                except (NoApexError, ProfileAmbiguousError) as e:
                    logger.warning(f"開始点 {index}: {e}")
        rows.append(row)

    result = BatteryResult(cls, class_signature(cls), rows, {}, {}, {}, True, seed=seed, t_max=t_max)
    if holonomy:
        for axis in (('y',) if resonant else ('x', 'y')):
            _holonomy(model, axis, step_tol, result)
    result.mismatches = _check_rows(cls, rows, axis_row, min_crossings)
    result.consistent = not result.mismatches
    if result.consistent:
        logger.info(f"数値結果は同値類 {cls.label()} の予想と一致しました")
    else:
        logger.warning(f"数値結果が予想と一致しません: {len(result.mismatches)} 件")
    return result

"""
単位球面 S^{2n-1} 上の交差葉層のトレースと、トレースから読み取る不変量

葉層の葉と球面の交わりは向き付けられた実 1 次元の葉層になる。その方向場を積分し、
閉じた葉・巻き数・トーラスへの閉じ込め・傾き・ホロノミーを数値的に調べる。
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property, partial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .config import get_config
from .errors import (DimensionError, FoliationError, HolonomyNoReturnError, InsufficientCrossingsError,
                     ProfileAmbiguousError, TangencyError)
from .germ import GermPoly
from .integrator import ProjectedRKF45

logger = logging.getLogger(__name__)

CONSTANT = 'Constant'
MONOTONE = 'Monotone'
UNIQUE_MAX = 'UniqueMax'

TWO_PI = 2 * math.pi
# 半径の列の単調性を判定するときに無視する揺らぎ
RADIUS_NOISE = 1e-12
HOLONOMY_MAX_ORDER = 64
HOLONOMY_ORDER_TOLERANCE = 1e-3
SLOPE_EXTENSION_MARGIN = 1.1
SLOPE_MAX_EXTENSIONS = 4


def sphere_point(values: Sequence[complex]) -> np.ndarray:
    """
    複素ベクトルを単位球面上の点にする

    Raises:
        ValueError: 零ベクトルの場合
    """
    z = np.asarray(values, dtype=complex)
    norm = np.linalg.norm(z)
    if norm == 0.0:
        raise ValueError("零ベクトルは球面上の点になりません")
    if abs(norm - 1.0) > 1e-12:
        logger.debug(f"開始点を正規化しました: |z|={norm!r}")
    return z / norm


def _directions(germ: GermPoly, points: np.ndarray, tangency: float) -> Tuple[np.ndarray, np.ndarray]:
    theta = germ.evaluate_many(points)
    c = np.sum(theta * np.conj(points), axis=1)
    margins = np.abs(c)
    bad = np.flatnonzero(margins <= tangency)
    if len(bad):
        raise TangencyError(float(margins[bad[0]]), points[bad[0]])
    w = 1j * (np.conj(c) / margins)[:, None] * theta
    return w / np.linalg.norm(w, axis=1)[:, None], margins


def intersection_direction(germ: GermPoly, z, tangency: Optional[float] = None) -> np.ndarray:
    """
    交差葉層の単位接ベクトル

    c = Σ θ_i(z)·conj(z_i) として w = i·(conj(c)/|c|)·θ(z) を正規化したもの。
    Re<w, z> = 0 を満たし、葉の中の外向き動径方向 (conj(c)/|c|)·θ(z) と w の組が正の向きになる。

    Args:
        germ (GermPoly): germ
        z: 球面上の点
        tangency (Optional[float]): |c| の下限

    Returns:
        np.ndarray: 単位ベクトル w

    Raises:
        TangencyError: |c| が tangency 以下の場合
    """
    if tangency is None:
        tangency = get_config().get_tangency_tolerance()
    z = np.asarray(z, dtype=complex)
    if z.shape != (germ.dimension,):
        raise DimensionError(f"点の次元が germ と一致しません: {z.shape} (n={germ.dimension})")
    directions, _ = _directions(germ, z[None, :], tangency)
    return directions[0]


class _DirectionField:
    """積分器に渡す方向場 (プロセス間で受け渡せるようにクラスにしている)"""

    def __init__(self, germ: GermPoly, tangency: float, sign: float = 1.0):
        self.germ = germ
        self.tangency = tangency
        self.sign = sign

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return self.sign * _directions(self.germ, z[None, :], self.tangency)[0][0]


def _integrator(germ: GermPoly, step_tol: float, sign: float = 1.0) -> ProjectedRKF45:
    config = get_config()
    return ProjectedRKF45(_DirectionField(germ, config.get_tangency_tolerance(), sign), step_tol,
                          config.get_max_arg_step(), config.get_axis_suspend())


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    トレースした葉 (時刻は常に前向きの流れの時刻)

    Attributes:
        germ (GermPoly): トレースした germ
        times (np.ndarray): 狭義単調増加の時刻 (K,)
        points (np.ndarray): 球面上の点 (K, n)
        args (np.ndarray): 各座標の連続な偏角 (K, n)。追跡を止めた所は NaN
        radii (np.ndarray): 各座標の絶対値 (K, n)
        margins (np.ndarray): 各点の |<θ(z), z>| (K,)
        reliable (Tuple[bool, ...]): 偏角の追跡が途切れなかった座標は True
        step_tol (float): 局所誤差許容値
    """
    germ: GermPoly
    times: np.ndarray
    points: np.ndarray
    args: np.ndarray
    radii: np.ndarray
    margins: np.ndarray
    reliable: Tuple[bool, ...]
    step_tol: float

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def transversality_margin(self) -> float:
        return float(self.margins.min())

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    @cached_property
    def directions(self) -> np.ndarray:
        return _directions(self.germ, self.points, 0.0)[0]

    @cached_property
    def _stepper(self) -> ProjectedRKF45:
        return _integrator(self.germ, self.step_tol)

    def _index(self, t: float) -> int:
        if t < self.times[0] or t > self.times[-1]:
            raise ValueError(f"時刻 {t} はトレースの範囲 [{self.times[0]}, {self.times[-1]}] の外です")
        return max(0, min(int(np.searchsorted(self.times, t, side='right')) - 1, len(self.times) - 1))

    def at(self, t: float) -> np.ndarray:
        """
        時刻 t の点 (直前の標本から射影付き Runge-Kutta の 1 ステップで求める)
        """
        k = self._index(t)
        return self._stepper.step(self.points[k], t - self.times[k])

    def arg_at(self, t: float) -> np.ndarray:
        """時刻 t での連続な偏角"""
        k = self._index(t)
        z = self.at(t)
        return self.args[k] + np.angle(z * np.conj(self.points[k]))


def _trajectory(germ: GermPoly, times, points, args, reliable, step_tol: float) -> Trajectory:
    points = np.asarray(points, dtype=complex)
    _, margins = _directions(germ, points, 0.0)
    return Trajectory(germ, np.asarray(times, dtype=float), points, np.asarray(args, dtype=float),
                      np.abs(points), margins, tuple(reliable), step_tol)


def trace_leaf(germ: GermPoly, start, t_max: Optional[float] = None, step_tol: Optional[float] = None,
               backward: bool = False) -> Trajectory:
    """
    start を通る葉を時間 t_max だけトレースする

    Args:
        germ (GermPoly): germ
        start: 開始点 (正規化する)
        t_max (Optional[float]): トレースの長さ
        step_tol (Optional[float]): 局所誤差許容値
        backward (bool): True の場合は方向場を反転してトレースし、時刻 [-t_max, 0] の軌道として返す

    Returns:
        Trajectory: 軌道

    Raises:
        TangencyError: 横断性が失われた場合
        StepCollapseError: ステップ幅が潰れた場合
    """
    config = get_config()
    t_max = config.get_t_max() if t_max is None else t_max
    step_tol = config.get_step_tol() if step_tol is None else step_tol
    z0 = sphere_point(start)
    if len(z0) != germ.dimension:
        raise DimensionError(f"開始点の次元が germ と一致しません: {len(z0)} (n={germ.dimension})")
    intersection_direction(germ, z0, config.get_tangency_tolerance())

    result = _integrator(germ, step_tol, -1.0 if backward else 1.0).integrate(z0, t_max)
    times, points, args = result.times, result.points, result.args
    if backward:
        times, points, args = -times[::-1], points[::-1], args[::-1]
    traj = _trajectory(germ, times, points, args, result.reliable, step_tol)
    logger.info(f"葉をトレースしました: {'後ろ向き' if backward else '前向き'}, 長さ={t_max}, "
                f"標本数={len(times)}, 横断性の余裕={traj.transversality_margin:.3e}")
    if not all(result.reliable):
        logger.warning(f"軸に近づいたため偏角の追跡が途切れた座標があります: {result.reliable}")
    return traj


def trace_through(germ: GermPoly, start, t_max: Optional[float] = None,
                  step_tol: Optional[float] = None) -> Trajectory:
    """
    後ろ向きと前向きのトレースをつなぎ、開始点が内部にある軌道 (時刻 [-t_max, t_max]) を返す
    """
    before = trace_leaf(germ, start, t_max, step_tol, backward=True)
    after = trace_leaf(germ, start, t_max, step_tol)
    return Trajectory(
        germ,
        np.concatenate([before.times, after.times[1:]]),
        np.concatenate([before.points, after.points[1:]]),
        np.concatenate([before.args, after.args[1:]]),
        np.concatenate([before.radii, after.radii[1:]]),
        np.concatenate([before.margins, after.margins[1:]]),
        tuple(a and b for a, b in zip(before.reliable, after.reliable)),
        after.step_tol,
    )


def _trace_job(start, germ: GermPoly, t_max: float, step_tol: float, backward: bool, through: bool) -> Trajectory:
    if through:
        return trace_through(germ, start, t_max, step_tol)
    return trace_leaf(germ, start, t_max, step_tol, backward)


class _SequentialExecutor:
    """ProcessPoolExecutor と同じ使い方で、同じプロセス内で順に実行する"""

    def __init__(self, *args, **kwargs):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        pass

    @staticmethod
    def map(function, *iterables, **kwargs):
        return map(function, *iterables)


def executor_for(workers: int):
    """ワーカー数が 1 なら逐次実行、それ以外はプロセスプール"""
    if workers <= 1:
        return _SequentialExecutor()
    return ProcessPoolExecutor(max_workers=workers)


def trace_many(germ: GermPoly, starts: Sequence, t_max: Optional[float] = None, step_tol: Optional[float] = None,
               backward: bool = False, through: bool = False, workers: Optional[int] = None) -> List[Trajectory]:
    """
    複数の開始点から並列にトレースする (結果は starts の順)
    """
    config = get_config()
    t_max = config.get_t_max() if t_max is None else t_max
    step_tol = config.get_step_tol() if step_tol is None else step_tol
    workers = config.get_workers() if workers is None else workers
    job = partial(_trace_job, germ=germ, t_max=t_max, step_tol=step_tol, backward=backward, through=through)
    with executor_for(workers) as executor:
        return list(executor.map(job, [np.asarray(s, dtype=complex) for s in starts]))


@dataclass(frozen=True)
class Closed:
    """
    閉じた葉

    Attributes:
        period (float): 周期
        windings (Tuple[Optional[int], ...]): 各座標の巻き数 (偏角を追跡できなかった座標は None)
        residual (float): 巻き数を丸めたときの誤差の最大値
        distance (float): 回帰点と開始点の距離
        angle (float): 回帰点と開始点での方向のなす角
    """
    period: float
    windings: Tuple[Optional[int], ...]
    residual: float
    distance: float
    angle: float
    closed: bool = field(default=True, init=False)

    def to_json(self) -> Dict:
        return {"closed": True, "period": self.period, "windings": list(self.windings),
                "winding_residual": self.residual, "return_distance": self.distance, "return_angle": self.angle}


@dataclass(frozen=True)
class NotClosed:
    """
    閉じない葉

    Attributes:
        min_return_distance (float): 断面への回帰点と開始点の距離の最小値
    """
    min_return_distance: float
    closed: bool = field(default=False, init=False)

    def to_json(self) -> Dict:
        return {"closed": False, "min_return_distance": self.min_return_distance}


def detect_closure(traj: Trajectory, close_distance: Optional[float] = None, close_angle: Optional[float] = None):
    """
    葉が閉じているかを調べる

    開始点を通り開始方向に直交する断面 Re<z - z0, w0> = 0 を負から正へ横切る点を brentq で求め、
    位置が close_distance 未満かつ方向のずれが close_angle 未満で戻った最初の点を周期とする。

    Args:
        traj (Trajectory): 軌道
        close_distance (Optional[float]): 位置の許容誤差
        close_angle (Optional[float]): 方向の許容誤差 (ラジアン)

    Returns:
        Closed | NotClosed: 判定結果
    """
    config = get_config()
    close_distance = config.get_close_distance() if close_distance is None else close_distance
    close_angle = config.get_close_angle() if close_angle is None else close_angle

    z0, w0 = traj.points[0], traj.directions[0]
    offsets = traj.points - z0
    section = np.real(offsets @ np.conj(w0))
    distances = np.linalg.norm(offsets, axis=1)
    spacing = np.linalg.norm(np.diff(traj.points, axis=0), axis=1)

    def crossing(t: float) -> float:
        return float(np.real(np.vdot(w0, traj.at(t) - z0)))

    min_distance = math.inf
    upward = np.flatnonzero((section[1:-1] < 0) & (section[2:] >= 0)) + 1
    for k in upward:
        if min(distances[k], distances[k + 1]) > 2 * spacing[k] + close_distance:
            min_distance = min(min_distance, float(min(distances[k], distances[k + 1])))
            continue
        t_star = brentq(crossing, traj.times[k], traj.times[k + 1], xtol=1e-14)
        z_star = traj.at(t_star)
        distance = float(np.linalg.norm(z_star - z0))
        min_distance = min(min_distance, distance)
        if distance >= close_distance:
            continue
        w_star = intersection_direction(traj.germ, z_star, 0.0)
        angle = float(np.arccos(np.clip(np.real(np.vdot(w0, w_star)), -1.0, 1.0)))
        if angle >= close_angle:
            continue
        turns = (traj.arg_at(t_star) - traj.args[0]) / TWO_PI
        windings = tuple(int(round(w)) if reliable else None for w, reliable in zip(turns, traj.reliable))
        residual = max((abs(w - round(w)) for w, r in zip(turns, traj.reliable) if r), default=0.0)
        period = float(t_star - traj.times[0])
        logger.info(f"葉は閉じています: 周期={period:.9g}, 巻き数={windings}, 丸め誤差={residual:.3e}")
        return Closed(period, windings, float(residual), distance, angle)

    logger.info(f"葉は閉じていません: 最小回帰距離={min_distance:.3e}")
    return NotClosed(min_distance)


@dataclass(frozen=True)
class TorusProfile:
    """
    トーラス半径のプロファイル

    Attributes:
        kind (str): 'Constant' (|x| が一定) / 'Monotone' (|x| が狭義単調) / 'UniqueMax' (|y| が内部で唯一の最大)
        radius (Optional[float]): Constant の場合の |x|
        apex_index (Optional[int]): UniqueMax の場合の最大の標本の番号
        increasing (Optional[bool]): Monotone の場合、増加なら True
    """
    kind: str
    radius: Optional[float] = None
    apex_index: Optional[int] = None
    increasing: Optional[bool] = None

    def to_json(self) -> Dict:
        data = {"kind": self.kind}
        if self.radius is not None:
            data["radius"] = self.radius
        if self.apex_index is not None:
            data["apex_index"] = self.apex_index
        if self.increasing is not None:
            data["increasing"] = self.increasing
        return data


def _require_plane(traj: Trajectory):
    if traj.n != 2:
        raise DimensionError(f"この不変量は 2 次元でのみ計算できます: n={traj.n}")


def torus_radius_profile(traj: Trajectory, constant_tolerance: float = 1e-6) -> TorusProfile:
    """
    軌道上の座標の絶対値の振る舞いを分類する

    Args:
        traj (Trajectory): 2 次元の軌道
        constant_tolerance (float): |x| の変動がこれ未満なら Constant

    Returns:
        TorusProfile: プロファイル

    Raises:
        ProfileAmbiguousError: どのプロファイルにも当てはまらない場合
    """
    _require_plane(traj)
    rx, ry = traj.radii[:, 0], traj.radii[:, 1]
    spread = float(rx.max() - rx.min())
    if spread < constant_tolerance:
        return TorusProfile(CONSTANT, radius=float(rx.mean()))

    dx = np.diff(rx)
    if np.all(dx > -RADIUS_NOISE) and rx[-1] - rx[0] > constant_tolerance:
        return TorusProfile(MONOTONE, increasing=True)
    if np.all(dx < RADIUS_NOISE) and rx[0] - rx[-1] > constant_tolerance:
        return TorusProfile(MONOTONE, increasing=False)

    apex = int(np.argmax(ry))
    dy = np.diff(ry)
    if (0 < apex < len(ry) - 1 and np.all(dy[:apex] > -RADIUS_NOISE) and np.all(dy[apex:] < RADIUS_NOISE)
            and ry[apex] - max(ry[0], ry[-1]) > constant_tolerance):
        return TorusProfile(UNIQUE_MAX, apex_index=apex)

    raise ProfileAmbiguousError(f"半径のプロファイルを判定できません (|x| の変動 {spread:.3e})")


def _profile_or_none(traj: Trajectory) -> Optional[TorusProfile]:
    """判定できない場合に None を返す torus_radius_profile"""
    try:
        return torus_radius_profile(traj)
    except ProfileAmbiguousError as e:
        logger.warning(str(e))
        return None


def slope_estimate(traj: Trajectory, min_crossings: Optional[int] = None) -> float:
    """
    トーラス上の葉の傾きを交差回数の比で推定する

    y の偏角が 2π の倍数を横切る点 (C1) と x の偏角が 2π の倍数を横切る点 (C2) を数え、
    y が整数回だけ回る区間での C2 の交差回数 / C1 の交差回数を返す。

    Args:
        traj (Trajectory): 2 次元の軌道
        min_crossings (Optional[int]): 必要な交差回数

    Returns:
        float: 傾きの推定値

    Raises:
        InsufficientCrossingsError: 交差回数が足りない場合
    """
    _require_plane(traj)
    required = get_config().get_min_crossings() if min_crossings is None else min_crossings
    if not all(traj.reliable):
        raise InsufficientCrossingsError((0, 0), required)
    turns_x = np.floor(traj.args[:, 0] / TWO_PI)
    turns_y = np.floor(traj.args[:, 1] / TWO_PI)
    changes = np.flatnonzero(np.diff(turns_y) != 0) + 1
    if len(changes) < 2:
        raise InsufficientCrossingsError((len(changes), 0), required)
    first, last = changes[0], changes[-1]
    c1 = int(abs(turns_y[last] - turns_y[first]))
    c2 = int(abs(turns_x[last] - turns_x[first]))
    if min(c1, c2) < required:
        raise InsufficientCrossingsError((c1, c2), required)
    estimate = c2 / c1
    logger.info(f"傾きを推定しました: {estimate:.6g} (C1 の交差 {c1} 回, C2 の交差 {c2} 回)")
    return estimate


def extended_slope_estimate(traj: Trajectory, min_crossings: Optional[int] = None,
                            max_extensions: int = SLOPE_MAX_EXTENSIONS) -> Tuple[float, Trajectory]:
    """
    交差回数が足りなければ開始点からトレースを延ばして傾きを推定する

    トーラス上の葉では偏角の回る速さが一定なので、延ばす長さは不足した交差回数の比から決める。

    Args:
        traj (Trajectory): 2 次元の軌道
        min_crossings (Optional[int]): 必要な交差回数
        max_extensions (int): トレースし直す回数の上限

    Returns:
        Tuple[float, Trajectory]: 傾きの推定値と推定に使った軌道

    Raises:
        InsufficientCrossingsError: 延ばしても交差回数が足りない場合、偏角の追跡が途切れた場合
    """
    required = get_config().get_min_crossings() if min_crossings is None else min_crossings
    attempt = 0
    while True:
        try:
            return slope_estimate(traj, required), traj
        except InsufficientCrossingsError as e:
            if attempt >= max_extensions or not all(traj.reliable):
                raise
            attempt += 1
            counted = min(e.crossings)
            factor = (required + 1) / counted if counted > 0 else required + 1
            t_max = traj.duration * max(factor * SLOPE_EXTENSION_MARGIN, 2.0)
            logger.info(f"{e}: 長さ {t_max:.6g} でトレースし直します")
            traj = trace_leaf(traj.germ, traj.points[0], t_max, traj.step_tol)


@dataclass(frozen=True)
class HolonomyEstimate:
    """
    閉じた葉のまわりのホロノミー

    Attributes:
        axis (str): 'x' なら葉 {x=0} のまわり、'y' なら葉 {y=0} のまわり
        multiplier (complex): 第一回帰写像の乗数
        residual (float): 最小二乗当てはめの相対誤差の最大値
        order (Optional[int]): |multiplier^k - 1| < 1e-3 となる最小の k (64 以下)
        samples (Tuple[Tuple[complex, complex], ...]): (横断座標の初期値, 回帰後の値)
    """
    axis: str
    multiplier: complex
    residual: float
    order: Optional[int]
    samples: Tuple[Tuple[complex, complex], ...]

    def to_json(self) -> Dict:
        return {"axis": self.axis, "multiplier": {"re": self.multiplier.real, "im": self.multiplier.imag},
                "residual": self.residual, "order": self.order}


def holonomy_order(multiplier: complex, max_order: int = HOLONOMY_MAX_ORDER,
                   tolerance: float = HOLONOMY_ORDER_TOLERANCE) -> Optional[int]:
    """multiplier^k が 1 に近くなる最小の k"""
    power = 1.0 + 0.0j
    for k in range(1, max_order + 1):
        power *= multiplier
        if abs(power - 1) < tolerance:
            return k
    return None


def _axis_indices(axis: str) -> Tuple[int, int]:
    if axis == 'x':
        return 0, 1
    if axis == 'y':
        return 1, 0
    raise ValueError(f"軸は 'x' か 'y' で指定してください: {axis!r}")


def _first_return(germ: GermPoly, start: np.ndarray, leaf: int, t_max: float, step_tol: float) -> np.ndarray:
    arg0 = float(np.angle(start[leaf]))

    def returned(t, z, args) -> bool:
        return bool(abs(args[leaf] - arg0) >= TWO_PI)

    result = _integrator(germ, step_tol).integrate(start, t_max, until=returned)
    traj = _trajectory(germ, result.times, result.points, result.args, result.reliable, step_tol)
    if not result.stopped:
        transverse = 1 - leaf
        r0, r1 = abs(start[transverse]), traj.radii[-1, transverse]
        raise HolonomyNoReturnError("横断円板への回帰がありません",
                                    float((r1 - r0) / (r0 * max(traj.duration, 1e-300))))
    sign = 1.0 if traj.args[-1, leaf] > arg0 else -1.0
    t_star = brentq(lambda t: float(traj.arg_at(t)[leaf] - arg0 - sign * TWO_PI),
                    traj.times[-2], traj.times[-1], xtol=1e-14)
    return traj.at(t_star)


def holonomy_estimate(germ: GermPoly, axis: str = 'x', disk_radius: float = 1e-2, radii: int = 5,
                      t_max: Optional[float] = None, step_tol: Optional[float] = None,
                      disk_arg: float = 0.0) -> HolonomyEstimate:
    """
    座標軸上の閉じた葉のまわりのホロノミーの乗数を推定する

    横断円板 {arg(葉の座標) = disk_arg, |横断座標| < disk_radius} 上の radii 個の点からトレースし、
    葉の座標の偏角が 2π 進んで円板に戻った点の横断座標を最小二乗で初期値の定数倍に当てはめる。

    Args:
        germ (GermPoly): 2 次元の germ
        axis (str): 'x' なら葉 {x=0}、'y' なら葉 {y=0}
        disk_radius (float): 円板の半径
        radii (int): 半径の個数 (5 以上)
        t_max (Optional[float]): 1 回の回帰を待つ時間の上限
        step_tol (Optional[float]): 局所誤差許容値
        disk_arg (float): 円板を置く葉の座標の偏角

    Returns:
        HolonomyEstimate: 乗数と当てはめの誤差

    Raises:
        HolonomyNoReturnError: t_max までに戻らない場合
    """
    if germ.dimension != 2:
        raise DimensionError(f"ホロノミーは 2 次元でのみ計算できます: n={germ.dimension}")
    if radii < 5:
        raise ValueError(f"半径は 5 個以上必要です: {radii}")
    config = get_config()
    t_max = config.get_t_max() if t_max is None else t_max
    step_tol = config.get_step_tol() if step_tol is None else step_tol
    transverse, leaf = _axis_indices(axis)

    samples = []
    for r in disk_radius * np.arange(1, radii + 1) / radii:
        start = np.zeros(2, dtype=complex)
        start[transverse] = r
        start[leaf] = math.sqrt(1 - r * r) * np.exp(1j * disk_arg)
        returned = _first_return(germ, start, leaf, t_max, step_tol)
        samples.append((complex(start[transverse]), complex(returned[transverse])))

    initial = np.array([s[0] for s in samples])
    final = np.array([s[1] for s in samples])
    multiplier = complex(np.vdot(initial, final) / np.vdot(initial, initial).real)
    residual = float(np.max(np.abs(final - multiplier * initial) / np.abs(initial)))
    order = holonomy_order(multiplier)
    logger.info(f"ホロノミーを推定しました: 軸={axis}, 乗数={multiplier:.9g}, 誤差={residual:.3e}, 位数={order}")
    return HolonomyEstimate(axis, multiplier, residual, order, tuple(samples))


def _is_diagonal_linear(germ: GermPoly) -> bool:
    return germ.is_linear() and all(term.exponents[term.component - 1] == 1 for term in germ.terms)


def s1s1_invariance_check(germ: GermPoly, start, t1: float, t2: float, t_max: float = 20.0,
                          step_tol: Optional[float] = None) -> float:
    """
    トーラス作用 (x, y) ↦ (x·e^{i t1}, y·e^{i t2}) で交差葉層が保たれるかを調べる

    start からの軌道を回転したものと、回転した開始点からの軌道を同じ時刻で比べ、
    距離の最大値 (二つの葉の弧の Hausdorff 距離の上界) を返す。

    Args:
        germ (GermPoly): 対角線形な 2 次元 germ
        start: 開始点
        t1 (float): x の回転角
        t2 (float): y の回転角
        t_max (float): トレースの長さ
        step_tol (Optional[float]): 局所誤差許容値

    Returns:
        float: 最大のずれ

    Raises:
        ValueError: germ が対角線形でない場合
    """
    if germ.dimension != 2 or not _is_diagonal_linear(germ):
        raise ValueError("トーラス作用による不変性は対角線形な 2 次元 germ でのみ調べられます")
    rotation = np.exp(1j * np.array([t1, t2]))
    first = trace_leaf(germ, start, t_max, step_tol)
    second = trace_leaf(germ, rotation * np.asarray(start, dtype=complex), t_max, step_tol)
    rotated = first.points * rotation
    times = first.times[first.times <= second.times[-1]]
    deviation = max(float(np.linalg.norm(rotated[k] - second.at(t))) for k, t in enumerate(times))
    logger.info(f"トーラス作用による不変性: 回転=({t1:.6g}, {t2:.6g}), 最大のずれ={deviation:.3e}")
    return deviation


def disk_transversality_margin(germ: GermPoly, axis: str, t: float, eps: float, samples: int = 32) -> float:
    """
    円板 {arg(葉の座標) = t, |横断座標| <= eps} 上で、方向場が葉の座標の偏角を進める速さの最小値

    正なら、どの葉もこの円板を横断的に通る。

    Args:
        germ (GermPoly): 2 次元の germ
        axis (str): 'x' なら円板 {arg(y) = t, |x| <= eps}、'y' なら {arg(x) = t, |y| <= eps}
        t (float): 円板の偏角
        eps (float): 円板の半径 (1 未満)
        samples (int): 半径方向と角度方向の標本数

    Returns:
        float: |d arg(葉の座標)(w)| の最小値
    """
    if germ.dimension != 2:
        raise DimensionError(f"円板の横断性は 2 次元でのみ調べられます: n={germ.dimension}")
    if not 0 < eps < 1:
        raise ValueError(f"円板の半径は 0 と 1 の間で指定してください: {eps}")
    transverse, leaf = _axis_indices(axis)
    r, phi = np.meshgrid(np.linspace(0.0, eps, samples), np.linspace(0.0, TWO_PI, samples, endpoint=False))
    r, phi = r.ravel(), phi.ravel()
    points = np.zeros((len(r), 2), dtype=complex)
    points[:, transverse] = r * np.exp(1j * phi)
    points[:, leaf] = np.sqrt(1 - r * r) * np.exp(1j * t)
    directions, _ = _directions(germ, points, get_config().get_tangency_tolerance())
    speed = np.imag(directions[:, leaf] / points[:, leaf])
    margin = float(np.min(np.abs(speed)))
    if np.any(speed > 0) and np.any(speed < 0):
        margin = 0.0
    logger.info(f"円板の横断性の余裕: 軸={axis}, 偏角={t:.6g}, 半径={eps:.3g}, 余裕={margin:.3e}")
    return margin


@dataclass(frozen=True)
class LeafCensus:
    """
    閉じた葉の数え上げ

    Attributes:
        closed (int): 閉じた葉の数
        not_closed (int): 閉じない葉の数
        closures (Tuple): 開始点ごとの判定結果
    """
    closed: int
    not_closed: int
    closures: Tuple

    def to_json(self) -> Dict:
        return {"closed": self.closed, "not_closed": self.not_closed,
                "closures": [closure.to_json() for closure in self.closures]}


def closed_leaf_census(germ: GermPoly, starts: Sequence, t_max: Optional[float] = None,
                       step_tol: Optional[float] = None, workers: Optional[int] = None) -> LeafCensus:
    """
    複数の開始点を通る葉のうち閉じたものを数える
    """
    closures = tuple(detect_closure(traj) for traj in trace_many(germ, starts, t_max, step_tol, workers=workers))
    closed = sum(1 for closure in closures if closure.closed)
    logger.info(f"閉じた葉の数: {closed} / {len(closures)}")
    return LeafCensus(closed, len(closures) - closed, closures)


@dataclass(frozen=True)
class TraceReport:
    """
    1 本の軌道から読み取った不変量

    Attributes:
        closure (Closed | NotClosed): 閉じているか
        torus_profile (Optional[TorusProfile]): 半径のプロファイル (判定できない場合は None)
        slope_estimate (Optional[float]): 傾きの推定値
        holonomy (Optional[HolonomyEstimate]): ホロノミー
        transversality_margin (float): 軌道上の |<θ(z), z>| の最小値
    """
    closure: object
    torus_profile: Optional[TorusProfile]
    slope_estimate: Optional[float]
    holonomy: Optional[HolonomyEstimate]
    transversality_margin: float

    def to_json(self) -> Dict:
        return {
            "closure": self.closure.to_json(),
            "torus_profile": None if self.torus_profile is None else self.torus_profile.to_json(),
            "slope_estimate": self.slope_estimate,
            "holonomy": None if self.holonomy is None else self.holonomy.to_json(),
            "transversality_margin": self.transversality_margin,
        }


def trace_report(traj: Trajectory, holonomy: Optional[HolonomyEstimate] = None) -> TraceReport:
    """
    軌道から閉包・プロファイル・傾きをまとめて求める (2 次元の場合のみプロファイルと傾きを求める)
    """
    closure = detect_closure(traj)
    profile = _profile_or_none(traj) if traj.n == 2 else None
    slope = None
    if profile is not None and profile.kind == CONSTANT:
        try:
            slope = slope_estimate(traj)
        except InsufficientCrossingsError as e:
            logger.info(str(e))
    return TraceReport(closure, profile, slope, holonomy, traj.transversality_margin)


def orientation_self_test() -> None:
    """
    λ = 1 の germ の葉が両方の座標で反時計回りに回ることを確かめる

    Raises:
        FoliationError: 向きが逆の場合
    """
    radial = GermPoly.from_terms(2, [(1, (1, 0), 1), (2, (0, 1), 1)])
    z = np.array([0.6, 0.8], dtype=complex)
    advanced = _integrator(radial, 1e-10).step(z, 0.1)
    increments = np.angle(advanced * np.conj(z))
    if not np.all(increments > 0):
        raise FoliationError(f"交差葉層の向きが想定と逆です: 偏角の増分={increments}")

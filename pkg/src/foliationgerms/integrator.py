"""
単位球面上の射影付き適応 Runge-Kutta-Fehlberg 4(5) 積分
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import StepCollapseError

logger = logging.getLogger(__name__)

# Fehlberg の Butcher 表
FEHLBERG_TABLE = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3554 / 2565, 1859 / 4104, -11 / 40),
)
FEHLBERG_HIGH = np.array([16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55])
FEHLBERG_ERROR = np.array([1 / 360, 0.0, -128 / 4275, -2197 / 75240, 1 / 50, 2 / 55])

MIN_STEP = 1e-12
SAFETY = 0.9

Field = Callable[[np.ndarray], np.ndarray]


def project(z: np.ndarray) -> np.ndarray:
    """z を単位球面に射影する"""
    return z / np.linalg.norm(z)


def fehlberg_step(rhs: Field, z: np.ndarray, h: float) -> Tuple[np.ndarray, float]:
    """
    1 ステップ進める (射影前の 5 次解と局所誤差の推定値を返す)
    """
    stages: List[np.ndarray] = []
    for row in FEHLBERG_TABLE:
        point = z
        for weight, stage in zip(row, stages):
            point = point + h * weight * stage
        stages.append(rhs(point))
    k = np.array(stages)
    high = z + h * (FEHLBERG_HIGH @ k)
    error = float(np.max(np.abs(h * (FEHLBERG_ERROR @ k))))
    return high, error


def unwrap_step(previous: np.ndarray, current: np.ndarray) -> np.ndarray:
    """各座標の偏角の増分 (-π, π]"""
    return np.angle(current * np.conj(previous))


@dataclass
class IntegrationResult:
    """
    積分の結果

    Attributes:
        times (np.ndarray): 時刻 (K,)
        points (np.ndarray): 球面上の点 (K, n)
        args (np.ndarray): 連続な偏角 (K, n)。軸に近く追跡を止めた所は NaN
        reliable (Tuple[bool, ...]): 偏角の追跡が一度も止まらなかった座標は True
        rejected (int): 棄却したステップ数
        stopped (bool): 停止条件で打ち切った場合に True
    """
    times: np.ndarray
    points: np.ndarray
    args: np.ndarray
    reliable: Tuple[bool, ...]
    rejected: int
    stopped: bool


class ProjectedRKF45:
    """
    ż = rhs(z) を積分し、受理した各ステップの後で z ← z/|z| と射影する

    座標 i の偏角が 1 ステップで max_arg_step より進む場合はステップを縮める。
    |z_i| < axis_suspend の間はその座標の偏角の追跡を止める。
    """

    def __init__(self, rhs: Field, step_tol: float, max_arg_step: float, axis_suspend: float,
                 initial_step: float = 1e-2, max_step: float = 0.5):
        self.rhs = rhs
        self.step_tol = step_tol
        self.max_arg_step = max_arg_step
        self.axis_suspend = axis_suspend
        self.initial_step = initial_step
        self.max_step = max_step

    def step(self, z: np.ndarray, h: float) -> np.ndarray:
        """誤差制御なしで 1 ステップ進めて射影する (密な評価に使う)"""
        if h == 0.0:
            return z.copy()
        high, _ = fehlberg_step(self.rhs, z, h)
        return project(high)

    def integrate(self, z0: np.ndarray, t_end: float,
                  until: Optional[Callable[[float, np.ndarray, np.ndarray], bool]] = None) -> IntegrationResult:
        """
        時刻 0 から t_end まで積分する

        Args:
            z0 (np.ndarray): 初期点 (単位ベクトル)
            t_end (float): 終了時刻
            until (Optional[Callable]): (t, z, 連続な偏角) を受け取り True なら打ち切る

        Returns:
            IntegrationResult: 積分の結果

        Raises:
            StepCollapseError: ステップ幅が 1e-12 を下回った場合
        """
        z = project(np.asarray(z0, dtype=complex))
        n = len(z)
        tracked = np.abs(z) >= self.axis_suspend
        reliable = tracked.copy()
        arg = np.where(tracked, np.angle(z), np.nan)

        times = [0.0]
        points = [z]
        args = [arg.copy()]
        t = 0.0
        h = min(self.initial_step, t_end) if t_end > 0 else 0.0
        rejected = 0
        stopped = False

        while t < t_end:
            h = min(h, t_end - t)
            high, error = fehlberg_step(self.rhs, z, h)
            if not np.all(np.isfinite(high)):
                error = np.inf
            if error <= self.step_tol:
                candidate = project(high)
                increments = unwrap_step(z, candidate)
                watched = tracked & (np.abs(candidate) >= self.axis_suspend)
                if np.any(np.abs(increments[watched]) > self.max_arg_step) and h > MIN_STEP:
                    h *= 0.5
                    rejected += 1
                    continue
                t += h
                now_tracked = np.abs(candidate) >= self.axis_suspend
                arg = np.where(watched, arg + increments, np.where(now_tracked, np.angle(candidate), np.nan))
                if np.any(tracked & ~now_tracked):
                    logger.warning(f"t={t:.6g} で座標が軸に近づいたため偏角の追跡を止めました")
                reliable &= now_tracked
                tracked = now_tracked
                z = candidate
                times.append(t)
                points.append(z)
                args.append(arg.copy())
                if until is not None and until(t, z, arg):
                    stopped = True
                    break
                growth = 5.0 if error == 0.0 else min(5.0, SAFETY * (self.step_tol / error) ** 0.2)
                h = min(self.max_step, h * max(growth, 0.2))
            else:
                rejected += 1
                shrink = 0.1 if not np.isfinite(error) else max(0.1, SAFETY * (self.step_tol / error) ** 0.25)
                h *= shrink
                if h < MIN_STEP:
                    raise StepCollapseError(f"ステップ幅が {MIN_STEP} を下回りました (t={t:.6g})")

        logger.debug(f"積分を終了しました: ステップ数={len(times) - 1}, 棄却={rejected}, t={t:.6g}")
        return IntegrationResult(np.array(times), np.array(points, dtype=complex).reshape(-1, n),
                                 np.array(args).reshape(-1, n), tuple(bool(r) for r in reliable), rejected, stopped)

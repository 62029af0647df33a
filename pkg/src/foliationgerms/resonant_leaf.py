"""
共鳴型 F_m: (m x + y^m)∂/∂x + y∂/∂y の葉の明示的なパラメータ表示と頂点
"""
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.optimize import brentq

from .config import get_config
from .errors import NoApexError
from .germ import GermPoly
from .sphere_trace import UNIQUE_MAX, Trajectory, intersection_direction, torus_radius_profile

logger = logging.getLogger(__name__)


def resonant_germ(m: int) -> GermPoly:
    """F_m の germ を作る"""
    if m < 1:
        raise ValueError(f"m は 1 以上で指定してください: {m}")
    return GermPoly.from_terms(2, [(1, (1, 0), m), (1, (0, m), 1), (2, (0, 1), 1)])


def resonant_leaf_param(a: complex, b: complex, m: int, t: complex) -> Tuple[complex, complex]:
    """
    (a, b) を通る F_m の積分曲線 t ↦ ((a + b^m t) e^{mt}, b e^t)
    """
    t = complex(t)
    return (complex((a + b ** m * t) * np.exp(m * t)), complex(b * np.exp(t)))


def apex_residual(a: complex, b: complex, m: int) -> float:
    """|Im(a·conj(b)^m)|"""
    return abs((complex(a) * complex(b).conjugate() ** m).imag)


def sphere_constraint_solve(a: complex, b: complex, m: int, t_R: float) -> Tuple[float, ...]:
    """
    積分曲線上の点 t = t_R + i t_I が単位球面に乗る t_I を求める

    (b b̄)^m t_I^2 + 2 Im(a b̄^m) t_I + [a ā + 2 Re(b^m ā) t_R + (b b̄)^m t_R^2 + b b̄ e^{2(1-m)t_R} - e^{-2m t_R}] = 0
    の実数解を昇順に返す。重解は 1 つとして返す。

    Args:
        a (complex): x 座標
        b (complex): y 座標 (0 でない)
        m (int): 共鳴の次数
        t_R (float): 実部

    Returns:
        Tuple[float, ...]: 0 個、1 個または 2 個の解

    Raises:
        NoApexError: b = 0 の場合 (方程式が 2 次にならない)
    """
    a, b = complex(a), complex(b)
    if b == 0:
        raise NoApexError("b = 0 では方程式が 2 次になりません (葉は閉じた葉 {y=0} です)")
    quadratic = abs(b) ** (2 * m)
    linear = 2 * (a * b.conjugate() ** m).imag
    constant = (abs(a) ** 2 + 2 * (b ** m * a.conjugate()).real * t_R + quadratic * t_R ** 2
                + abs(b) ** 2 * math.exp(2 * (1 - m) * t_R) - math.exp(-2 * m * t_R))
    discriminant = linear * linear - 4 * quadratic * constant
    scale = max(linear * linear, abs(4 * quadratic * constant), 1e-300)
    if abs(discriminant) <= 1e-12 * scale:
        return (-linear / (2 * quadratic),)
    if discriminant < 0:
        return ()
    root = math.sqrt(discriminant)
    return tuple(sorted(((-linear - root) / (2 * quadratic), (-linear + root) / (2 * quadratic))))


@dataclass(frozen=True)
class Apex:
    """
    軌道上で |y| が最大になる点

    Attributes:
        point (np.ndarray): 頂点 (a, b)
        time (float): 頂点の時刻
        residual (float): |Im(a·conj(b)^m)|
    """
    point: np.ndarray
    time: float
    residual: float

    def to_json(self):
        return {"point": [{"re": float(v.real), "im": float(v.imag)} for v in self.point],
                "time": self.time, "residual": self.residual}


def resonant_apex(traj: Trajectory, m: int) -> Apex:
    """
    F_m の軌道上で |y| が最大になる点を求める

    最大の標本のまわりで |y|^2 を t の 2 次式に当てはめて頂点の時刻を推定し、
    d|y|^2/dt = 0 を brentq で解いて精密化する。

    Args:
        traj (Trajectory): 2 次元の軌道
        m (int): 共鳴の次数

    Returns:
        Apex: 頂点と残差

    Raises:
        NoApexError: |y| が恒等的に 0 に近い、または内部に唯一の最大がない場合
    """
    if traj.radii[:, 1].max() < get_config().get_axis_suspend():
        raise NoApexError("軌道は閉じた葉 {y=0} 上にあり、頂点はありません")
    profile = torus_radius_profile(traj)
    if profile.kind != UNIQUE_MAX:
        raise NoApexError(f"|y| が内部で唯一の最大をとりません (プロファイル {profile.kind})")

    k = profile.apex_index
    window = slice(max(k - 2, 0), min(k + 3, len(traj.times)))
    times = traj.times[window]
    fit = np.polyfit(times - traj.times[k], traj.radii[window, 1] ** 2, 2)
    t_fit = traj.times[k] - fit[1] / (2 * fit[0]) if fit[0] < 0 else traj.times[k]
    t_fit = float(np.clip(t_fit, traj.times[k - 1], traj.times[k + 1]))

    def slope(t: float) -> float:
        z = traj.at(t)
        return float((np.conj(z[1]) * intersection_direction(traj.germ, z, 0.0)[1]).real)

    low, high = traj.times[k - 1], traj.times[k + 1]
    t_apex = t_fit
    if slope(low) > 0 > slope(high):
        t_apex = brentq(slope, low, high, xtol=1e-14)
    point = traj.at(t_apex)
    residual = apex_residual(point[0], point[1], m)
    logger.info(f"頂点を求めました: t={t_apex:.9g}, |y|={abs(point[1]):.9g}, 残差={residual:.3e}")
    return Apex(point, float(t_apex), residual)

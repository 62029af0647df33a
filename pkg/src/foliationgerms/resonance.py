"""
共鳴 λ_i = Σ m_j λ_j の列挙と、本質的/非本質的の判定

Poincaré 領域では |<m,λ>| >= c·Σm なので、探索は Σm <= |λ_i|/c に限られる。
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import List, Optional, Sequence, Tuple

import numpy as np
import sympy
from sympy import QQ_I, integer_nthroot

from .config import get_config
from .errors import NotPoincareError
from .germ import gaussian, qq_to_fraction
from .spectral import (ALGEBRAIC_PATH, EXACT_PATH, NUMERIC_PATH, algebraic_is_zero, as_eigenvalues,
                       eigen_path, poincare_constant, same_ray, to_complex)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Resonance:
    """
    共鳴

    Attributes:
        target (int): 成分の番号 i (0 始まり)
        m (Tuple[int, ...]): 非負整数の多重指数
        trivial (bool): m = e_i の場合に True
        essential (bool): λ_i と m_j != 0 の λ_j がすべて同じ実半直線上にある場合に True
        path (str): 判定に使った経路 ('exact' / 'algebraic' / 'numeric')
        defect (float): |<m,λ> - λ_i| (数値経路の場合の残差。厳密な場合は 0)
    """
    target: int
    m: Tuple[int, ...]
    trivial: bool
    essential: bool
    path: str
    defect: float = 0.0

    @property
    def order(self) -> int:
        return sum(self.m)


def resonance_bound(eigs) -> int:
    """
    探索の上限 ⌊max|λ_i| / c⌋

    Args:
        eigs: 固有値の列、または Spectrum

    Returns:
        int: 上限

    Raises:
        NotPoincareError: Poincaré 型でない場合
    """
    eigs = as_eigenvalues(eigs)
    return max(_target_bounds(eigs))


def _target_bounds(eigs: Sequence[object]) -> List[int]:
    poincare, c, c_squared = poincare_constant(eigs)
    if not poincare:
        raise NotPoincareError("Poincaré 型でないため共鳴の探索範囲が有限になりません")
    bounds = []
    for value in eigs:
        if QQ_I.of_type(value) and isinstance(c_squared, Fraction):
            norm = qq_to_fraction(value.x) ** 2 + qq_to_fraction(value.y) ** 2
            ratio = norm / c_squared
            bounds.append(int(integer_nthroot(ratio.numerator // ratio.denominator, 2)[0]))
        else:
            # 浮動小数点の丸めで境界上の多重指数を落とさないように少し広げる
            bounds.append(int(math.floor(abs(to_complex(value)) / float(c) + 1e-9)))
    return bounds


def ceil_resonance_bound(eigs) -> int:
    """
    ⌈max|λ_i| / c⌉ (正規形の既定の次数に使う)
    """
    eigs = as_eigenvalues(eigs)
    poincare, c, c_squared = poincare_constant(eigs)
    if not poincare:
        raise NotPoincareError("Poincaré 型ではありません")
    if eigen_path(eigs) == EXACT_PATH:
        ratio = max((qq_to_fraction(v.x) ** 2 + qq_to_fraction(v.y) ** 2) for v in eigs) / c_squared
        root = integer_nthroot(ratio.numerator // ratio.denominator, 2)[0]
        return int(root) if root * root == ratio else int(root) + 1
    return int(math.ceil(max(abs(to_complex(v)) for v in eigs) / float(c) - 1e-9))


def multi_indices(n: int, max_order: int) -> np.ndarray:
    """
    1 <= Σm <= max_order のすべての多重指数 (行ごと)

    Args:
        n (int): 次元
        max_order (int): 次数の上限

    Returns:
        np.ndarray: 形状 (K, n) の整数配列
    """
    rows = [np.bincount(combo, minlength=n)
            for order in range(1, max_order + 1)
            for combo in combinations_with_replacement(range(n), order)]
    if not rows:
        return np.zeros((0, n), dtype=np.int64)
    return np.array(rows, dtype=np.int64)


def _integer_lattice(eigs: Sequence[object]) -> Tuple[List[int], List[int]]:
    parts = [(qq_to_fraction(v.x), qq_to_fraction(v.y)) for v in eigs]
    denominator = math.lcm(*(f.denominator for pair in parts for f in pair))
    return ([int(re * denominator) for re, _ in parts], [int(im * denominator) for _, im in parts])


def _exact_matches(eigs, target: int, candidates: np.ndarray) -> np.ndarray:
    re_int, im_int = _integer_lattice(eigs)
    largest = max(abs(v) for v in re_int + im_int)
    max_order = int(candidates.sum(axis=1).max()) if len(candidates) else 0
    dtype = np.int64 if largest * max(max_order, 1) < 2 ** 62 else object
    mat = candidates.astype(dtype)
    re_vec = np.array(re_int, dtype=dtype)
    im_vec = np.array(im_int, dtype=dtype)
    return (mat @ re_vec == re_int[target]) & (mat @ im_vec == im_int[target])


def _numeric_matches(eigs, target: int, candidates: np.ndarray, tolerance: float) -> Tuple[np.ndarray, np.ndarray]:
    values = np.array([to_complex(v) for v in eigs], dtype=complex)
    defects = np.abs(candidates @ values - values[target])
    return defects <= tolerance * (1 + abs(values[target])), defects


def resonance_defect(eigs, target: int, m: Sequence[int]):
    """
    <m,λ> - λ_target を計算する (厳密な場合は QQ_I の元または sympy の式、それ以外は complex)

    Args:
        eigs: 固有値の列
        target (int): 成分の番号 (0 始まり)
        m (Sequence[int]): 多重指数

    Returns:
        差の値
    """
    eigs = as_eigenvalues(eigs)
    path = eigen_path(eigs)
    if path == EXACT_PATH:
        total = QQ_I.zero
        for mj, value in zip(m, eigs):
            if mj:
                total = total + gaussian(int(mj)) * value
        return total - eigs[target]
    if path == ALGEBRAIC_PATH:
        return sympy.expand(sum(int(mj) * value for mj, value in zip(m, eigs)) - eigs[target])
    return sum(int(mj) * value for mj, value in zip(m, eigs)) - eigs[target]


def is_resonant(eigs, target: int, m: Sequence[int], tolerance: Optional[float] = None) -> bool:
    """
    単項式 z^m (成分 target) が共鳴かどうか

    Args:
        eigs: 固有値の列
        target (int): 成分の番号 (0 始まり)
        m (Sequence[int]): 多重指数
        tolerance (Optional[float]): 数値経路の許容誤差

    Returns:
        bool: 共鳴なら True
    """
    eigs = as_eigenvalues(eigs)
    defect = resonance_defect(eigs, target, m)
    path = eigen_path(eigs)
    if path == EXACT_PATH:
        return not defect
    if path == ALGEBRAIC_PATH:
        if abs(to_complex(defect)) > 1e-6 * (1 + abs(to_complex(eigs[target]))):
            return False
        return algebraic_is_zero(defect)
    if tolerance is None:
        tolerance = get_config().get_resonance_tolerance()
    return abs(defect) <= tolerance * (1 + abs(to_complex(eigs[target])))


def is_essential(r: Resonance, eigs, tolerance: Optional[float] = None) -> bool:
    """
    共鳴が本質的か (λ_i と m_j != 0 のすべての λ_j が同じ実半直線上にあるか)

    Args:
        r (Resonance): 共鳴
        eigs: 固有値の列
        tolerance (Optional[float]): 数値経路での半直線判定の許容誤差

    Returns:
        bool: 本質的なら True
    """
    eigs = as_eigenvalues(eigs)
    return _essential(eigs, r.target, r.m, tolerance)


def _essential(eigs, target: int, m: Sequence[int], tolerance: Optional[float]) -> bool:
    return all(same_ray(eigs[target], eigs[j], tolerance) for j, mj in enumerate(m) if mj)


def enumerate_resonances(eigs, tolerance: Optional[float] = None) -> List[Resonance]:
    """
    すべての共鳴を列挙する (自明な共鳴 m = e_i も含め、trivial フラグを付ける)

    Args:
        eigs: 固有値の列 (番号はこの列の順)、または Spectrum
        tolerance (Optional[float]): 数値経路の許容誤差

    Returns:
        List[Resonance]: (target, 次数, 多重指数) の順に並べた共鳴

    Raises:
        NotPoincareError: Poincaré 型でない場合
    """
    eigs = as_eigenvalues(eigs)
    n = len(eigs)
    path = eigen_path(eigs)
    if tolerance is None:
        tolerance = get_config().get_resonance_tolerance()
    bounds = _target_bounds(eigs)
    candidates_all = multi_indices(n, max(bounds))
    orders = candidates_all.sum(axis=1)

    found: List[Resonance] = []
    for target in range(n):
        candidates = candidates_all[orders <= bounds[target]]
        if len(candidates) == 0:
            continue
        if path == EXACT_PATH:
            mask = _exact_matches(eigs, target, candidates)
            defects = np.zeros(len(candidates))
        elif path == ALGEBRAIC_PATH:
            mask, defects = _numeric_matches(eigs, target, candidates, 1e-6)
            for k in np.flatnonzero(mask):
                mask[k] = algebraic_is_zero(resonance_defect(eigs, target, candidates[k]))
            defects = np.where(mask, 0.0, defects)
        else:
            mask, defects = _numeric_matches(eigs, target, candidates, tolerance)
        for k in np.flatnonzero(mask):
            m = tuple(int(v) for v in candidates[k])
            trivial = sum(m) == 1 and m[target] == 1
            found.append(Resonance(target, m, trivial, _essential(eigs, target, m, None), path, float(defects[k])))

    found.sort(key=lambda r: (r.target, r.order, tuple(-v for v in r.m)))
    logger.info(f"共鳴を列挙しました: 経路={path}, 件数={len(found)} (自明 {sum(r.trivial for r in found)})"
                + (f", 許容誤差={tolerance}" if path == NUMERIC_PATH else ""))
    return found

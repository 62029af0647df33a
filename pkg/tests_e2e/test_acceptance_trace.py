"""
球面とのトレースによる不変量の受け入れテスト
"""
import math
from fractions import Fraction
from math import gcd

import numpy as np
import pytest

from src.foliationgerms.battery import sphere_starts
from src.foliationgerms.germ import GermPoly, gaussian
from src.foliationgerms.resonant_leaf import (apex_residual, resonant_apex, resonant_germ, sphere_constraint_solve)
from src.foliationgerms.sphere_trace import (CONSTANT, MONOTONE, detect_closure, extended_slope_estimate,
                                             holonomy_estimate, s1s1_invariance_check, slope_estimate,
                                             torus_radius_profile, trace_leaf, trace_through)


def diagonal(l1, l2) -> GermPoly:
    return GermPoly.from_terms(2, [(1, (1, 0), l1), (2, (0, 1), l2)])


COPRIME = [(p, q) for p in range(1, 6) for q in range(1, 6) if gcd(p, q) == 1]


@pytest.mark.parametrize("p, q", COPRIME)
def test_winding_table(p, q):
    """
    λ = p/q の葉は巻き数 (p, q) で閉じる
    """
    germ = diagonal(p, q)
    for start in sphere_starts(2, 10, seed=100 * p + q, axis_reject=0.1):
        closure = detect_closure(trace_leaf(germ, start, t_max=40.0))
        assert closure.closed, f"λ = {p}/{q}, 開始点 {start}"
        assert closure.windings == (p, q)
        assert closure.residual < 1e-3
    print(f"λ = {p}/{q}: 10 個の葉が巻き数 ({p}, {q}) で閉じました")


@pytest.mark.parametrize("name, value", [
    ("sqrt2", math.sqrt(2)),
    ("golden", (1 + math.sqrt(5)) / 2),
    ("pi/2", math.pi / 2),
])
def test_irrational_slope(name, value):
    """
    λ が無理数なら葉は閉じず、傾きの推定値は λ に近い
    """
    traj = trace_leaf(diagonal(value, 1.0), (0.6, 0.8), t_max=1000.0)
    slope = slope_estimate(traj)
    print(f"{name}: 傾き {slope:.6f} (λ = {value:.6f})")
    assert abs(slope - value) < 1e-2
    assert not detect_closure(traj).closed
    assert torus_radius_profile(traj).kind == CONSTANT


def test_irrational_slope_near_axis():
    """
    x 軸に近い開始点でも、トレースを延ばせば既定の交差回数で傾きが λ に近い
    """
    golden = (1 + math.sqrt(5)) / 2
    traj = trace_leaf(diagonal(golden, 1.0), (0.999, 0.0447101), t_max=1000.0)
    slope, extended = extended_slope_estimate(traj)
    print(f"傾き {slope:.6f} (長さ {extended.duration:.1f})")
    assert abs(slope - golden) < 1e-2


def sign_change_count(a: complex, b: complex, m: int, t_R: float) -> int:
    """t_I の細かい格子上で |x|^2 + |y|^2 - 1 の符号が変わる回数"""
    t_I = np.linspace(-100.0, 100.0, 400000)
    t = t_R + 1j * t_I
    x, y = (a + b ** m * t) * np.exp(m * t), b * np.exp(t)
    values = np.abs(x) ** 2 + np.abs(y) ** 2 - 1
    return int(np.count_nonzero(np.sign(values[1:]) != np.sign(values[:-1])))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_resonant_leaves(m):
    """
    F_m の頂点の残差、横断性の余裕の下界、球面の制約式の解の個数
    """
    germ = resonant_germ(m)
    for start in sphere_starts(2, 5, seed=m, axis_reject=0.5):
        traj = trace_through(germ, start, t_max=100.0)
        apex = resonant_apex(traj, m)
        assert apex.residual < 1e-6, f"m = {m}, 開始点 {start}"
        assert apex_residual(apex.point[0], apex.point[1], m) < 1e-6

        bound = 1 - np.max(traj.radii[:, 0] * traj.radii[:, 1] ** m)
        assert traj.transversality_margin >= bound - 1e-6

        a, b = start
        for t_R in (-0.4, 0.0, 0.2):
            roots = sphere_constraint_solve(a, b, m, t_R)
            assert len(roots) == sign_change_count(a, b, m, t_R), f"m = {m}, t_R = {t_R}"


@pytest.mark.parametrize("lambdas, axis", [
    ((Fraction(1, 2), 1), 'x'),
    ((Fraction(2, 3), 1), 'y'),
])
def test_holonomy_involution(lambdas, axis):
    """
    乗数が -1 になる閉じた葉のまわりのホロノミー
    """
    estimate = holonomy_estimate(diagonal(*lambdas), axis, t_max=200.0)
    print(f"λ = {lambdas}, 軸 {axis}: 乗数 {estimate.multiplier:.9g}")
    assert abs(estimate.multiplier + 1) < 1e-3
    assert estimate.order == 2


@pytest.mark.parametrize("value", [gaussian(2, 1), gaussian(1, -3)])
def test_generic_leaves(value):
    """
    λ が実数でない場合は半径が単調で、トーラス作用で葉層が保たれる
    """
    germ = diagonal(value, 1)
    for k, start in enumerate(sphere_starts(2, 20, seed=8, axis_reject=0.1)):
        traj = trace_leaf(germ, start, t_max=5.0)
        assert torus_radius_profile(traj).kind == MONOTONE, f"開始点 {start}"
        if k < 5:
            assert s1s1_invariance_check(germ, start, 0.7, -1.3, t_max=5.0) < 1e-6

"""
共鳴・正規形・分類・n 次元の判定の受け入れテスト (代数的な部分)
"""
import math
import random
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from src.foliationgerms.classifier import (EQUIVALENT, GENERIC, IRRATIONAL, NOT_EQUIVALENT, RATIONAL, RESONANT,
                                           EquivClass2D, classify_2d, conjectured_equivalent_nd, equivalent_2d)
from src.foliationgerms.germ import GermPoly, gaussian
from src.foliationgerms.normal_form import flow_conjugacy_defect, poincare_dulac
from src.foliationgerms.resonance import enumerate_resonances, is_resonant
from src.foliationgerms.resonant_leaf import resonant_germ
from src.foliationgerms.spectral import poincare_check, to_complex


def diagonal(*values) -> GermPoly:
    n = len(values)
    return GermPoly.from_terms(n, [(k + 1, tuple(int(j == k) for j in range(n)), v) for k, v in enumerate(values)])


def random_poincare_spectrum(rng: random.Random, n: int):
    """|λ| <= 10 の Gaussian 有理数で、凸包が原点を含まない固有値"""
    while True:
        eigs = []
        for _ in range(n):
            q = rng.randint(1, 3)
            eigs.append(gaussian(Fraction(rng.randint(-10 * q, 10 * q), q), Fraction(rng.randint(-10 * q, 10 * q), q)))
        if not all(abs(to_complex(v)) <= 10 for v in eigs):
            continue
        poincare, c = poincare_check(eigs)
        # 総当たりの範囲 |m| <= max|λ|/c を小さく保つ
        if poincare and max(abs(to_complex(v)) for v in eigs) <= 4 * float(c):
            return eigs


def brute_force(eigs):
    values = [to_complex(v) for v in eigs]
    _, c = poincare_check(eigs)
    bound = math.ceil(max(abs(v) for v in values) / float(c)) + 1
    found = set()
    for m in product(range(bound + 1), repeat=len(eigs)):
        if not 1 <= sum(m) <= bound:
            continue
        total = sum((gaussian(mj) * v for mj, v in zip(m, eigs)), gaussian(0))
        for i, value in enumerate(eigs):
            if total == value:
                found.add((i, m))
    return found


def test_resonance_oracle():
    """
    200 個の乱数の固有値で共鳴の列挙が総当たりと一致する
    """
    rng = random.Random(20240601)
    for trial in range(200):
        n = rng.randint(2, 4)
        eigs = random_poincare_spectrum(rng, n)
        found = {(r.target, r.m) for r in enumerate_resonances(eigs)}
        assert found == brute_force(eigs), f"試行 {trial}: {eigs}"
    print("共鳴の列挙は 200 個すべてで総当たりと一致しました")


def random_germ(rng: random.Random, n: int) -> GermPoly:
    """対角線形部分 (右半平面の Gaussian 整数) と次数 2, 3 の乱数の項"""
    terms = []
    for k in range(n):
        terms.append((k + 1, tuple(int(j == k) for j in range(n)), gaussian(rng.randint(1, 2), rng.randint(-1, 1))))
    monomials = [m for m in product(range(4), repeat=n) if 2 <= sum(m) <= 3]
    for exps in rng.sample(monomials, 4):
        coeff = gaussian(Fraction(rng.choice([-1, 1]), 4), Fraction(rng.randint(-1, 1), 4))
        terms.append((rng.randint(1, n), exps, coeff))
    return GermPoly.from_terms(n, terms)


def test_normal_form_purity():
    """
    正規形の非線形項はすべて共鳴な単項式 (厳密な判定)
    """
    rng = random.Random(7)
    for trial in range(100):
        germ = random_germ(rng, 2 + trial % 2)
        result = poincare_dulac(germ, 3)
        assert result.path == 'exact'
        for target, exps in result.resonant_support:
            if sum(exps) >= 2:
                assert is_resonant(result.eigenvalues, target, exps), f"試行 {trial}: 成分 {target + 1}, 指数 {exps}"
        for term in result.normal.terms:
            if term.degree >= 2:
                assert is_resonant(result.eigenvalues, term.component - 1, term.exponents)


def test_normal_form_conjugacy():
    """
    半径 0.05、t ∈ [0, 1] でフローが正規形のフローと共役になる
    """
    rng = random.Random(11)
    degree = 5
    for trial in range(10):
        germ = random_germ(rng, 2 + trial % 2)
        result = poincare_dulac(germ, degree)
        direction = np.array([rng.gauss(0, 1) + 1j * rng.gauss(0, 1) for _ in range(germ.dimension)])
        w0 = 0.05 * direction / np.linalg.norm(direction)
        growth = max(to_complex(v).real for v in result.eigenvalues)
        slack = 50 * (0.05 * math.exp(growth)) ** (degree + 1)
        defect = flow_conjugacy_defect(germ, result, w0)
        assert defect < 1e-6 + slack, f"試行 {trial}: 誤差 {defect:.3e}"


JORDAN_QUARTER = GermPoly.from_terms(2, [(1, (1, 0), 1), (1, (0, 1), Fraction(1, 4)), (2, (0, 1), 1)])

CORPUS = {
    "2+i": (diagonal(gaussian(2, 1), 1), EquivClass2D(GENERIC)),
    "1-3i": (diagonal(gaussian(1, -3), 1), EquivClass2D(GENERIC)),
    "3": (diagonal(3, 1), EquivClass2D(RATIONAL, p=3, q=1)),
    "2/3": (diagonal(2, 3), EquivClass2D(RATIONAL, p=3, q=2)),
    "3/2": (diagonal(3, 2), EquivClass2D(RATIONAL, p=3, q=2)),
    "sqrt2": (diagonal(math.sqrt(2), 1.0), EquivClass2D(IRRATIONAL, value=math.sqrt(2))),
    "F1": (resonant_germ(1), EquivClass2D(RESONANT, m=1)),
    "F2": (resonant_germ(2), EquivClass2D(RESONANT, m=2)),
    "F3": (resonant_germ(3), EquivClass2D(RESONANT, m=3)),
    "Jordan": (JORDAN_QUARTER, EquivClass2D(RESONANT, m=1)),
}


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_class_table(name):
    """
    固定した germ の同値類の表
    """
    germ, expected = CORPUS[name]
    cls = classify_2d(germ)
    print(f"{name}: {cls.label()}")
    assert cls == expected


@pytest.mark.parametrize("first, second, expected", [
    ("2+i", "1-3i", True),
    ("2/3", "3/2", True),
    ("F2", "F3", False),
    ("3", "F2", False),
    ("Jordan", "F1", True),
])
def test_equivalence_table(first, second, expected):
    result = equivalent_2d(CORPUS[first][0], CORPUS[second][0])
    assert result.equivalent is expected, result.certificate


def test_diag_two_one_not_f2():
    assert equivalent_2d(diagonal(2, 1), resonant_germ(2)).equivalent is False


def random_independent_triple(rng: random.Random):
    """偏角が互いに異なる右半平面の Gaussian 整数 3 つ"""
    while True:
        eigs = [gaussian(rng.randint(1, 5), rng.randint(-5, 5)) for _ in range(3)]
        angles = [math.atan2(to_complex(v).imag, to_complex(v).real) for v in eigs]
        if min(abs(a - b) for i, a in enumerate(angles) for b in angles[i + 1:]) > 1e-6:
            return eigs


def with_resonant_terms(rng: random.Random, eigs) -> GermPoly:
    """対角線形部分に、見つかった非自明な共鳴項を乱数の係数で加える"""
    n = len(eigs)
    terms = [(k + 1, tuple(int(j == k) for j in range(n)), v) for k, v in enumerate(eigs)]
    for resonance in enumerate_resonances(eigs):
        if not resonance.trivial:
            terms.append((resonance.target + 1, resonance.m, gaussian(rng.randint(1, 3), rng.randint(-2, 2))))
    return GermPoly.from_terms(n, terms)


def test_nd_oracle():
    """
    n 次元の予想に基づく判定
    """
    verdict = conjectured_equivalent_nd(diagonal(1, 2, gaussian(0, 1)), diagonal(gaussian(0, 1), 1, 2))
    assert verdict.result == EQUIVALENT

    rng = random.Random(3)
    for _ in range(20):
        first = with_resonant_terms(rng, random_independent_triple(rng))
        second = with_resonant_terms(rng, random_independent_triple(rng))
        assert conjectured_equivalent_nd(first, second).result == EQUIVALENT

    # 半直線配置の大きさが (2, 1) と (1, 1, 1)
    verdict = conjectured_equivalent_nd(diagonal(1, 2, gaussian(0, 1)), diagonal(1, gaussian(1, 1), gaussian(0, 1)))
    assert verdict.result == NOT_EQUIVALENT


def test_poincare_constant():
    """
    100 個の乱数の固有値で |Σλ_i t_i| >= c Σt_i が成り立ち、10^-6 以内で等号に近づく
    """
    rng = np.random.default_rng(5)
    checked = 0
    while checked < 100:
        n = int(rng.integers(2, 5))
        eigs = rng.normal(size=n) + 1j * rng.normal(size=n)
        poincare, c = poincare_check(list(eigs))
        if not poincare:
            continue
        t = rng.dirichlet(np.ones(n), size=10000)
        assert np.abs(t @ eigs).min() >= c * (1 - 1e-12)
        s = np.linspace(0.0, 1.0, 200001)
        best = min(np.abs(s * a + (1 - s) * b).min() for a in eigs for b in eigs)
        assert abs(best - c) < 1e-6
        checked += 1


if __name__ == '__main__':
    test_resonance_oracle()

"""
位相同値性の判定のテスト
"""
import unittest
import math
from fractions import Fraction
from itertools import product

from src.foliationgerms.classifier import (EQUIVALENT, GENERIC, IRRATIONAL, NOT_EQUIVALENT, RATIONAL, RESONANT,
                                           UNKNOWN, EquivClass2D, class_signature, classify_2d,
                                           conjectured_equivalent_nd, decide_rationality, equivalent_2d,
                                           pairwise_R_independent, restrict_to_coordinates)
from src.foliationgerms.errors import DimensionError, RationalityUndecidedError
from src.foliationgerms.germ import GermPoly, gaussian, scale_germ, serialize_germ, swap_coordinates
from src.foliationgerms.normal_form import linear_change
from src.foliationgerms.resonant_leaf import resonant_germ
from src.foliationgerms.spectral import LinearPart


def diagonal(*values) -> GermPoly:
    n = len(values)
    return GermPoly.from_terms(n, [(i + 1, tuple(int(i == j) for j in range(n)), v) for i, v in enumerate(values)])


def g(re, im=0):
    return gaussian(Fraction(re), Fraction(im))


JORDAN_QUARTER = GermPoly.from_terms(2, [(1, (1, 0), 1), (1, (0, 1), Fraction(1, 4)), (2, (0, 1), 1)])


class TestDecideRationality(unittest.TestCase):
    """
    連分数による有理性判定のテストケース
    """

    def test_rational(self):
        decision = decide_rationality(0.5)
        self.assertEqual(decision.fraction, Fraction(1, 2))
        decision = decide_rationality(1 / 3)
        self.assertEqual(decision.fraction, Fraction(1, 3))
        self.assertEqual(decision.witness, (1, 3))
        self.assertLess(decision.error, 1e-12)

    def test_irrational(self):
        decision = decide_rationality(math.sqrt(2))
        self.assertIsNone(decision.fraction)
        self.assertLessEqual(decision.witness[1], 1000000)
        self.assertGreater(decision.error, 1e-9)

    def test_undecided(self):
        with self.assertRaises(RationalityUndecidedError) as cm:
            decide_rationality(1 / 3 + 1e-11)
        self.assertEqual(cm.exception.witness, (1, 3))
        self.assertLess(cm.exception.error, 1e-9)

    def test_denominator_cap(self):
        """
        分母の上限を超える有理数は有理数と判定されない
        """
        decision = decide_rationality(1 / 1009, max_denominator=1000, undecided_band=0.0)
        self.assertIsNone(decision.fraction)


class TestClassify2D(unittest.TestCase):
    """
    2 次元の分類のテストケース
    """

    def test_examples(self):
        self.assertEqual(classify_2d(diagonal(g(2, 1), 1)).tag, GENERIC)
        self.assertEqual(classify_2d(resonant_germ(2)), EquivClass2D(RESONANT, m=2))
        self.assertEqual(classify_2d(JORDAN_QUARTER), EquivClass2D(RESONANT, m=1))
        self.assertEqual(classify_2d(diagonal(3, 1)), EquivClass2D(RATIONAL, p=3, q=1))
        self.assertEqual(classify_2d(diagonal(1, 1)), EquivClass2D(RATIONAL, p=1, q=1))
        self.assertEqual(classify_2d(diagonal(2, 3)), EquivClass2D(RATIONAL, p=3, q=2))

    def test_numeric_irrational(self):
        cls = classify_2d(diagonal(math.sqrt(2), 1.0))
        self.assertEqual(cls.tag, IRRATIONAL)
        self.assertFalse(cls.exact)
        self.assertAlmostEqual(cls.value, math.sqrt(2), places=12)
        self.assertIsNotNone(cls.witness)
        self.assertIn("witness", cls.to_json())

    def test_algebraic_irrational(self):
        """
        判別式が平方でない厳密な germ は厳密に無理数と判定する
        """
        germ = GermPoly.from_terms(2, [(1, (1, 0), 2), (1, (0, 1), 1), (2, (1, 0), 1), (2, (0, 1), 1)])
        cls = classify_2d(germ)
        self.assertEqual(cls.tag, IRRATIONAL)
        self.assertTrue(cls.exact)
        self.assertAlmostEqual(cls.value, (7 + 3 * math.sqrt(5)) / 2, places=9)
        self.assertIn("sqrt(5)", cls.expression)

    def test_numeric_rational(self):
        cls = classify_2d(diagonal(0.75, 1.0))
        self.assertEqual(cls, EquivClass2D(RATIONAL, p=4, q=3))
        self.assertFalse(cls.exact)

    def test_undecided(self):
        with self.assertRaises(RationalityUndecidedError):
            classify_2d(diagonal(1.0, 1 / 3 + 1e-11))

    def test_dimension(self):
        with self.assertRaises(DimensionError):
            classify_2d(diagonal(1, 2, 3))

    def test_invariance(self):
        """
        座標の入れ替え・定数倍・線形座標変換・非共鳴項の追加で同値類が変わらないかのテスト
        """
        pool = [diagonal(g(2, 1), 1), resonant_germ(2), resonant_germ(3), diagonal(3, 1), diagonal(5, 2),
                JORDAN_QUARTER]
        conjugators = [LinearPart.from_rows([[1, 1], [0, 1]]), LinearPart.from_rows([[2, -1], [1, 1]])]
        for germ in pool:
            expected = classify_2d(germ)
            with self.subTest(germ=str(germ)):
                self.assertEqual(classify_2d(swap_coordinates(germ)), expected)
                self.assertEqual(classify_2d(scale_germ(germ, g(2, 3))), expected)
                for P in conjugators:
                    self.assertEqual(classify_2d(linear_change(germ, P)), expected)

        # F_m に非共鳴項を足しても Resonant(m) のまま
        extra = GermPoly.from_terms(2, [(1, (1, 0), 2), (1, (0, 2), 1), (2, (0, 1), 1),
                                       (1, (1, 1), 1), (1, (2, 0), 3), (2, (1, 1), 2), (2, (0, 2), 5)])
        self.assertEqual(classify_2d(extra), EquivClass2D(RESONANT, m=2))
        # 共鳴項の無い λ=2 の germ に非共鳴項を足しても Rational(2,1) のまま
        rational = GermPoly.from_terms(2, [(1, (1, 0), 2), (2, (0, 1), 1), (1, (1, 1), 1), (1, (2, 0), 3),
                                           (2, (1, 1), 2), (2, (0, 2), 5)])
        self.assertEqual(classify_2d(rational), EquivClass2D(RATIONAL, p=2, q=1))


class TestEquivalent2D(unittest.TestCase):
    """
    2 次元の同値判定のテストケース
    """

    def test_examples(self):
        self.assertTrue(equivalent_2d(diagonal(2, 3), diagonal(3, 2)).equivalent)
        self.assertFalse(equivalent_2d(resonant_germ(2), resonant_germ(3)).equivalent)
        self.assertTrue(equivalent_2d(diagonal(g(2, 1), 1), diagonal(g(1, -3), 1)).equivalent)
        result = equivalent_2d(diagonal(2, 1), resonant_germ(2))
        self.assertFalse(result.equivalent)
        self.assertEqual([cls.tag for cls in result.classes], [RATIONAL, RESONANT])

    def test_undecided(self):
        result = equivalent_2d(diagonal(1.0, 1 / 3 + 1e-11), diagonal(3, 1))
        self.assertIsNone(result.equivalent)
        self.assertIsNone(result.classes[0])
        self.assertEqual(result.classes[1].tag, RATIONAL)

    def test_equivalence_relation(self):
        pool = [diagonal(2, 3), diagonal(3, 2), diagonal(6, 4), resonant_germ(2), resonant_germ(1), JORDAN_QUARTER,
                diagonal(g(2, 1), 1), diagonal(g(1, 1), 3), diagonal(math.sqrt(2), 1.0),
                diagonal(1.0, math.sqrt(2)), diagonal(1, 1)]
        relation = {(i, j): equivalent_2d(a, b).equivalent
                    for (i, a), (j, b) in product(enumerate(pool), repeat=2)}
        for i in range(len(pool)):
            self.assertTrue(relation[(i, i)])
        for i, j in product(range(len(pool)), repeat=2):
            self.assertEqual(relation[(i, j)], relation[(j, i)])
        for i, j, k in product(range(len(pool)), repeat=3):
            if relation[(i, j)] and relation[(j, k)]:
                self.assertTrue(relation[(i, k)])
        self.assertTrue(relation[(0, 2)])
        self.assertTrue(relation[(8, 9)])
        self.assertFalse(relation[(4, 10)])

    def test_irrational_tolerance(self):
        a = EquivClass2D(IRRATIONAL, value=math.sqrt(2), exact=False)
        b = EquivClass2D(IRRATIONAL, value=math.sqrt(2) * (1 + 1e-12), exact=False)
        c = EquivClass2D(IRRATIONAL, value=math.sqrt(3), exact=False)
        self.assertEqual(a, b)
        self.assertNotEqual(a, c)
        self.assertEqual(a.label(), "Irrational(1.41421356237)")


class TestConjecturedEquivalentND(unittest.TestCase):
    """
    n 次元の予想に基づく判定のテストケース
    """

    def test_same_ray_parts(self):
        verdict = conjectured_equivalent_nd(diagonal(1, 2, g(0, 1)), diagonal(g(0, 1), 1, 2))
        self.assertEqual(verdict.result, EQUIVALENT)
        self.assertTrue(any("Rational(2,1)" in reason for reason in verdict.reasons))

    def test_pairwise_independent(self):
        verdict = conjectured_equivalent_nd(diagonal(1, g(2, 1), g(1, 2)), diagonal(3, g(1, 1), g(4, -1)))
        self.assertEqual(verdict.result, EQUIVALENT)

    def test_ray_sizes_differ(self):
        verdict = conjectured_equivalent_nd(diagonal(1, 2, g(0, 1)), diagonal(1, g(1, 1), g(0, 1)))
        self.assertEqual(verdict.result, NOT_EQUIVALENT)

    def test_dimension_differs(self):
        verdict = conjectured_equivalent_nd(diagonal(1, 2), diagonal(1, 2, 3))
        self.assertEqual(verdict.result, NOT_EQUIVALENT)

    def test_part_differs(self):
        verdict = conjectured_equivalent_nd(diagonal(1, 2, g(0, 1)), diagonal(1, 3, g(0, 1)))
        self.assertEqual(verdict.result, NOT_EQUIVALENT)

    def test_reversed_orientation(self):
        """
        半直線配置を逆順にして一致する場合
        """
        verdict = conjectured_equivalent_nd(diagonal(1, 2, g(0, 1)), diagonal(1, g(0, 2), g(0, 1)))
        self.assertEqual(verdict.result, EQUIVALENT)

    def test_diagonal_linear_parts(self):
        self.assertEqual(conjectured_equivalent_nd(diagonal(1, 2, 4), diagonal(2, 4, 8)).result, EQUIVALENT)
        self.assertEqual(conjectured_equivalent_nd(diagonal(1, 2, 4), diagonal(1, 2, 5)).result, NOT_EQUIVALENT)

    def test_unknown(self):
        """
        3 点の部分に共鳴項がある場合は判定しない
        """
        germ = GermPoly.from_terms(3, [(1, (1, 0, 0), 1), (2, (0, 1, 0), 2), (3, (0, 0, 1), 3), (3, (1, 1, 0), 1)])
        verdict = conjectured_equivalent_nd(germ, germ)
        self.assertEqual(verdict.result, UNKNOWN)

    def test_pairwise_R_independent(self):
        self.assertFalse(pairwise_R_independent([g(1), g(2), g(0, 1)]))
        self.assertTrue(pairwise_R_independent([g(1), g(0, 1), g(-1, 1)]))
        self.assertFalse(pairwise_R_independent([g(1, 1), g(2, 2)]))

    def test_restrict_to_coordinates(self):
        germ = GermPoly.from_terms(3, [(1, (1, 0, 0), 1), (2, (0, 1, 0), 2), (3, (0, 0, 1), 3),
                                       (3, (1, 1, 0), 1), (1, (0, 0, 2), 1)])
        restricted = restrict_to_coordinates(germ, (0, 2))
        expected = GermPoly.from_terms(2, [(1, (1, 0), 1), (2, (0, 1), 3), (1, (0, 2), 1)])
        self.assertEqual(serialize_germ(restricted), serialize_germ(expected))


class TestClassSignature(unittest.TestCase):
    """
    同値類から予想される性質のテストケース
    """

    def test_signature(self):
        self.assertEqual(class_signature(EquivClass2D(GENERIC)), {"closed_leaves": "axes", "profile": "Monotone"})
        self.assertEqual(class_signature(EquivClass2D(RATIONAL, p=2, q=1))["closed_leaves"], "all")
        self.assertEqual(class_signature(EquivClass2D(IRRATIONAL, value=2.5))["profile"], "Constant")
        self.assertEqual(class_signature(EquivClass2D(RESONANT, m=2)), {"closed_leaves": "y=0", "profile": "UniqueMax"})


if __name__ == '__main__':
    unittest.main()

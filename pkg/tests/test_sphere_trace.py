"""
球面上の交差葉層のトレースと不変量のテスト
"""
import unittest
import math

import numpy as np

from src.foliationgerms.errors import (DimensionError, HolonomyNoReturnError, InsufficientCrossingsError,
                                       ProfileAmbiguousError, TangencyError)
from src.foliationgerms.germ import GermPoly, gaussian
from src.foliationgerms.sphere_trace import (CONSTANT, MONOTONE, UNIQUE_MAX, Closed, NotClosed, Trajectory,
                                             closed_leaf_census, detect_closure, disk_transversality_margin,
                                             extended_slope_estimate, holonomy_estimate, holonomy_order,
                                             intersection_direction, orientation_self_test, s1s1_invariance_check,
                                             slope_estimate, sphere_point, torus_radius_profile, trace_leaf, trace_many,
                                             trace_report, trace_through)


def diagonal(l1, l2) -> GermPoly:
    return GermPoly.from_terms(2, [(1, (1, 0), l1), (2, (0, 1), l2)])


def synthetic(radii) -> Trajectory:
    """半径だけを与えた軌道 (プロファイルの判定用)"""
    radii = np.asarray(radii, dtype=float)
    points = radii.astype(complex)
    count = len(radii)
    return Trajectory(diagonal(1, 1), np.arange(count, dtype=float), points, np.zeros_like(radii),
                      radii, np.ones(count), (True, True), 1e-9)


START = (0.6, 0.8)


class TestIntersectionDirection(unittest.TestCase):
    """
    交差葉層の方向場のテストケース
    """

    def test_tangent_and_unit(self):
        """
        方向が球面に接する単位ベクトルになるかのテスト
        """
        z = np.array(START, dtype=complex)
        w = intersection_direction(diagonal(2, 1), z)
        self.assertAlmostEqual(np.linalg.norm(w), 1.0, places=14)
        self.assertAlmostEqual(float(np.real(np.vdot(z, w))), 0.0, places=14)
        np.testing.assert_allclose(w, 1j * np.array([1.2, 0.8]) / math.sqrt(2.08), atol=1e-14)

    def test_tangency(self):
        """
        Poincaré 型でない germ では葉が球面に接する点があるかのテスト
        """
        with self.assertRaises(TangencyError) as cm:
            intersection_direction(diagonal(1, -1), np.array([1, 1]) / math.sqrt(2))
        self.assertLess(cm.exception.margin, 1e-9)
        with self.assertRaises(TangencyError):
            trace_leaf(diagonal(1, -1), [1, 1], t_max=1.0)

    def test_dimension(self):
        with self.assertRaises(DimensionError):
            intersection_direction(diagonal(2, 1), np.ones(3))
        with self.assertRaises(ValueError):
            sphere_point([0, 0])

    def test_orientation(self):
        """
        λ = 1 の葉が反時計回りに回るかの自己診断
        """
        orientation_self_test()


class TestTrace(unittest.TestCase):
    """
    葉のトレースと閉包判定のテストケース
    """

    def test_rational_leaf_closes(self):
        """
        λ = 2 の対角 germ の葉は周期 2π|θ| で閉じ、巻き数は (2, 1)
        """
        traj = trace_leaf(diagonal(2, 1), START, t_max=20.0)
        np.testing.assert_allclose(traj.radii, np.tile(START, (len(traj.times), 1)), atol=1e-7)
        closure = detect_closure(traj)
        self.assertIsInstance(closure, Closed)
        self.assertAlmostEqual(closure.period, 2 * math.pi * math.sqrt(2.08), delta=1e-5)
        self.assertEqual(closure.windings, (2, 1))
        self.assertLess(closure.residual, 1e-6)
        self.assertTrue(closure.to_json()["closed"])

    def test_irrational_leaf_not_closed(self):
        closure = detect_closure(trace_leaf(diagonal(math.sqrt(2), 1), START, t_max=30.0))
        self.assertIsInstance(closure, NotClosed)
        self.assertGreater(closure.min_return_distance, 1e-6)

    def test_backward_and_through(self):
        """
        後ろ向きのトレースが時刻 [-t_max, 0] の軌道になるかのテスト
        """
        germ = diagonal(2, 1)
        before = trace_leaf(germ, START, t_max=3.0, backward=True)
        self.assertAlmostEqual(before.times[0], -3.0, places=12)
        self.assertEqual(before.times[-1], 0.0)
        np.testing.assert_allclose(before.points[-1], START, atol=1e-15)
        speed = np.array([2.0, 1.0]) / math.sqrt(2.08)
        np.testing.assert_allclose(before.points[0], np.array(START) * np.exp(-3j * speed), atol=1e-7)

        through = trace_through(germ, START, t_max=3.0)
        self.assertTrue(np.all(np.diff(through.times) > 0))
        self.assertAlmostEqual(through.times[0], -3.0, places=12)
        self.assertAlmostEqual(through.times[-1], 3.0, places=12)
        index = int(np.flatnonzero(through.times == 0.0)[0])
        np.testing.assert_allclose(through.points[index], START, atol=1e-15)

    def test_at(self):
        traj = trace_leaf(diagonal(2, 1), START, t_max=2.0)
        speed = np.array([2.0, 1.0]) / math.sqrt(2.08)
        np.testing.assert_allclose(traj.at(1.234), np.array(START) * np.exp(1.234j * speed), atol=1e-8)
        np.testing.assert_allclose(traj.arg_at(1.234), 1.234 * speed, atol=1e-8)
        with self.assertRaises(ValueError):
            traj.at(5.0)

    def test_trace_many(self):
        """
        逐次実行とプロセスプールで同じ結果になるかのテスト
        """
        germ = diagonal(3, 1)
        starts = [START, (0.8, 0.6j), (0.28, 0.96)]
        sequential = trace_many(germ, starts, t_max=2.0, workers=1)
        parallel = trace_many(germ, starts, t_max=2.0, workers=2)
        self.assertEqual(len(parallel), 3)
        for a, b in zip(sequential, parallel):
            np.testing.assert_allclose(a.points, b.points, atol=1e-15)
        np.testing.assert_allclose(sequential[1].points[0], [0.8, 0.6j])

    def test_census(self):
        census = closed_leaf_census(diagonal(2, 1), [START, (0.8, 0.6)], t_max=15.0, workers=1)
        self.assertEqual((census.closed, census.not_closed), (2, 0))
        self.assertEqual(census.to_json()["closed"], 2)


class TestProfileAndSlope(unittest.TestCase):
    """
    半径のプロファイルと傾きのテストケース
    """

    def test_constant(self):
        profile = torus_radius_profile(trace_leaf(diagonal(2, 1), START, t_max=5.0))
        self.assertEqual(profile.kind, CONSTANT)
        self.assertAlmostEqual(profile.radius, 0.6, places=8)

    def test_monotone(self):
        """
        λ = (1, i) では |x| が狭義に増加する
        """
        germ = GermPoly.from_terms(2, [(1, (1, 0), 1), (2, (0, 1), gaussian(0, 1))])
        profile = torus_radius_profile(trace_leaf(germ, START, t_max=3.0))
        self.assertEqual(profile.kind, MONOTONE)
        self.assertTrue(profile.increasing)
        backward = torus_radius_profile(trace_leaf(germ, START, t_max=3.0, backward=True))
        self.assertEqual(backward.kind, MONOTONE)
        self.assertTrue(backward.increasing)

    def test_synthetic_profiles(self):
        """
        半径の列からの分類テスト
        """
        x = np.linspace(0.9, 0.5, 9)
        y = np.array([0.1, 0.3, 0.5, 0.7, 0.8, 0.7, 0.5, 0.3, 0.1])
        rx = np.array([0.9, 0.8, 0.7, 0.6, 0.5, 0.6, 0.7, 0.8, 0.9])
        self.assertEqual(torus_radius_profile(synthetic(np.column_stack([x, y]))).kind, MONOTONE)
        profile = torus_radius_profile(synthetic(np.column_stack([rx, y])))
        self.assertEqual(profile.kind, UNIQUE_MAX)
        self.assertEqual(profile.apex_index, 4)

        wobble = np.array([0.5, 0.6, 0.5, 0.6, 0.5, 0.6, 0.5, 0.6, 0.5])
        with self.assertRaises(ProfileAmbiguousError):
            torus_radius_profile(synthetic(np.column_stack([wobble, wobble])))

    def test_slope(self):
        """
        λ = 3 の対角 germ では傾きが 3 になるかのテスト
        """
        start = (0.1 * np.exp(0.5j), math.sqrt(0.99))
        traj = trace_leaf(diagonal(3, 1), start, t_max=60.0)
        self.assertAlmostEqual(slope_estimate(traj, min_crossings=5), 3.0, places=9)
        with self.assertRaises(InsufficientCrossingsError):
            slope_estimate(trace_leaf(diagonal(3, 1), start, t_max=5.0), min_crossings=5)

    def test_extended_slope_near_axis(self):
        """
        x 軸に近い開始点では |θ| が大きく y の偏角がゆっくり回るので、トレースを延ばして交差回数を揃えるかのテスト
        """
        golden = (1 + math.sqrt(5)) / 2
        traj = trace_leaf(diagonal(golden, 1.0), (0.999, 0.0447101), t_max=20.0, step_tol=1e-7)
        with self.assertRaises(InsufficientCrossingsError):
            slope_estimate(traj, min_crossings=10)
        with self.assertRaises(InsufficientCrossingsError):
            extended_slope_estimate(traj, min_crossings=10, max_extensions=0)

        slope, extended = extended_slope_estimate(traj, min_crossings=10)
        self.assertLess(abs(slope - golden), 0.1)
        self.assertGreater(extended.duration, traj.duration)
        self.assertEqual(extended.step_tol, 1e-7)
        np.testing.assert_allclose(extended.points[0], traj.points[0])

    def test_report(self):
        report = trace_report(trace_leaf(diagonal(2, 1), START, t_max=15.0))
        self.assertTrue(report.closure.closed)
        self.assertEqual(report.torus_profile.kind, CONSTANT)
        # 既定の交差回数には届かない
        self.assertIsNone(report.slope_estimate)
        self.assertGreater(report.transversality_margin, 1.0)


class TestHolonomy(unittest.TestCase):
    """
    ホロノミーとトーラス作用のテストケース
    """

    def test_multiplier(self):
        """
        λ = (1, 3) の葉 {x=0} のまわりの乗数は e^{2πi/3}
        """
        estimate = holonomy_estimate(diagonal(1, 3), 'x', t_max=20.0)
        self.assertLess(abs(estimate.multiplier - np.exp(2j * math.pi / 3)), 1e-6)
        self.assertLess(estimate.residual, 1e-6)
        self.assertEqual(estimate.order, 3)
        self.assertEqual(len(estimate.samples), 5)

    def test_no_return(self):
        with self.assertRaises(HolonomyNoReturnError):
            holonomy_estimate(diagonal(1, 3), 'x', t_max=1.0)

    def test_arguments(self):
        with self.assertRaises(ValueError):
            holonomy_estimate(diagonal(1, 3), 'z', t_max=1.0)
        with self.assertRaises(ValueError):
            holonomy_estimate(diagonal(1, 3), 'x', radii=3, t_max=1.0)

    def test_order(self):
        self.assertEqual(holonomy_order(1j), 4)
        self.assertEqual(holonomy_order(-1), 2)
        self.assertIsNone(holonomy_order(np.exp(2j * math.pi * math.sqrt(2))))

    def test_s1s1_invariance(self):
        """
        対角線形な germ の交差葉層はトーラス作用で保たれる
        """
        deviation = s1s1_invariance_check(diagonal(2, 1), START, 0.7, -1.3, t_max=5.0)
        self.assertLess(deviation, 1e-6)
        resonant = GermPoly.from_terms(2, [(1, (1, 0), 2), (1, (0, 2), 1), (2, (0, 1), 1)])
        with self.assertRaises(ValueError):
            s1s1_invariance_check(resonant, START, 0.7, -1.3)

    def test_disk_margin(self):
        margin = disk_transversality_margin(diagonal(2, 1), 'x', 0.0, 0.5)
        self.assertGreater(margin, 0.0)
        with self.assertRaises(ValueError):
            disk_transversality_margin(diagonal(2, 1), 'x', 0.0, 1.0)


if __name__ == '__main__':
    unittest.main()

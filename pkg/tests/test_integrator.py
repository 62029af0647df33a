"""
射影付き RKF45 積分のテスト
"""
import unittest
import math

import numpy as np

from src.foliationgerms.errors import StepCollapseError
from src.foliationgerms.integrator import ProjectedRKF45, fehlberg_step, project, unwrap_step


def rotation_field(rates):
    """ż_k = i·rate_k·z_k (ノルムを保つ回転)"""
    rates = np.asarray(rates, dtype=float)
    return lambda z: 1j * rates * z


class TestFehlbergStep(unittest.TestCase):
    """
    1 ステップの Fehlberg 公式のテストケース
    """

    def test_order(self):
        """
        ż = -z の局所誤差が h^6 程度で減るかのテスト
        """
        z = np.array([1.0 + 0.0j])
        errors = []
        for h in (0.4, 0.2):
            high, estimate = fehlberg_step(lambda w: -w, z, h)
            errors.append(abs(high[0] - math.exp(-h)))
            self.assertGreater(estimate, 0.0)
        self.assertGreater(errors[0] / errors[1], 30.0)

    def test_project_and_unwrap(self):
        z = project(np.array([3.0, 4.0j]))
        self.assertAlmostEqual(np.linalg.norm(z), 1.0, places=15)
        increments = unwrap_step(np.array([1.0, 1j]), np.array([1j, -1.0]))
        np.testing.assert_allclose(increments, [math.pi / 2, math.pi / 2])


class TestProjectedRKF45(unittest.TestCase):
    """
    適応積分のテストケース
    """

    def test_rotation_exact(self):
        """
        回転の流れが厳密解と一致し、偏角が連続に追跡されるかのテスト
        """
        rates = [2.0, 1.0]
        z0 = np.array([0.6, 0.8], dtype=complex)
        result = ProjectedRKF45(rotation_field(rates), 1e-11, math.pi / 4, 1e-6).integrate(z0, 10.0)
        self.assertAlmostEqual(result.times[-1], 10.0, places=12)
        self.assertFalse(result.stopped)
        self.assertEqual(result.reliable, (True, True))
        exact = z0 * np.exp(1j * np.array(rates) * 10.0)
        np.testing.assert_allclose(result.points[-1], exact, atol=1e-7)
        np.testing.assert_allclose(result.args[-1], np.array(rates) * 10.0, atol=1e-7)
        np.testing.assert_allclose(np.linalg.norm(result.points, axis=1), 1.0, atol=1e-14)
        self.assertTrue(np.all(np.diff(result.times) > 0))

    def test_max_arg_step(self):
        """
        1 ステップで偏角が max_arg_step を超えて進まないかのテスト
        """
        result = ProjectedRKF45(rotation_field([40.0, 1.0]), 1e-6, math.pi / 4, 1e-6).integrate(
            np.array([0.6, 0.8], dtype=complex), 2.0)
        self.assertTrue(np.all(np.abs(np.diff(result.args[:, 0])) <= math.pi / 4 + 1e-12))
        self.assertAlmostEqual(result.args[-1, 0], 80.0, delta=1e-3)

    def test_axis_suspend(self):
        """
        軸上の座標は偏角を追跡しないかのテスト
        """
        result = ProjectedRKF45(rotation_field([1.0, 1.0]), 1e-10, math.pi / 4, 1e-6).integrate(
            np.array([1.0, 0.0], dtype=complex), 1.0)
        self.assertEqual(result.reliable, (True, False))
        self.assertTrue(np.all(np.isnan(result.args[:, 1])))

    def test_until(self):
        """
        停止条件で打ち切られるかのテスト
        """
        result = ProjectedRKF45(rotation_field([1.0, 2.0]), 1e-10, math.pi / 4, 1e-6).integrate(
            np.array([0.6, 0.8], dtype=complex), 10.0, until=lambda t, z, args: t >= 1.0)
        self.assertTrue(result.stopped)
        self.assertGreaterEqual(result.times[-1], 1.0)
        self.assertLess(result.times[-1], 10.0)

    def test_step_collapse(self):
        """
        方向場が有限でない場合にステップ幅が潰れるかのテスト
        """
        stepper = ProjectedRKF45(lambda z: np.full_like(z, np.nan), 1e-9, math.pi / 4, 1e-6)
        with self.assertRaises(StepCollapseError):
            stepper.integrate(np.array([0.6, 0.8], dtype=complex), 1.0)

    def test_step_without_control(self):
        stepper = ProjectedRKF45(rotation_field([1.0, 1.0]), 1e-9, math.pi / 4, 1e-6)
        z = np.array([0.6, 0.8], dtype=complex)
        np.testing.assert_array_equal(stepper.step(z, 0.0), z)
        np.testing.assert_allclose(stepper.step(z, 0.1), z * np.exp(0.1j), atol=1e-10)


if __name__ == '__main__':
    unittest.main()

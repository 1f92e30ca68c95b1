#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
PML 阻尼剖面测试
"""

import math
import os
import sys
import unittest

import numpy as np

# 添加src目录到路径
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from acoustics.pml import PmlSpec, damping_profile, pml_coefficients, xi_hat
from utils.common import DomainError


class TestDampingProfile(unittest.TestCase):
    """ξ(x) 剖面"""

    def test_strength(self):
        self.assertAlmostEqual(xi_hat(345.0, 0.1, 1e-4), 3450.0 * math.log(1e4), places=8)
        self.assertEqual(xi_hat(345.0, 0.1, 1.0), 0.0)
        with self.assertRaises(DomainError):
            xi_hat(345.0, 0.0, 1e-4)
        with self.assertRaises(DomainError):
            xi_hat(345.0, 0.1, 0.0)

    def test_profile_shape(self):
        strength = xi_hat(345.0, 0.1, 1e-4)
        self.assertEqual(damping_profile(strength, 0.05, 0.1, 0.1), 0.0)
        self.assertEqual(damping_profile(strength, -0.1, 0.1, 0.1), 0.0)
        self.assertAlmostEqual(damping_profile(strength, 0.2, 0.1, 0.1), strength, delta=1e-9 * strength)
        self.assertAlmostEqual(damping_profile(strength, -0.15, 0.1, 0.1), 0.5 * strength,
                               delta=1e-9 * strength)
        x = np.linspace(0.1, 0.2, 101)
        values = damping_profile(strength, x, 0.1, 0.1)
        self.assertTrue(np.all(np.diff(values) >= 0.0))
        # 入口处斜率为零
        self.assertLess(values[1], 1e-3 * strength)

    def test_outside_layer(self):
        with self.assertRaises(DomainError):
            damping_profile(100.0, 0.25, 0.1, 0.1)

    def test_coefficient_identities(self):
        coef = pml_coefficients(1.0, 2.0, 3.0)
        self.assertEqual(coef.alpha, 6.0)
        self.assertEqual(coef.beta, 11.0)
        self.assertEqual(coef.gamma, 6.0)
        self.assertEqual(coef.a, (4.0, 2.0, 0.0))
        self.assertEqual(coef.b, (6.0, 3.0, 2.0))
        zero = pml_coefficients(0.0, 0.0, 0.0)
        self.assertEqual((zero.alpha, zero.beta, zero.gamma), (0.0, 0.0, 0.0))


class TestPmlSpec(unittest.TestCase):
    """PML 几何"""

    def test_profiles_per_direction(self):
        spec = PmlSpec(center=[0.0, 0.0, 0.5], half_extent=[0.1, 0.1, 0.5],
                       width_lower=[0.05, 0.05, 0.0], width_upper=[0.05, 0.05, 0.1])
        points = np.array([[0.0, 0.0, 0.5], [0.15, 0.0, 0.5], [0.0, -0.15, 1.1], [0.0, 0.0, 0.0]])
        xi = spec.profiles(points, 345.0)
        np.testing.assert_allclose(xi[0], 0.0)
        self.assertAlmostEqual(xi[1, 0], xi_hat(345.0, 0.05, 1e-4), delta=1e-6)
        self.assertEqual(xi[1, 1], 0.0)
        self.assertAlmostEqual(xi[2, 1], xi_hat(345.0, 0.05, 1e-4), delta=1e-6)
        self.assertAlmostEqual(xi[2, 2], xi_hat(345.0, 0.1, 1e-4), delta=1e-6)
        # 下侧没有吸收层
        self.assertEqual(xi[3, 2], 0.0)

    def test_active(self):
        spec = PmlSpec(center=[0, 0, 0], half_extent=[1, 1, 1], width_lower=[0, 0, 0],
                       width_upper=[0, 0, 0])
        self.assertFalse(spec.active)
        with self.assertRaises(DomainError):
            PmlSpec(center=[0, 0, 0], half_extent=[1, 1, 1], width_lower=[-0.1, 0, 0],
                    width_upper=[0, 0, 0])


if __name__ == "__main__":
    unittest.main()

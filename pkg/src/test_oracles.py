#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试独立解析参考
"""

import math
import os
import sys
import unittest

import numpy as np

# 添加src目录到路径
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from utils.common import DomainError
from validators.oracles import (SyntheticFieldSpec, closed_duct_modes, flanged_piston_impedance,
                                quadrature_elliptic_integral, synthetic_two_point_field)


class TestOracles(unittest.TestCase):

    def test_quadrature(self):
        self.assertAlmostEqual(quadrature_elliptic_integral(0.0), 0.5 * math.pi, places=13)
        self.assertAlmostEqual(quadrature_elliptic_integral(1.0), 1.0, places=12)
        with self.assertRaises(DomainError):
            quadrature_elliptic_integral(1.2)

    def test_closed_duct_modes(self):
        np.testing.assert_allclose(closed_duct_modes(0.1), [1725.0, 3450.0, 5175.0])
        self.assertEqual(len(closed_duct_modes(0.2, n_max=5)), 5)
        with self.assertRaises(DomainError):
            closed_duct_modes(0.0)

    def test_piston_low_frequency(self):
        """小 ka：R ≈ (ka)²/2，X ≈ 8ka/(3π)"""
        for ka in (0.005, 0.01, 0.02):
            z = flanged_piston_impedance(ka)
            self.assertLess(abs(z.real / (0.5 * ka ** 2) - 1.0), 1e-3)
            self.assertLess(abs(z.imag / (8.0 * ka / (3.0 * math.pi)) - 1.0), 1e-3)

    def test_piston_high_frequency(self):
        z = flanged_piston_impedance(np.array([50.0, 100.0]))
        self.assertTrue(np.all(np.abs(z.real - 1.0) < 0.01))
        self.assertTrue(np.all(np.abs(z.imag) < 0.05))
        with self.assertRaises(DomainError):
            flanged_piston_impedance(0.0)

    def test_synthetic_field(self):
        k = np.array([10.0 - 0.5j])
        p1, p2 = synthetic_two_point_field(SyntheticFieldSpec(r0=0.0, k=k, x1=0.03, x2=0.02, amplitude=2.0))
        self.assertAlmostEqual(p1[0], 2.0 * np.exp(1j * k[0] * 0.03))
        self.assertAlmostEqual(p2[0], 2.0 * np.exp(1j * k[0] * 0.02))
        # R₀ = 1：参考面处为压力波腹
        p_ref, _ = synthetic_two_point_field(SyntheticFieldSpec(r0=1.0, k=k, x1=0.0, x2=0.01))
        self.assertAlmostEqual(p_ref[0], 2.0)
        with self.assertRaises(DomainError):
            SyntheticFieldSpec(r0=np.nan, k=k, x1=0.03, x2=0.02)


if __name__ == "__main__":
    unittest.main()

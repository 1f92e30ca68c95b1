#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
管道声学解析工具测试
"""

import math
import os
import sys
import unittest

import numpy as np
import pandas as pd

# 添加src目录到路径
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from acoustics.wavenumbers import (LossyDuctModel, centerline_limit, circular_cutoffs,
                                   classify_spacing, cutoff_table, elliptic_I, kz_circular,
                                   kz_elliptical, kz_for_section, match_admittance,
                                   sensitivity_proxy, spacing_advice)
from meshers.section import EllipseSection, make_elliptical_section
from utils.common import PROJECT_DIR, DomainError
from validators.oracles import quadrature_elliptic_integral

C0 = 345.0


class TestEllipticIntegral(unittest.TestCase):
    """I(e) 级数"""

    def test_circle(self):
        self.assertEqual(elliptic_I(0.0), 0.5 * math.pi)

    def test_against_quadrature(self):
        for e in np.round(np.arange(0.0, 0.951, 0.05), 2):
            self.assertLess(abs(elliptic_I(float(e)) - quadrature_elliptic_integral(float(e))), 1e-10,
                            f"e={e}")

    def test_reference_values(self):
        self.assertAlmostEqual(elliptic_I(0.6), 1.418083, places=5)
        self.assertAlmostEqual(elliptic_I(0.8), 1.276350, places=5)

    def test_domain(self):
        with self.assertRaises(DomainError):
            elliptic_I(1.0)
        with self.assertRaises(DomainError):
            elliptic_I(-0.1)


class TestAxialWavenumber(unittest.TestCase):
    """有损管道轴向波数"""

    def test_lossless(self):
        f = np.array([100.0, 1000.0, 5000.0])
        k0 = 2.0 * np.pi * f / C0
        model = LossyDuctModel(make_elliptical_section(1e-4, 0.7), 0.0, C0)
        np.testing.assert_array_equal(kz_elliptical(f, model), k0.astype(complex))
        np.testing.assert_array_equal(kz_circular(f, 0.01, 0.0, C0), k0.astype(complex))

    def test_circular_reference(self):
        kz = kz_circular(1000.0, 0.01, 0.01, C0)
        self.assertAlmostEqual(kz.real, 18.239, places=2)
        self.assertAlmostEqual(kz.imag, -0.9986, places=3)

    def test_elliptical_reference(self):
        a_e = 0.005 / 0.6
        model = LossyDuctModel(EllipseSection(a_e, 0.005), 0.01, C0)
        kz = kz_elliptical(1000.0, model)
        self.assertAlmostEqual(kz.real, 18.28, places=1)
        self.assertAlmostEqual(kz.imag, -1.62, places=1)

    def test_decaying_branch(self):
        f = np.linspace(50.0, 20000.0, 200)
        for mu in (0.001, 0.01, 0.1):
            kz = kz_circular(f, 0.01, mu, C0)
            self.assertTrue(np.all(kz.imag < 0))
            self.assertTrue(np.all(kz.real > 0))

    def test_elliptical_reduces_to_circular(self):
        f = np.linspace(100.0, 10000.0, 50)
        for mu in (0.001, 0.01):
            circle = LossyDuctModel(EllipseSection(0.01, 0.01), mu, C0)
            rel = np.abs(kz_elliptical(f, circle) - kz_circular(f, 0.01, mu, C0)) / np.abs(kz_circular(f, 0.01, mu, C0))
            self.assertLess(float(rel.max()), 1e-12)
            # e ≈ 1.4e-6
            nearly = LossyDuctModel(EllipseSection(0.01, 0.01 * (1.0 - 1e-12)), mu, C0)
            rel = np.abs(kz_elliptical(f, nearly) - kz_circular(f, 0.01, mu, C0)) / np.abs(kz_circular(f, 0.01, mu, C0))
            self.assertLess(float(rel.max()), 1e-6)

    def test_linear_in_admittance(self):
        im_small = kz_circular(2000.0, 0.01, 0.001, C0).imag
        im_large = kz_circular(2000.0, 0.01, 0.01, C0).imag
        self.assertAlmostEqual(im_large / im_small, 10.0, delta=0.1)
        self.assertAlmostEqual(im_large, -0.01 / 0.01, delta=0.01)

    def test_dispatch(self):
        circle = LossyDuctModel(EllipseSection(0.01, 0.01), 0.01, C0)
        self.assertEqual(kz_for_section(1000.0, circle), kz_circular(1000.0, 0.01, 0.01, C0))

    def test_invalid_frequency(self):
        with self.assertRaises(DomainError):
            kz_circular(0.0, 0.01, 0.01, C0)
        with self.assertRaises(DomainError):
            kz_circular(100.0, 0.0, 0.01, C0)

    def test_hard_wall_advisory(self):
        model = LossyDuctModel(EllipseSection(0.01, 0.01), 0.1, C0)
        model.check_hard_wall(100.0)
        self.assertEqual(len(model.warnings), 1)
        quiet = LossyDuctModel(EllipseSection(0.01, 0.01), 0.01, C0)
        quiet.check_hard_wall(1000.0)
        self.assertEqual(quiet.warnings, [])


class TestAdmittanceMatching(unittest.TestCase):
    """等吸声导纳匹配"""

    def test_trivial_cases(self):
        self.assertAlmostEqual(match_admittance(0.01, 0.5, 0.01, 0.5, 0.01), 0.01, places=15)
        self.assertAlmostEqual(match_admittance(0.01, 0.0, 0.01, 0.0, 0.02), 0.02, places=15)

    def test_circular_to_elliptical(self):
        mu_i = match_admittance(0.01, 0.0, 0.01, 0.8, 0.005)
        self.assertAlmostEqual(mu_i, 0.006153, delta=1e-6)
        baseline = LossyDuctModel(EllipseSection(0.01, 0.01), 0.01, C0)
        matched = LossyDuctModel(EllipseSection(0.005 / 0.6, 0.005), mu_i, C0)
        f = np.array([200.0, 1000.0, 4000.0, 9000.0])
        rel = np.abs(kz_elliptical(f, matched) - kz_circular(f, 0.01, 0.01, C0)) / np.abs(kz_circular(f, 0.01, 0.01, C0))
        self.assertLess(float(rel.max()), 1e-12)


class TestCutoffs(unittest.TestCase):
    """圆管截止频率"""

    def test_first_cutoff(self):
        modes = circular_cutoffs(0.01, C0)
        self.assertAlmostEqual(modes[0].f_hz, 1.8412 * C0 / (2 * math.pi * 0.01), delta=2.0)
        self.assertEqual([m.centerline_limiting for m in modes], [False, False, True])
        self.assertAlmostEqual(centerline_limit(0.01, C0), modes[2].f_hz)

    def test_scaling(self):
        small = [m.f_hz for m in circular_cutoffs(0.01, C0)]
        large = [m.f_hz for m in circular_cutoffs(0.02, C0)]
        np.testing.assert_allclose(np.array(small) / 2.0, large, rtol=1e-14)

    def test_reference_duct_ratios(self):
        table = pd.read_csv(os.path.join(PROJECT_DIR, "data", "reference_duct_eigenmodes.csv"), comment='#')
        circular = table[table['family'] == 'circular']
        modes = circular_cutoffs(0.01, C0)
        expected = [modes[1].f_hz / modes[0].f_hz, modes[2].f_hz / modes[0].f_hz]
        self.assertAlmostEqual(expected[0], 1.6588, places=3)
        self.assertAlmostEqual(expected[1], 2.0811, places=3)
        for case, group in circular.groupby('case'):
            tolerance = 0.006 if case == 'Zr_a' else 0.01
            f = group['f_khz'].to_numpy()
            ratios = [f[1] / f[0], f[2] / f[0]]
            for got, want in zip(ratios, expected):
                self.assertLess(abs(got / want - 1.0), tolerance, f"{case}: {got:.4f} vs {want:.4f}")
            self.assertEqual(group['limiting'].tolist(), [0, 0, 1])

    def test_table_rows(self):
        rows = cutoff_table(circular_cutoffs(0.01, C0))
        self.assertEqual([r['label'] for r in rows], ["(1,0)", "(2,0)", "(0,1)"])


class TestSpacingAdvice(unittest.TestCase):
    """传声器间距建议"""

    def test_ten_kilohertz(self):
        advice = spacing_advice(10000.0, C0, 0.001, a_e=0.01)
        self.assertAlmostEqual(advice.lambda_min, 0.0345, places=12)
        self.assertAlmostEqual(advice.s_opt, 0.008625, places=12)
        self.assertAlmostEqual(advice.s_min, 0.00345, places=12)
        self.assertAlmostEqual(advice.s_max, 0.0138, places=12)
        self.assertAlmostEqual(advice.x1_min, 0.021, places=12)
        ratio, inside = classify_spacing(0.01, 10000.0, C0)
        self.assertAlmostEqual(ratio, 0.2899, places=4)
        self.assertTrue(inside)

    def test_mesh_limits_spacing(self):
        self.assertAlmostEqual(spacing_advice(10000.0, C0, 0.005).s_min, 0.005)
        with self.assertRaises(DomainError):
            spacing_advice(10000.0, C0, 0.014)
        self.assertFalse(classify_spacing(0.02, 10000.0, C0)[1])

    def test_sensitivity(self):
        f = 5000.0
        half_wave = C0 / (2.0 * f)
        self.assertEqual(sensitivity_proxy(half_wave, f, C0), math.inf)
        self.assertAlmostEqual(sensitivity_proxy(0.5 * half_wave, f, C0), 1.0, places=10)
        self.assertGreater(sensitivity_proxy(0.9 * half_wave, f, C0),
                           sensitivity_proxy(0.5 * half_wave, f, C0))


if __name__ == "__main__":
    unittest.main()

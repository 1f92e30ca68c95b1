#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试配置解析与运行清单
"""

import json
import os
import sys
import tempfile
import unittest

# 添加src目录到路径
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from parsers.config_parser import (build_simulation_config, format_key_value, load_simulation_config,
                                   parse_key_value, parse_probes, read_manifest, write_manifest)
from utils.common import ConfigurationError, load_defaults

SAMPLE = """# 阻抗管仿真
c0 = 343.0
t_total=0.01   # 秒

mu_z=0.02
probes = 0,0,0.05; 0,0,0.06
track_energy = yes
dt = auto
"""


class TestKeyValue(unittest.TestCase):
    """key=value 解析"""

    def test_sample(self):
        values = parse_key_value(SAMPLE)
        self.assertEqual(values['c0'], 343.0)
        self.assertEqual(values['t_total'], 0.01)
        self.assertEqual(values['mu_z'], 0.02)
        self.assertEqual(values['probes'], [(0.0, 0.0, 0.05), (0.0, 0.0, 0.06)])
        self.assertTrue(values['track_energy'])
        self.assertIsNone(values['dt'])

    def test_errors_carry_line_numbers(self):
        cases = {
            "c0=345\nfoo=1\n": 2,
            "# x\n\nc0 345\n": 3,
            "c0=345\nc0=340\n": 2,
            "mu_z=0.01\nt_total=abc\n": 2,
            "probes=0,0\n": 1,
            "track_energy=maybe\n": 1,
        }
        for text, line_no in cases.items():
            with self.assertRaises(ConfigurationError, msg=text) as ctx:
                parse_key_value(text)
            self.assertEqual(ctx.exception.line_no, line_no)

    def test_probes(self):
        self.assertEqual(parse_probes("1,2,3;"), [(1.0, 2.0, 3.0)])
        self.assertEqual(parse_probes(""), [])
        with self.assertRaises(ValueError):
            parse_probes("1,2,3,4")


class TestPrecedence(unittest.TestCase):
    """默认值 → 配置文件 → 命令行"""

    def test_defaults_only(self):
        config = build_simulation_config()
        defaults = load_defaults()['simulation']
        self.assertEqual(config.c0, defaults['c0'])
        self.assertEqual(config.r_inf, defaults['r_inf'])
        self.assertIsNone(config.dt)

    def test_file_then_overrides(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "sim.cfg")
            with open(path, 'w', encoding='utf-8') as f:
                f.write(SAMPLE)
            config = load_simulation_config(path, {'mu_z': 0.03, 'c0': None})
        self.assertEqual(config.c0, 343.0)
        self.assertEqual(config.mu_z, 0.03)
        self.assertEqual(config.mu_w, 0.005)

    def test_custom_defaults_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "defaults.json")
            with open(path, 'w', encoding='utf-8') as f:
                json.dump({'simulation': {'c0': 340.0, 'unrelated': 1}}, f)
            config = build_simulation_config(defaults_path=path)
            self.assertEqual(config.c0, 340.0)
            with open(path, 'w', encoding='utf-8') as f:
                f.write("{broken")
            with self.assertRaises(ConfigurationError):
                build_simulation_config(defaults_path=path)

    def test_invalid_override(self):
        with self.assertRaises(ConfigurationError):
            build_simulation_config(overrides={'cfl_factor': 2.0})
        with self.assertRaises(ConfigurationError):
            build_simulation_config(overrides={'speed': 1.0})

    def test_missing_file(self):
        with self.assertRaises(ConfigurationError):
            load_simulation_config("/nonexistent/sim.cfg")


class TestManifest(unittest.TestCase):
    """运行清单"""

    def test_floats_are_exact(self):
        manifest = {'dt': 1.0 / 3.0 * 1e-6, 'steps': 12, 'source_side': 'all', 'warnings': ''}
        self.assertIn("steps=12\n", format_key_value(manifest))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "manifest.txt")
            write_manifest(manifest, path)
            loaded = read_manifest(path)
        self.assertEqual(float(loaded['dt']), manifest['dt'])
        self.assertEqual(loaded['steps'], '12')
        self.assertEqual(loaded['warnings'], '')
        self.assertEqual(list(loaded), list(manifest))

    def test_missing_manifest(self):
        with self.assertRaises(ConfigurationError):
            read_manifest("/nonexistent/manifest.txt")


if __name__ == "__main__":
    unittest.main()

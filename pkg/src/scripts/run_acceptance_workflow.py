#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
验收工作流执行脚本
依次运行单元测试和桌面规模验收仿真，汇总结果写入 CSV
"""

import argparse
import os
import sys
import time
import traceback
import unittest
from typing import Any, Dict, List

import pandas as pd

# 添加src目录到路径
SRC_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, SRC_DIR)

from utils.common import PROJECT_DIR, setup_logging
from validators.acceptance import (centerline_rejection_check, closed_duct_check, loss_decay_check,
                                   pml_reflection_check, radiation_impedance_check)


class WorkflowExecutor:
    """验收工作流执行器"""

    def __init__(self, skip_radiation: bool = False, progress: bool = False):
        self.progress = progress
        self.steps = [
            {
                "name": "单元测试",
                "function": self.step_unit_tests,
                "description": "运行 src/test_*.py（不含耗时验收）"
            },
            {
                "name": "闭管简正频率",
                "function": lambda: self.step_check(closed_duct_check),
                "description": "L=0.1 m 刚性闭管基频 1725 Hz，能量漂移"
            },
            {
                "name": "吸声壁衰减",
                "function": lambda: self.step_check(loss_decay_check),
                "description": "μ_z=0.01 与 μ_z=0 的包络衰减时间对比"
            },
            {
                "name": "PML 反射",
                "function": lambda: self.step_check(pml_reflection_check),
                "description": "细管末段 PML 的平面脉冲反射"
            },
            {
                "name": "中心线模态抑制",
                "function": lambda: self.step_check(centerline_rejection_check),
                "description": "偏轴激励下轴线探头与壁面探头的 (1,0) 模谱峰对比"
            },
        ]
        if not skip_radiation:
            self.steps.append({
                "name": "辐射阻抗",
                "function": lambda: self.step_check(radiation_impedance_check),
                "description": "法兰圆管辐射阻抗与圆活塞解析解对比（耗时最长）"
            })

        self.results: List[Dict[str, Any]] = []

    def print_header(self, title: str):
        """打印标题"""
        print("\n" + "=" * 80)
        print(f"  {title}")
        print("=" * 80)

    def print_step(self, step_num: int, step_name: str, description: str):
        """打印步骤信息"""
        print(f"\n[{step_num}/{len(self.steps)}] {step_name}")
        print(f"    {description}")
        print("-" * 60)

    def step_unit_tests(self) -> bool:
        suite = unittest.defaultTestLoader.discover(SRC_DIR, pattern="test_*.py", top_level_dir=SRC_DIR)
        outcome = unittest.TextTestRunner(verbosity=1).run(suite)
        print(f"运行 {outcome.testsRun} 个测试，失败 {len(outcome.failures)}，错误 {len(outcome.errors)}，"
              f"跳过 {len(outcome.skipped)}")
        return outcome.wasSuccessful()

    def step_check(self, check) -> bool:
        started = time.time()
        result = check(progress=self.progress)
        result['elapsed_s'] = time.time() - started
        self.results.append(result)
        for key, value in result.items():
            if key not in ('name', 'passed'):
                print(f"  {key:18} {value}")
        return result['passed']

    def save_results(self, path: str):
        if not self.results:
            return
        os.makedirs(os.path.dirname(path), exist_ok=True)
        columns = ['name', 'value', 'threshold', 'passed', 'elapsed_s']
        pd.DataFrame(self.results)[columns].to_csv(path, index=False)
        print(f"\n验收结果已写入: {path}")

    def run(self, out_path: str) -> bool:
        """运行完整工作流"""
        self.print_header("阻抗管数值实验验收工作流")

        success_count = 0
        failed_steps = []

        for i, step in enumerate(self.steps, 1):
            self.print_step(i, step["name"], step["description"])

            try:
                if step["function"]():
                    print(f"\n✓ 步骤 {i} 完成")
                    success_count += 1
                else:
                    print(f"\n✗ 步骤 {i} 未通过")
                    failed_steps.append(step["name"])
            except Exception as e:
                print(f"\n✗ 步骤 {i} 执行出错: {e}")
                traceback.print_exc()
                failed_steps.append(step["name"])

        self.save_results(out_path)

        # 总结
        self.print_header("工作流总结")
        print(f"\n总步骤数: {len(self.steps)}")
        print(f"成功: {success_count}/{len(self.steps)}")

        if failed_steps:
            print("\n未通过的步骤:")
            for name in failed_steps:
                print(f"  - {name}")
        else:
            print("\n所有步骤完成！")
        print("=" * 80)
        return not failed_steps


def main():
    """主函数"""
    parser = argparse.ArgumentParser(description='阻抗管数值实验验收工作流')
    parser.add_argument('--skip-radiation', action='store_true', help='跳过耗时最长的辐射阻抗算例')
    parser.add_argument('--progress', action='store_true', help='显示时间推进进度条')
    parser.add_argument('--out', default=os.path.join(PROJECT_DIR, 'result', 'acceptance.csv'),
                        help='结果 CSV')
    parser.add_argument('--log-file', default=os.path.join(PROJECT_DIR, 'logs', 'acceptance.log'))
    args = parser.parse_args()

    setup_logging(args.log_file)
    executor = WorkflowExecutor(skip_radiation=args.skip_radiation, progress=args.progress)
    sys.exit(0 if executor.run(args.out) else 1)


if __name__ == "__main__":
    main()

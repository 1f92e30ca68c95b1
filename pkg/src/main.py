#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
impedukt 主入口
网格生成、时域仿真、阻抗提取、传声器间距建议、截止频率与解析参考
"""

import argparse
import logging
import math
import os
import sys
from typing import List, Optional

import numpy as np
import pandas as pd

# 添加src目录到路径
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from acoustics.wavenumbers import (LossyDuctModel, circular_cutoffs, classify_spacing,
                                   cutoff_table, spacing_advice)
from analyzers.tmtf_analyzer import (ProbeGeometry, TmtfSettings, WavenumberMode,
                                     extract_impedance, read_probe_csv, write_probe_csv,
                                     write_spectrum_csv)
from assemblers.fem_assembler import dump_matrices
from meshers.duct_mesher import generate_duct_mesh, generate_radiation_domain, generate_tract_mesh
from meshers.section import DuctSpec, EllipseSection, Termination, make_elliptical_section
from parsers.area_function_parser import read_area_function
from parsers.config_parser import load_simulation_config, parse_probes, read_manifest, write_manifest
from parsers.mesh_parser import read_mesh, write_mesh
from solvers.time_solver import TimeDomainSolver
from utils.common import ImpeduktError, load_defaults, setup_logging
from validators.oracles import closed_duct_modes, flanged_piston_impedance, quadrature_elliptic_integral

logger = logging.getLogger("impedukt")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2


class CliArgumentParser(argparse.ArgumentParser):
    """参数错误时以退出码 1 结束"""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: 错误: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _add_section_args(parser: argparse.ArgumentParser):
    parser.add_argument('--radius', type=float, help='圆截面半径，配合 --ecc 重塑为等面积椭圆 (m)')
    parser.add_argument('--a-major', type=float, help='椭圆长半轴 (m)')
    parser.add_argument('--b-minor', type=float, help='椭圆短半轴 (m)')
    parser.add_argument('--ecc', type=float, default=0.0, help='偏心率')


def build_parser() -> CliArgumentParser:
    """构建命令行解析器"""
    parser = CliArgumentParser(prog='impedukt', description='阻抗管数值实验工具')
    parser.add_argument('--log-file', help='日志文件路径')
    parser.add_argument('--verbose', action='store_true', help='输出调试日志')

    subparsers = parser.add_subparsers(dest='command', parser_class=CliArgumentParser, help='可用命令')

    # 网格生成
    mesh_parser = subparsers.add_parser('mesh', help='生成四面体网格')
    mesh_parser.add_argument('kind', choices=['duct', 'radiation', 'tract'], help='网格类型')
    _add_section_args(mesh_parser)
    mesh_parser.add_argument('--length', type=float, help='管长 (m)')
    mesh_parser.add_argument('--h', type=float, help='网格尺寸 (m)')
    mesh_parser.add_argument('--termination', choices=[t.value for t in Termination], default=None,
                             help='末端类型（duct 默认 closed，tract 默认 closed）')
    mesh_parser.add_argument('--box', help='辐射箱尺寸 "Lx,Ly,Lz" (m)')
    mesh_parser.add_argument('--pml-width', type=float, help='PML 厚度 (m)')
    mesh_parser.add_argument('--h-box', type=float, help='箱体网格尺寸 (m)')
    mesh_parser.add_argument('--h-pml', type=float, help='PML 网格尺寸 (m)')
    mesh_parser.add_argument('--area-function', help='面积函数 CSV (z_m,area_m2,eccentricity)')
    mesh_parser.add_argument('--duct-length', type=float, default=0.0, help='声道入口前附加阻抗管长度 (m)')
    mesh_parser.add_argument('--out', required=True, help='输出网格文件')

    # 时域仿真
    sim_parser = subparsers.add_parser('simulate', help='时域仿真并记录探头压力')
    sim_parser.add_argument('--mesh', help='网格文件')
    sim_parser.add_argument('--config', help='key=value 配置文件')
    sim_parser.add_argument('--out', default='result/run', help='输出目录')
    sim_parser.add_argument('--mu-z', type=float, help='阻抗管壁导纳 μ_z')
    sim_parser.add_argument('--mu-w', type=float, help='声道壁导纳 μ_w')
    sim_parser.add_argument('--rinf', type=float, help='PML 相对反射系数 r∞')
    sim_parser.add_argument('--c0', type=float, help='声速 (m/s)')
    sim_parser.add_argument('--t-total', type=float, help='仿真时长 (s)')
    sim_parser.add_argument('--probes', help='探头坐标 "x,y,z;x,y,z"')
    sim_parser.add_argument('--x1', type=float, help='探头 1 到参考面的距离 (m)')
    sim_parser.add_argument('--x2', type=float, help='探头 2 到参考面的距离 (m)')
    sim_parser.add_argument('--ref-z', type=float, help='参考面 z 坐标，配合 --x1/--x2 放置轴线探头 (m)')
    sim_parser.add_argument('--dump-matrices', help='导出装配矩阵的目录')
    sim_parser.add_argument('--progress', action='store_true', help='显示进度条')

    # 阻抗提取
    imp_parser = subparsers.add_parser('impedance', help='由两个探头记录计算参考面阻抗')
    imp_parser.add_argument('--run', help='simulate 输出目录（读取 probe_1.csv、probe_2.csv 与清单）')
    imp_parser.add_argument('--probe1', help='探头 1 CSV')
    imp_parser.add_argument('--probe2', help='探头 2 CSV')
    imp_parser.add_argument('--x1', type=float, required=True, help='探头 1 到参考面的距离 (m)')
    imp_parser.add_argument('--x2', type=float, required=True, help='探头 2 到参考面的距离 (m)')
    _add_section_args(imp_parser)
    imp_parser.add_argument('--mu-z', type=float, help='阻抗管壁导纳 μ_z')
    imp_parser.add_argument('--c0', type=float, help='声速 (m/s)')
    imp_parser.add_argument('--fmax', type=float, help='最高分析频率 (Hz)')
    imp_parser.add_argument('--wavenumber', choices=[m.value for m in WavenumberMode],
                            default=WavenumberMode.COMPLEX.value, help='提取使用的波数')
    imp_parser.add_argument('--out', default='impedance.csv', help='输出 CSV')

    # 间距建议
    advise_parser = subparsers.add_parser('advise', help='传声器间距建议')
    advise_parser.add_argument('--fmax', type=float, required=True, help='最高分析频率 (Hz)')
    advise_parser.add_argument('--h', type=float, required=True, help='网格尺寸 (m)')
    advise_parser.add_argument('--c0', type=float, help='声速 (m/s)')
    advise_parser.add_argument('--s', type=float, help='评估给定间距 (m)')
    _add_section_args(advise_parser)

    # 截止频率
    modes_parser = subparsers.add_parser('modes', help='圆管高阶模截止频率')
    _add_section_args(modes_parser)
    modes_parser.add_argument('--c0', type=float, help='声速 (m/s)')
    modes_parser.add_argument('--out', help='输出 CSV（默认打印到标准输出）')

    # 解析参考
    oracle_parser = subparsers.add_parser('oracle', help='解析参考曲线')
    oracle_parser.add_argument('kind', choices=['piston', 'elliptic', 'closed-modes'], help='参考类型')
    oracle_parser.add_argument('--ka-min', type=float, default=0.05)
    oracle_parser.add_argument('--ka-max', type=float, default=2.0)
    oracle_parser.add_argument('--points', type=int, default=40)
    oracle_parser.add_argument('--ecc', help='偏心率列表 "0,0.5,0.8"')
    oracle_parser.add_argument('--length', type=float, help='闭管长度 (m)')
    oracle_parser.add_argument('--n-max', type=int, default=5)
    oracle_parser.add_argument('--c0', type=float, help='声速 (m/s)')
    oracle_parser.add_argument('--out', help='输出 CSV（默认打印到标准输出）')

    parser.subcommands = {
        'mesh': mesh_parser, 'simulate': sim_parser, 'impedance': imp_parser,
        'advise': advise_parser, 'modes': modes_parser, 'oracle': oracle_parser,
    }
    return parser


def _section_from_args(parser, args, required: bool = True) -> Optional[EllipseSection]:
    if args.a_major is not None or args.b_minor is not None:
        if args.a_major is None or args.b_minor is None:
            parser.error("--a-major 与 --b-minor 必须同时给出")
        return EllipseSection(args.a_major, args.b_minor)
    if args.radius is not None:
        return make_elliptical_section(math.pi * args.radius ** 2, args.ecc)
    if required:
        parser.error("需要截面参数: --radius [--ecc] 或 --a-major/--b-minor")
    return None


def _emit_frame(df: pd.DataFrame, out: Optional[str]):
    if out:
        df.to_csv(out, index=False, float_format='%.17g')
        print(f"已写入: {out}")
    else:
        sys.stdout.write(df.to_csv(index=False, float_format='%.17g'))


def cmd_mesh(parser, args, defaults):
    duct_defaults = defaults.get('impedance_duct', {})
    box_defaults = defaults.get('radiation_domain', {})
    h = args.h if args.h is not None else duct_defaults.get('h', 0.001)

    if args.kind == 'tract':
        if not args.area_function:
            parser.error("tract 网格需要 --area-function")
        af = read_area_function(args.area_function, eccentricity=args.ecc if args.ecc else None)
        termination = Termination(args.termination or Termination.CLOSED_RIGID.value)
        mesh = generate_tract_mesh(af, h, termination=termination, duct_length=args.duct_length)
    else:
        section = _section_from_args(parser, args)
        length = args.length if args.length is not None else duct_defaults.get('length', 0.1)
        if args.kind == 'duct':
            termination = Termination(args.termination or Termination.CLOSED_RIGID.value)
            mesh = generate_duct_mesh(DuctSpec(section, length, h, termination))
        else:
            box = box_defaults.get('box_dims')
            if args.box:
                try:
                    box = [float(v) for v in args.box.split(',')]
                except ValueError:
                    parser.error(f"--box 格式应为 Lx,Ly,Lz: {args.box}")
            pml_width = args.pml_width if args.pml_width is not None else box_defaults.get('pml_width')
            h_box = args.h_box if args.h_box is not None else box_defaults.get('h_box')
            h_pml = args.h_pml if args.h_pml is not None else box_defaults.get('h_pml')
            spec = DuctSpec(section, length, h, Termination.OPEN_FLANGED)
            mesh = generate_radiation_domain(spec, box, pml_width, h_box, h_pml)

    out_dir = os.path.dirname(args.out)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    write_mesh(mesh, args.out)
    print(f"网格生成完成: {args.out}")
    for key, value in mesh.summary().items():
        print(f"  {key:12} {value}")


def cmd_simulate(parser, args):
    probes = None
    if args.probes:
        try:
            probes = parse_probes(args.probes)
        except ValueError as e:
            parser.error(str(e))
    if args.x1 is not None or args.x2 is not None:
        if args.x1 is None or args.x2 is None or args.ref_z is None:
            parser.error("--x1/--x2 需要同时给出，并配合 --ref-z")
        probes = [(0.0, 0.0, args.ref_z - args.x1), (0.0, 0.0, args.ref_z - args.x2)]
    overrides = {'mu_z': args.mu_z, 'mu_w': args.mu_w, 'r_inf': args.rinf, 'c0': args.c0,
                 't_total': args.t_total, 'probes': probes}
    config = load_simulation_config(args.config, overrides)
    if not args.mesh:
        parser.error("需要 --mesh")
    mesh = read_mesh(args.mesh)
    if not config.probes:
        parser.error("没有探头：请用 --probes、--x1/--x2 或配置文件中的 probes 指定")

    solver = TimeDomainSolver(mesh, config, progress=args.progress)
    if args.dump_matrices:
        dump_matrices(solver.system, args.dump_matrices)
    records = solver.run()

    os.makedirs(args.out, exist_ok=True)
    for i, record in enumerate(records, start=1):
        write_probe_csv(record, os.path.join(args.out, f"probe_{i}.csv"))
    if config.track_energy:
        pd.DataFrame({'step': np.arange(len(solver.energy)), 'energy': solver.energy}).to_csv(
            os.path.join(args.out, 'energy.csv'), index=False, float_format='%.17g')
    write_manifest(solver.manifest(), os.path.join(args.out, 'manifest.txt'))

    print(f"仿真完成: {solver.steps} 步, dt={solver.dt:.4e} s")
    print(f"输出目录: {args.out}")
    for message in solver.warnings:
        logger.warning(message)


def cmd_impedance(parser, args, defaults):
    manifest = {}
    probe1, probe2 = args.probe1, args.probe2
    if args.run:
        probe1 = probe1 or os.path.join(args.run, 'probe_1.csv')
        probe2 = probe2 or os.path.join(args.run, 'probe_2.csv')
        manifest_path = os.path.join(args.run, 'manifest.txt')
        if os.path.exists(manifest_path):
            manifest = read_manifest(manifest_path)
    if not (probe1 and probe2):
        parser.error("需要 --run 或 --probe1/--probe2")

    sim_defaults = defaults.get('simulation', {})
    c0 = args.c0 if args.c0 is not None else float(manifest.get('c0', sim_defaults.get('c0', 345.0)))
    mu_z = args.mu_z if args.mu_z is not None else float(manifest.get('mu_z', sim_defaults.get('mu_z', 0.0)))
    f_max = args.fmax if args.fmax is not None else defaults.get('impedance_duct', {}).get('f_max', 1e4)

    section = _section_from_args(parser, args)
    duct = LossyDuctModel(section, mu_z, c0)
    geom = ProbeGeometry(args.x1, args.x2)
    settings = TmtfSettings.from_defaults(defaults.get('tmtf', {}))
    spectrum = extract_impedance(read_probe_csv(probe1), read_probe_csv(probe2), geom, duct, f_max,
                                 WavenumberMode(args.wavenumber), settings)
    write_spectrum_csv(spectrum, args.out)

    n_ok = int(spectrum.ok_mask().sum())
    print(f"阻抗谱已写入: {args.out} ({len(spectrum.freqs)} 个频点, 有效 {n_ok} 个)")
    for message in spectrum.warnings:
        print(f"  警告: {message}", file=sys.stderr)


def cmd_advise(parser, args, defaults):
    c0 = args.c0 if args.c0 is not None else defaults.get('simulation', {}).get('c0', 345.0)
    section = _section_from_args(parser, args, required=False)
    advice = spacing_advice(args.fmax, c0, args.h, section.a_e if section else 0.0)
    print("传声器间距建议:")
    print(f"  λ_min  = {100 * advice.lambda_min:.4f} cm")
    print(f"  s 范围 = [{100 * advice.s_min:.4f}, {100 * advice.s_max:.4f}] cm")
    print(f"  s_opt  = {100 * advice.s_opt:.4f} cm")
    if section:
        print(f"  x1_min = {100 * advice.x1_min:.4f} cm")
    if args.s is not None:
        ratio, inside = classify_spacing(args.s, args.fmax, c0)
        verdict = "位于" if inside else "不在"
        print(f"  s = {100 * args.s:.4f} cm → s/λ_min = {ratio:.4f}，{verdict}推荐区间 (0.1, 0.4)")


def cmd_modes(parser, args, defaults):
    c0 = args.c0 if args.c0 is not None else defaults.get('simulation', {}).get('c0', 345.0)
    section = _section_from_args(parser, args)
    if not section.is_circular:
        logger.warning("椭圆截面的高阶模截止频率按半径 a_e 的圆管估算")
    df = pd.DataFrame(cutoff_table(circular_cutoffs(section.a_e, c0)))
    _emit_frame(df, args.out)


def cmd_oracle(parser, args, defaults):
    c0 = args.c0 if args.c0 is not None else defaults.get('simulation', {}).get('c0', 345.0)
    if args.kind == 'piston':
        if args.points < 1 or not 0 < args.ka_min <= args.ka_max:
            parser.error("需要 0 < ka-min <= ka-max 且 points >= 1")
        ka = np.linspace(args.ka_min, args.ka_max, args.points)
        z = flanged_piston_impedance(ka)
        df = pd.DataFrame({'ka': ka, 'resistance': z.real, 'reactance': z.imag})
    elif args.kind == 'elliptic':
        ecc = list(np.round(np.arange(0, 1.0, 0.1), 2))
        if args.ecc:
            try:
                ecc = [float(v) for v in args.ecc.split(',')]
            except ValueError:
                parser.error(f"--ecc 格式应为逗号分隔的数值: {args.ecc}")
        df = pd.DataFrame({'e': ecc, 'I': [quadrature_elliptic_integral(e) for e in ecc]})
    else:
        if args.length is None:
            parser.error("closed-modes 需要 --length")
        freqs = closed_duct_modes(args.length, c0, args.n_max)
        df = pd.DataFrame({'n': np.arange(1, len(freqs) + 1), 'f_hz': freqs})
    _emit_frame(df, args.out)


def run_cli(argv: Optional[List[str]] = None) -> int:
    """命令行入口，返回退出码"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    setup_logging(args.log_file, logging.DEBUG if args.verbose else logging.INFO)
    if not args.command:
        parser.print_usage(sys.stderr)
        print("请指定命令: mesh, simulate, impedance, advise, modes, oracle", file=sys.stderr)
        return EXIT_USAGE

    sub = parser.subcommands[args.command]
    try:
        defaults = load_defaults()
        if args.command == 'mesh':
            cmd_mesh(sub, args, defaults)
        elif args.command == 'simulate':
            cmd_simulate(sub, args)
        elif args.command == 'impedance':
            cmd_impedance(sub, args, defaults)
        elif args.command == 'advise':
            cmd_advise(sub, args, defaults)
        elif args.command == 'modes':
            cmd_modes(sub, args, defaults)
        elif args.command == 'oracle':
            cmd_oracle(sub, args, defaults)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    except (ImpeduktError, OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        print(f"错误: {e}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def main():
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
桌面规模验收实验

闭管简正频率与能量守恒、壁面吸声对衰减的加速、PML 反射、法兰管辐射阻抗、
中心线探头对非对称模的抑制。每个检查运行一组仿真并返回结果字典
（name、value、threshold、passed 以及中间量），供 test_acceptance 与验收工作流脚本使用。
"""

import logging
import math
from typing import Any, Dict, Sequence, Tuple

import numpy as np

from acoustics.wavenumbers import LossyDuctModel, circular_cutoffs, spacing_advice
from analyzers.tmtf_analyzer import ProbeGeometry, extract_impedance
from meshers.duct_mesher import generate_duct_mesh, generate_radiation_domain
from meshers.mesh import FacetTag, Mesh, Region
from meshers.section import DuctSpec, EllipseSection, Termination
from solvers.time_solver import SimulationConfig, TimeDomainSolver, cfl_timestep
from utils.common import MeshError
from validators.oracles import closed_duct_modes, flanged_piston_impedance

logger = logging.getLogger(__name__)

C0 = 345.0


def _result(name: str, value: float, threshold: str, passed: bool, **details) -> Dict[str, Any]:
    verdict = "通过" if passed else "未通过"
    logger.info(f"{name}: {value:.4g}（要求 {threshold}）{verdict}")
    result = {'name': name, 'value': float(value), 'threshold': threshold, 'passed': bool(passed)}
    result.update(details)
    return result


def peak_frequency(values: np.ndarray, dt: float, band: Tuple[float, float], pad: int = 8) -> float:
    """去均值并补零 pad 倍后，在 band 内取幅值谱峰值所在频率"""
    x = np.asarray(values, dtype=float)
    x = x - x.mean()
    n = pad * len(x)
    spectrum = np.abs(np.fft.rfft(x, n))
    freqs = np.fft.rfftfreq(n, dt)
    inside = np.flatnonzero((freqs >= band[0]) & (freqs <= band[1]))
    if len(inside) == 0:
        raise ValueError(f"频带 {band} 内没有频点")
    return float(freqs[inside[np.argmax(spectrum[inside])]])


def settle_time(values: np.ndarray, dt: float, fraction: float = 0.01) -> float:
    """|p| 最后一次不低于 fraction·峰值之后的时刻；记录末尾仍未降下时返回 inf"""
    magnitude = np.abs(np.asarray(values, dtype=float))
    above = np.flatnonzero(magnitude >= fraction * magnitude.max())
    last = int(above[-1])
    if last >= len(magnitude) - 1:
        return math.inf
    return (last + 1) * dt


def axial_probe(mesh: Mesh, z: float, off_axis: bool = False) -> Tuple[float, float, float]:
    """z 截面上的轴线节点，或 y=0 上 x 最大的壁面节点"""
    if not off_axis:
        node = mesh.centerline_node(z)
    else:
        candidates = np.flatnonzero((np.abs(mesh.nodes[:, 2] - z) < 1e-9) & (np.abs(mesh.nodes[:, 1]) < 1e-12))
        if len(candidates) == 0:
            raise MeshError(f"z={z:g} m 截面上没有 y=0 的节点")
        node = int(candidates[np.argmax(mesh.nodes[candidates, 0])])
    return tuple(float(v) for v in mesh.nodes[node])


def closed_duct_check(length: float = 0.1, radius: float = 0.01, h: float = 0.005,
                      min_steps: int = 10000, settle: float = 1e-3,
                      progress: bool = False) -> Dict[str, Any]:
    """
    刚性闭管：末端探头频谱的基频峰应在 c₀/(2L) 的 2% 以内，
    声源结束后至少 min_steps 步内的离散能量漂移小于 1%
    """
    mesh = generate_duct_mesh(DuctSpec(EllipseSection(radius, radius), length, h))
    dt = cfl_timestep(mesh, C0)
    t_total = settle + (min_steps + 10) * dt
    config = SimulationConfig(c0=C0, t_total=t_total, mu_z=0.0, mu_w=0.0,
                              probes=[(0.0, 0.0, length)], track_energy=True)
    solver = TimeDomainSolver(mesh, config, progress=progress)
    record = solver.run()[0]

    f_mode = closed_duct_modes(length, C0, 1)[0]
    f_peak = peak_frequency(record.values, solver.dt, (0.7 * f_mode, 1.3 * f_mode))
    mode_error = abs(f_peak / f_mode - 1.0)

    energy = np.array(solver.energy[int(math.ceil(settle / solver.dt)):])
    drift = float((energy.max() - energy.min()) / energy.mean())

    passed = mode_error < 0.02 and drift < 0.01 and len(energy) >= min_steps
    return _result("闭管基频与能量守恒", mode_error, "基频误差 < 2%，能量漂移 < 1%", passed,
                   f_peak=f_peak, f_expected=f_mode, energy_drift=drift,
                   energy_steps=len(energy), steps=solver.steps)


def _flanged_duct(radius: float, length: float, h: float, box: Sequence[float],
                  pml_width: float, h_box: float, h_pml: float) -> Mesh:
    spec = DuctSpec(EllipseSection(radius, radius), length, h, Termination.OPEN_FLANGED)
    return generate_radiation_domain(spec, box, pml_width, h_box, h_pml)


def loss_decay_check(radius: float = 0.01, length: float = 0.1, h: float = 0.005,
                     box: Sequence[float] = (0.06, 0.06, 0.04), pml_width: float = 0.02,
                     h_box: float = 0.01, h_pml: float = 0.01, t_total: float = 0.03,
                     mu_z: float = 0.01, progress: bool = False) -> Dict[str, Any]:
    """
    法兰开口管：μ_z 吸声壁使探头 1 的包络降到峰值 1% 以下的时间至少缩短一半

    无损算例在窗口内未降下时，用窗口长度作为其衰减时间的下界。
    """
    mesh = _flanged_duct(radius, length, h, box, pml_width, h_box, h_pml)
    probe = (0.0, 0.0, 0.5 * length)
    times = {}
    for label, mu in (('lossless', 0.0), ('lossy', mu_z)):
        config = SimulationConfig(c0=C0, t_total=t_total, mu_z=mu, mu_w=0.0, probes=[probe])
        solver = TimeDomainSolver(mesh, config, progress=progress)
        record = solver.run()[0]
        times[label] = settle_time(record.values, solver.dt)
        logger.info(f"μ_z={mu:g}: 降到 1% 峰值用时 {times[label]:.4g} s")

    lossless = min(times['lossless'], t_total)
    ratio = lossless / times['lossy'] if math.isfinite(times['lossy']) else 0.0
    return _result("吸声壁加速衰减", ratio, ">= 2", ratio >= 2.0,
                   t_lossless=times['lossless'], t_lossy=times['lossy'])


def pml_reflection_check(radius: float = 0.005, h: float = 0.0025, interior: float = 0.2,
                         pml_width: float = 0.1, probe_z: float = 0.1, f0: float = 5000.0,
                         r_inf: float = 1e-4, progress: bool = False) -> Dict[str, Any]:
    """
    刚性壁细管末段设为 +z 方向 PML，平面脉冲经过中部探头后，
    PML 反射峰值相对入射峰值应低于 −30 dB

    入射窗口与反射窗口按传播时间划分，反射窗口在 PML 深处回波和声源端二次反射到达前结束。
    """
    total = interior + pml_width
    base = generate_duct_mesh(DuctSpec(EllipseSection(radius, radius), total, h))
    centroid_z = base.nodes[base.tets][:, :, 2].mean(axis=1)
    region = np.where(centroid_z > interior, int(Region.PML), int(Region.INTERIOR))
    tags = base.facet_tag.copy()
    far_end = np.all(np.abs(base.nodes[base.facets][:, :, 2] - total) < 1e-9, axis=1)
    tags[far_end] = int(FacetTag.OUTER)
    mesh = Mesh(nodes=base.nodes, tets=base.tets, tet_region=region, facets=base.facets,
                facet_tag=tags, facet_mu=base.facet_mu, facet_wall=base.facet_wall)

    t_gp = 0.646 / f0
    t_incident = t_gp + probe_z / C0
    t_first_echo = t_gp + (2.0 * interior - probe_z) / C0
    t_late = t_gp + min(2.0 * interior + probe_z, 2.0 * total - probe_z) / C0
    config = SimulationConfig(c0=C0, t_total=t_late, f0=f0, lowpass_hz=None, mu_z=0.0, mu_w=0.0,
                              r_inf=r_inf, probes=[axial_probe(mesh, probe_z)])
    solver = TimeDomainSolver(mesh, config, progress=progress)
    record = solver.run()[0]

    t = record.times
    magnitude = np.abs(record.values)
    incident = magnitude[(t >= t_incident - t_gp) & (t <= t_incident + t_gp)].max()
    echo_window = (t > t_incident + t_gp) & (t < t_late - t_gp)
    reflected = magnitude[echo_window].max()
    level_db = 20.0 * math.log10(max(reflected, 1e-300) / incident)
    return _result("PML 反射", level_db, "< -30 dB", level_db < -30.0,
                   incident_peak=float(incident), reflected_peak=float(reflected),
                   first_echo_s=t_first_echo)


def radiation_impedance_check(radius: float = 0.01, length: float = 0.1, h: float = 0.0025,
                              box: Sequence[float] = (0.1, 0.1, 0.06), pml_width: float = 0.04,
                              h_box: float = 0.005, h_pml: float = 0.0075, t_total: float = 0.03,
                              mu_z: float = 0.01, f_max: float = 1e4,
                              ka_band: Tuple[float, float] = (0.2, 1.0), tolerance: float = 0.15,
                              progress: bool = False) -> Dict[str, Any]:
    """
    法兰圆管出口的辐射阻抗与无限障板圆活塞比较

    探头位于轴线上，间距按 spacing_advice 取最接近 s_opt 的轴向层距；
    每个频点要求 |Z − Z_piston| <= tolerance·|Z_piston|（同时约束 R_r 与 X_r）。
    """
    mesh = _flanged_duct(radius, length, h, box, pml_width, h_box, h_pml)
    advice = spacing_advice(f_max, C0, h, radius)
    dz = length / math.ceil(length / h - 1e-9)
    s = max(1, round(advice.s_opt / dz)) * dz
    x2 = math.ceil(advice.x1_min / dz - 1e-9) * dz
    x1 = x2 + s

    probes = [axial_probe(mesh, length - x1), axial_probe(mesh, length - x2)]
    config = SimulationConfig(c0=C0, t_total=t_total, mu_z=mu_z, mu_w=0.0, probes=probes)
    solver = TimeDomainSolver(mesh, config, progress=progress)
    rec1, rec2 = solver.run()

    duct = LossyDuctModel(EllipseSection(radius, radius), mu_z, C0)
    spectrum = extract_impedance(rec1, rec2, ProbeGeometry(x1, x2), duct, f_max)
    ka = 2.0 * math.pi * spectrum.freqs * radius / C0
    use = spectrum.ok_mask() & (ka > ka_band[0]) & (ka < ka_band[1])
    reference = flanged_piston_impedance(ka[use])
    z = spectrum.impedance[use]
    errors = np.abs(z - reference) / np.abs(reference)
    worst = float(errors.max()) if len(errors) else math.inf
    return _result("法兰管辐射阻抗", worst, f"<= {tolerance:g}", worst <= tolerance,
                   bins=int(use.sum()), x1=x1, x2=x2, s=s,
                   resistance_error=float(np.max(np.abs(z.real - reference.real) / np.abs(reference))),
                   reactance_error=float(np.max(np.abs(z.imag - reference.imag) / np.abs(reference))))


def centerline_rejection_check(radius: float = 0.01, length: float = 0.05, h: float = 0.0025,
                               t_total: float = 0.01, f0: float = 1e4, mu_z: float = 0.01,
                               progress: bool = False) -> Dict[str, Any]:
    """
    偏轴激励下中心线探头对 (1,0) 模的抑制

    +x 与 −x 半区激励之差只含 x 向反对称的声场；在第一截止频率以上的频带内，
    取同一轴向截面壁面探头的谱峰，比较中心线探头在该频率的幅值，要求至少低 20 dB。
    """
    mesh = generate_duct_mesh(DuctSpec(EllipseSection(radius, radius), length, h))
    station = 0.5 * length
    probes = [axial_probe(mesh, station), axial_probe(mesh, station, off_axis=True)]

    runs = {}
    for side in ('+x', '-x'):
        config = SimulationConfig(c0=C0, t_total=t_total, f0=f0, lowpass_hz=None, mu_z=mu_z,
                                  mu_w=0.0, probes=probes, source_side=side)
        solver = TimeDomainSolver(mesh, config, progress=progress)
        runs[side] = solver.run()
    dt = solver.dt

    center = runs['+x'][0].values - runs['-x'][0].values
    off_axis = runs['+x'][1].values - runs['-x'][1].values
    freqs = np.fft.rfftfreq(len(center), dt)
    spec_center = np.abs(np.fft.rfft(center))
    spec_off = np.abs(np.fft.rfft(off_axis))

    f_cut = circular_cutoffs(radius, C0)[0].f_hz
    band = np.flatnonzero((freqs >= 0.95 * f_cut) & (freqs <= 1.6 * f_cut))
    peak = int(band[np.argmax(spec_off[band])])
    rejection_db = 20.0 * math.log10(max(spec_center[peak], 1e-300) / spec_off[peak])
    return _result("中心线高阶模抑制", rejection_db, "<= -20 dB", rejection_db <= -20.0,
                   f_peak=float(freqs[peak]), f_cutoff=f_cut, off_axis_probe=probes[1])

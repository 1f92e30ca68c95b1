#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
PML 修正波动方程的显式时间推进

每个时间步依次：
1. Ψ^{n+½} = Ψ^{n−½} + Δt·Pⁿ
2. 对角方程求 P^{n+1}（压力二阶中心差分，阻尼项一阶中心差分）
3. 梯形格式更新 PML 单元上的 Φᵢ^{n+1}
集中质量使每一步只需对角除法。
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from acoustics.pml import PmlSpec
from assemblers.fem_assembler import SOURCE_SIDES, AssembledSystem, assemble_system
from meshers.mesh import Mesh, Region
from parsers.mesh_parser import mesh_digest
from solvers.source import source_signals
from utils.common import TOOL_VERSION, ConfigurationError, DomainError, MeshError, SimulationError

logger = logging.getLogger(__name__)

# 探头必须与网格节点重合的容差 (m)
PROBE_TOLERANCE = 1e-9


@dataclass
class SimulationConfig:
    """仿真参数；dt 为 None 时按 CFL 系数自动确定"""
    c0: float = 345.0
    rho0: float = 1.1933
    dt: Optional[float] = None
    cfl_factor: float = 0.2
    t_total: float = 0.03
    f0: float = 1e4
    t_gp: Optional[float] = None
    t_gp_factor: float = 0.646
    lowpass_hz: Optional[float] = 1e4
    lowpass_order: int = 4
    mu_w: float = 0.005
    mu_z: float = 0.01
    r_inf: float = 1e-4
    probes: List[Tuple[float, float, float]] = field(default_factory=list)
    source_amplitude: float = 1.0
    source_side: str = 'all'
    track_energy: bool = False
    growth_limit: float = 100.0

    def __post_init__(self):
        if not (self.c0 > 0 and self.rho0 > 0):
            raise ConfigurationError("c0 与 rho0 必须为正")
        if self.dt is not None and not self.dt > 0:
            raise ConfigurationError(f"dt 必须为正: {self.dt}")
        if not 0.0 < self.cfl_factor <= 1.0:
            raise ConfigurationError(f"CFL 系数必须在 (0, 1] 内: {self.cfl_factor}")
        if self.t_total < 0:
            raise ConfigurationError(f"t_total 不能为负: {self.t_total}")
        if self.dt is not None and 0 < self.t_total < self.dt:
            raise ConfigurationError(f"t_total={self.t_total:g} s 小于 dt={self.dt:g} s")
        if not self.f0 > 0:
            raise ConfigurationError(f"f0 必须为正: {self.f0}")
        if self.t_gp is not None and not self.t_gp > 0:
            raise ConfigurationError(f"t_gp 必须为正: {self.t_gp}")
        if self.lowpass_hz is not None and self.lowpass_hz < 0:
            raise ConfigurationError(f"低通截止频率不能为负: {self.lowpass_hz}")
        if self.mu_w < 0 or self.mu_z < 0:
            raise ConfigurationError("导纳系数不能为负")
        if not 0.0 < self.r_inf <= 1.0:
            raise ConfigurationError(f"r_inf 必须在 (0, 1] 内: {self.r_inf}")
        if not self.growth_limit > 1.0:
            raise ConfigurationError(f"growth_limit 必须大于 1: {self.growth_limit}")
        if self.source_side not in SOURCE_SIDES:
            raise ConfigurationError(f"未知声源半区: {self.source_side}")
        self.probes = [tuple(float(v) for v in p) for p in self.probes]
        if any(len(p) != 3 for p in self.probes):
            raise ConfigurationError("探头坐标必须是三维点")

    @property
    def pulse_center(self) -> float:
        """T_gp，未显式给出时取 0.646/f0"""
        return self.t_gp if self.t_gp is not None else self.t_gp_factor / self.f0

    @property
    def admittances(self) -> Dict[str, float]:
        return {'mu_z': self.mu_z, 'mu_w': self.mu_w}


@dataclass
class FieldState:
    """Pⁿ⁻¹、Pⁿ、Ψ^{n−½} 与 PML 单元上的 Φᵢⁿ（3×N_pml）"""
    p_prev: np.ndarray
    p: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    n: int = 0

    @classmethod
    def zeros(cls, n_nodes: int, n_pml_elements: int = 0) -> "FieldState":
        return cls(np.zeros(n_nodes), np.zeros(n_nodes), np.zeros((3, n_pml_elements)), np.zeros(n_nodes))


@dataclass
class ProbeRecord:
    """探头压力时间序列，采样间隔 dt"""
    position: Tuple[float, float, float]
    times: np.ndarray
    values: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'t_s': self.times, 'p_pa': self.values})


def inscribed_diameters(mesh: Mesh) -> np.ndarray:
    """各单元内切球直径 6V/ΣA"""
    volumes = mesh.tet_volumes()
    if np.any(volumes <= 0):
        raise MeshError(f"存在退化单元（最小体积 {volumes.min():.3e}）")
    p = mesh.nodes[mesh.tets]
    area = np.zeros(mesh.n_tets)
    for a, b, c in ((1, 2, 3), (0, 3, 2), (0, 1, 3), (0, 2, 1)):
        area += 0.5 * np.linalg.norm(np.cross(p[:, b] - p[:, a], p[:, c] - p[:, a]), axis=1)
    return 6.0 * volumes / area


def cfl_timestep(mesh: Mesh, c0: float, factor: float = 0.2) -> float:
    """dt = factor·h_min/c₀，h_min 为最小内切球直径"""
    if not 0.0 < factor <= 1.0:
        raise DomainError(f"CFL 系数必须在 (0, 1] 内: {factor}")
    h_min = float(np.min(inscribed_diameters(mesh)))
    return factor * h_min / c0


def step(state: FieldState, system: AssembledSystem, c0: float, dt: float,
         load: float) -> FieldState:
    """
    推进一个时间步

    Args:
        state: 第 n 步状态
        system: 装配好的半离散系统
        load: g(tⁿ)，声源载荷为 c₀²·L_shape·g(tⁿ)
    """
    m, p, p_prev = system.m, state.p, state.p_prev
    c2 = c0 * c0
    psi_new = state.psi + dt * p

    damp = c0 * system.b
    rhs = m * (2.0 * p - p_prev) / (dt * dt) - c2 * (system.k @ p)
    if load != 0.0:
        rhs = rhs + c2 * load * system.l_shape
    pml = system.pml
    if system.pml_active:
        damp = damp + pml.m_alpha
        for i in range(3):
            rhs = rhs + pml.b[i] @ state.phi[i]
        rhs = rhs - pml.m_beta * p - pml.m_gamma * 0.5 * (psi_new + state.psi)
    rhs = rhs + damp * p_prev / (2.0 * dt)
    p_next = rhs / (m / (dt * dt) + damp / (2.0 * dt))

    phi_next = state.phi
    if system.pml_active:
        phi_next = np.empty_like(state.phi)
        p_mid = 0.5 * (p_next + p)
        v = pml.m_phi
        for i in range(3):
            half = 0.5 * pml.m_xi[i]
            rhs_i = ((v / dt - half) * state.phi[i] + c2 * (pml.b_a[i] @ p_mid)
                     + c2 * (pml.b_b[i] @ psi_new))
            phi_next[i] = rhs_i / (v / dt + half)

    return FieldState(p_prev=p, p=p_next, phi=phi_next, psi=psi_new, n=state.n + 1)


def discrete_energy(system: AssembledSystem, c0: float, dt: float,
                    p_prev: np.ndarray, p: np.ndarray, p_next: np.ndarray) -> float:
    """E = ½ṖᵀMṖ + ½c₀²PᵀKP，Ṗ 取中心差分"""
    p_dot = (p_next - p_prev) / (2.0 * dt)
    return 0.5 * float(np.dot(p_dot, system.m * p_dot)) + 0.5 * c0 * c0 * float(p @ (system.k @ p))


class TimeDomainSolver:
    """
    时域有限元仿真

    构造时装配系统、确定时间步、将探头对齐到网格节点；run() 推进到 T_total
    """

    def __init__(self, mesh: Mesh, config: SimulationConfig,
                 system: Optional[AssembledSystem] = None, progress: bool = False):
        self.mesh = mesh
        self.config = config
        self.progress = progress
        self.warnings: List[str] = list(mesh.warnings)

        self.dt = config.dt if config.dt is not None else cfl_timestep(mesh, config.c0, config.cfl_factor)
        self.steps = int(math.floor(config.t_total / self.dt + 1e-9))
        self.probe_nodes = self._resolve_probes()

        has_pml = bool(np.any(mesh.tet_region == int(Region.PML)))
        self.pml_spec = PmlSpec.from_mesh(mesh, config.r_inf) if has_pml else None
        self.system = system if system is not None else assemble_system(
            mesh, config.admittances, self.pml_spec, config.c0, config.source_side)

        self.q, self.g = source_signals(
            self.steps, self.dt, config.pulse_center, config.rho0, self.system.source_area,
            config.lowpass_hz, config.lowpass_order, config.source_amplitude)
        self.energy: List[float] = []
        self.state = FieldState.zeros(mesh.n_nodes, self.system.pml.n_elements)

    def _resolve_probes(self) -> List[int]:
        nodes = []
        for position in self.config.probes:
            idx = self.mesh.find_node(position, PROBE_TOLERANCE)
            if idx is None:
                raise ConfigurationError(f"探头 {position} 不在网格节点上（容差 {PROBE_TOLERANCE:g} m）")
            nodes.append(idx)
        return nodes

    def _source_end(self) -> int:
        """载荷 |g| 最后一次超过 1e-6·max|g| 的步号"""
        magnitude = np.abs(self.g[:self.steps])
        if len(magnitude) == 0 or magnitude.max() == 0:
            return self.steps
        return int(np.nonzero(magnitude > 1e-6 * magnitude.max())[0][-1])

    def run(self) -> List[ProbeRecord]:
        """推进 floor(T_total/dt) 步，返回各探头的压力记录"""
        n_samples = self.steps + 1
        samples = np.zeros((len(self.probe_nodes), n_samples))
        state = self.state
        c0, dt = self.config.c0, self.dt
        started = time.perf_counter()
        source_end = self._source_end()
        reference = 0.0

        logger.info(f"开始时间推进: dt={dt:.4e} s, {self.steps} 步, {self.mesh.n_nodes} 节点")
        for n in tqdm(range(self.steps), desc="时间推进", disable=not self.progress):
            new_state = step(state, self.system, c0, dt, float(self.g[n]))
            if not np.all(np.isfinite(new_state.p)):
                raise SimulationError("压力场出现非有限值，数值发散", step=n + 1)
            peak = float(np.max(np.abs(new_state.p))) if len(new_state.p) else 0.0
            if n <= source_end:
                reference = max(reference, peak)
            elif reference > 0 and peak > self.config.growth_limit * reference:
                raise SimulationError(
                    f"声源结束后压力增长到激励期峰值的 {peak / reference:.3g} 倍，数值发散", step=n + 1)
            if self.config.track_energy:
                self.energy.append(discrete_energy(self.system, c0, dt, state.p_prev, state.p, new_state.p))
            state = new_state
            samples[:, n + 1] = state.p[self.probe_nodes]

        self.state = state
        elapsed = time.perf_counter() - started
        logger.info(f"时间推进完成，耗时 {elapsed:.1f} s")

        times = np.arange(n_samples) * dt
        return [ProbeRecord(position=self.config.probes[i], times=times, values=samples[i])
                for i in range(len(self.probe_nodes))]

    def manifest(self) -> Dict[str, object]:
        """运行清单：物理常数、时间网格、网格摘要、警告"""
        cfg = self.config
        return {
            'version': TOOL_VERSION,
            'c0': cfg.c0,
            'rho0': cfg.rho0,
            'dt': self.dt,
            'steps': self.steps,
            't_total': cfg.t_total,
            'cfl_factor': cfg.cfl_factor,
            'f0': cfg.f0,
            't_gp': cfg.pulse_center,
            'lowpass_hz': cfg.lowpass_hz if cfg.lowpass_hz else 0.0,
            'mu_w': cfg.mu_w,
            'mu_z': cfg.mu_z,
            'r_inf': cfg.r_inf,
            'source_side': cfg.source_side,
            'source_amplitude': cfg.source_amplitude,
            'growth_limit': cfg.growth_limit,
            'probes': ';'.join(','.join(repr(v) for v in p) for p in cfg.probes),
            'mesh_digest': mesh_digest(self.mesh),
            'warnings': ' | '.join(self.warnings),
        }


def run(mesh: Mesh, config: SimulationConfig, progress: bool = False) -> List[ProbeRecord]:
    return TimeDomainSolver(mesh, config, progress=progress).run()

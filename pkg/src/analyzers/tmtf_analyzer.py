#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
双传声器传递函数法 (TMTF)

探头时间序列 → 频谱 → 传递函数 H₁₂ = P₂/P₁ →
参考面反射系数 R = (H₁₂ − e^{−jk s})/(e^{jk s} − H₁₂)·e^{j2k x₁} →
归一化阻抗 Z' = (1+R)/(1−R)

声场模型 p(x) = A(e^{jkx} + R₀e^{−jkx})，x 为到参考面的距离，s = x₁ − x₂ 带符号。
单个频点的异常只打标记，不中断计算。
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from acoustics.wavenumbers import LossyDuctModel, centerline_limit, kz_for_section
from solvers.time_solver import ProbeRecord
from utils.common import DecayError, DomainError, ParseError, warn

logger = logging.getLogger(__name__)


class Flag(Enum):
    """频点标记"""
    OK = "ok"
    INVALID = "invalid"            # |P1| 低于阈值或 f = 0
    SINGULAR = "singular"          # e^{jks} ≈ H₁₂
    POLE = "pole"                  # R ≈ 1，阻抗为极点
    ABOVE_CUTOFF = "above_cutoff"  # 高于中心线探头的可用上限


class WavenumberMode(Enum):
    """提取时使用的波数"""
    COMPLEX = "complex"                  # 全部使用复波数
    REAL = "real"                        # 全部使用实部
    REAL_PROPAGATOR = "real_propagator"  # 只在平移因子 e^{j2kx₁} 中用实部


@dataclass
class TmtfSettings:
    decay_tail_fraction: float = 0.1
    decay_warn_ratio: float = 0.01
    decay_error_ratio: float = 0.1
    invalid_floor: float = 1e-12
    singular_floor: float = 1e-12
    pole_floor: float = 1e-14

    @classmethod
    def from_defaults(cls, section: Dict) -> "TmtfSettings":
        known = {k: float(v) for k, v in section.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass(frozen=True)
class ProbeGeometry:
    """x1、x2 为两个探头到参考面的距离"""
    x1: float
    x2: float

    def __post_init__(self):
        if not (self.x1 > 0 and self.x2 > 0):
            raise DomainError(f"探头到参考面的距离必须为正: x1={self.x1}, x2={self.x2}")
        if self.x1 == self.x2:
            raise DomainError("两个探头位置不能重合")

    @property
    def s(self) -> float:
        return abs(self.x1 - self.x2)

    @property
    def signed_s(self) -> float:
        return self.x1 - self.x2

    def swapped(self) -> "ProbeGeometry":
        return ProbeGeometry(self.x2, self.x1)


@dataclass
class ProbeSpectra:
    freqs: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    decay_ratios: Tuple[float, float] = (0.0, 0.0)
    warnings: List[str] = field(default_factory=list)


@dataclass
class ImpedanceSpectrum:
    """参考面上的反射系数与归一化阻抗 Z/Z₀ = R + jX"""
    freqs: np.ndarray
    reflection: np.ndarray
    impedance: np.ndarray
    flags: List[Flag]
    warnings: List[str] = field(default_factory=list)

    @property
    def resistance(self) -> np.ndarray:
        return self.impedance.real

    @property
    def reactance(self) -> np.ndarray:
        return self.impedance.imag

    def ok_mask(self) -> np.ndarray:
        return np.array([f == Flag.OK for f in self.flags], dtype=bool)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'f_hz': self.freqs,
            're_R': self.reflection.real,
            'im_R': self.reflection.imag,
            'resistance': self.resistance,
            'reactance': self.reactance,
            'flag': [f.value for f in self.flags],
        })


def decay_ratio(values: np.ndarray, tail_fraction: float = 0.1) -> float:
    """末尾 tail_fraction 段的最大幅值与全局峰值之比"""
    values = np.abs(np.asarray(values, dtype=float))
    peak = float(values.max()) if len(values) else 0.0
    if peak == 0.0:
        return 0.0
    n_tail = max(1, int(np.ceil(tail_fraction * len(values))))
    return float(values[-n_tail:].max()) / peak


def spectra_from_probes(rec1: ProbeRecord, rec2: ProbeRecord,
                        settings: Optional[TmtfSettings] = None) -> ProbeSpectra:
    """
    全记录矩形窗 DFT

    先做衰减检查：末尾 10% 的最大值应小于峰值的 1%，否则附加警告
    """
    settings = settings or TmtfSettings()
    if len(rec1.values) != len(rec2.values):
        raise DomainError(f"两个探头记录长度不同: {len(rec1.values)} vs {len(rec2.values)}")
    if len(rec1.values) < 2:
        raise DomainError("探头记录至少需要 2 个样本")
    if not np.allclose(rec1.times, rec2.times, rtol=0.0, atol=1e-12 * max(1.0, float(rec1.times[-1]))):
        raise DomainError("两个探头的采样时间不一致")

    warnings: List[str] = []
    ratios = (decay_ratio(rec1.values, settings.decay_tail_fraction),
              decay_ratio(rec2.values, settings.decay_tail_fraction))
    for label, ratio in zip(("探头 1", "探头 2"), ratios):
        if ratio >= settings.decay_warn_ratio:
            warn(logger, warnings,
                 f"{label} 信号未充分衰减：末段最大值为峰值的 {100 * ratio:.2f}%，频谱可能泄漏")

    dt = rec1.dt
    freqs = np.fft.rfftfreq(len(rec1.values), dt)
    return ProbeSpectra(freqs=freqs, p1=np.fft.rfft(rec1.values), p2=np.fft.rfft(rec2.values),
                        decay_ratios=ratios, warnings=warnings)


def transfer_function(p1: np.ndarray, p2: np.ndarray, floor: float = 1e-12) -> Tuple[np.ndarray, np.ndarray]:
    """
    H₁₂ = P₂/P₁

    Returns:
        (H, invalid)，|P₁| 不超过峰值 floor 倍的频点为 invalid，H 取 NaN
    """
    p1 = np.asarray(p1, dtype=complex)
    p2 = np.asarray(p2, dtype=complex)
    if p1.shape != p2.shape:
        raise DomainError("两个频谱长度不同")
    mag = np.abs(p1)
    peak = float(mag.max()) if mag.size else 0.0
    invalid = mag <= floor * peak if peak > 0 else np.ones(mag.shape, dtype=bool)
    h = np.full(p1.shape, np.nan + 1j * np.nan)
    h[~invalid] = p2[~invalid] / p1[~invalid]
    return h, invalid


def reflection_at_reference(h: np.ndarray, geom: ProbeGeometry, kz: np.ndarray,
                            kz_propagator: Optional[np.ndarray] = None,
                            floor: float = 1e-12) -> Tuple[np.ndarray, np.ndarray]:
    """
    参考面反射系数

    Args:
        kz: 每个频点的轴向波数（有损管道为复数）
        kz_propagator: 平移因子 e^{j2k x₁} 使用的波数，默认同 kz

    Returns:
        (R, singular)，|e^{jks} − H| < floor 的频点为 singular
    """
    h = np.asarray(h, dtype=complex)
    kz = np.asarray(kz, dtype=complex)
    kp = kz if kz_propagator is None else np.asarray(kz_propagator, dtype=complex)
    s = geom.signed_s
    denom = np.exp(1j * kz * s) - h
    with np.errstate(invalid='ignore'):
        singular = np.abs(denom) < floor
    r = np.full(h.shape, np.nan + 1j * np.nan)
    ok = ~singular & np.isfinite(h)
    r[ok] = (h[ok] - np.exp(-1j * kz[ok] * s)) / denom[ok] * np.exp(2j * kp[ok] * geom.x1)
    return r, singular


def normalized_impedance(r: np.ndarray, floor: float = 1e-14) -> Tuple[np.ndarray, np.ndarray]:
    """Z' = (1+R)/(1−R)，R ≈ 1 的频点为极点（取 inf）"""
    r = np.asarray(r, dtype=complex)
    with np.errstate(invalid='ignore'):
        pole = np.abs(1.0 - r) < floor
    z = np.full(r.shape, complex(np.inf, np.inf))
    ok = ~pole
    with np.errstate(invalid='ignore', divide='ignore'):
        z[ok] = (1.0 + r[ok]) / (1.0 - r[ok])
    return z, pole


def wavenumbers_for_mode(kz: np.ndarray, mode: WavenumberMode) -> Tuple[np.ndarray, np.ndarray]:
    """返回 (括号内使用的波数, 平移因子使用的波数)"""
    kz = np.asarray(kz, dtype=complex)
    if mode == WavenumberMode.COMPLEX:
        return kz, kz
    if mode == WavenumberMode.REAL:
        return kz.real.astype(complex), kz.real.astype(complex)
    return kz, kz.real.astype(complex)


def impedance_from_spectra(freqs: np.ndarray, p1: np.ndarray, p2: np.ndarray,
                           geom: ProbeGeometry, duct: LossyDuctModel, f_max: float,
                           mode: WavenumberMode = WavenumberMode.COMPLEX,
                           settings: Optional[TmtfSettings] = None,
                           warnings: Optional[List[str]] = None) -> ImpedanceSpectrum:
    """频谱 → 参考面阻抗谱，截取到 f_max"""
    settings = settings or TmtfSettings()
    warnings = list(warnings or [])
    if not f_max > 0:
        raise DomainError(f"f_max 必须为正: {f_max}")

    freqs = np.asarray(freqs, dtype=float)
    keep = freqs <= f_max
    freqs, p1, p2 = freqs[keep], np.asarray(p1)[keep], np.asarray(p2)[keep]

    cutoff = centerline_limit(duct.section.a_e, duct.c0)
    if f_max > cutoff:
        warn(logger, warnings,
             f"f_max={f_max:g} Hz 高于中心线探头可用上限 {cutoff:.0f} Hz，高阶模可能污染结果")

    positive = freqs > 0
    if np.any(positive):
        duct.check_hard_wall(float(freqs[positive].min()))
        warnings.extend(m for m in duct.warnings if m not in warnings)
    kz = np.zeros(freqs.shape, dtype=complex)
    kz[positive] = kz_for_section(freqs[positive], duct)
    k_bracket, k_shift = wavenumbers_for_mode(kz, mode)

    h, invalid = transfer_function(p1, p2, settings.invalid_floor)
    invalid = invalid | ~positive
    h[~positive] = np.nan
    r, singular = reflection_at_reference(h, geom, k_bracket, k_shift, settings.singular_floor)
    z, pole = normalized_impedance(r, settings.pole_floor)

    flags = []
    for i in range(len(freqs)):
        if invalid[i]:
            flags.append(Flag.INVALID)
        elif singular[i]:
            flags.append(Flag.SINGULAR)
        elif pole[i]:
            flags.append(Flag.POLE)
        elif freqs[i] > cutoff:
            flags.append(Flag.ABOVE_CUTOFF)
        else:
            flags.append(Flag.OK)

    spectrum = ImpedanceSpectrum(freqs=freqs, reflection=r, impedance=z, flags=flags, warnings=warnings)
    n_ok = int(spectrum.ok_mask().sum())
    logger.info(f"阻抗提取: {len(freqs)} 个频点, 有效 {n_ok} 个 (k 模式 {mode.value})")
    return spectrum


def extract_impedance(rec1: ProbeRecord, rec2: ProbeRecord, geom: ProbeGeometry,
                      duct: LossyDuctModel, f_max: float,
                      mode: WavenumberMode = WavenumberMode.COMPLEX,
                      settings: Optional[TmtfSettings] = None) -> ImpedanceSpectrum:
    """
    完整 TMTF 流程

    Raises:
        DecayError: 任一探头末段幅值超过峰值的 10%
    """
    settings = settings or TmtfSettings()
    spectra = spectra_from_probes(rec1, rec2, settings)
    worst = max(spectra.decay_ratios)
    if worst > settings.decay_error_ratio:
        raise DecayError(
            f"探头信号末段为峰值的 {100 * worst:.1f}%，超过 {100 * settings.decay_error_ratio:.0f}%；"
            f"请延长仿真时间或增加壁面吸声")
    return impedance_from_spectra(spectra.freqs, spectra.p1, spectra.p2, geom, duct, f_max,
                                  mode, settings, spectra.warnings)


def write_probe_csv(record: ProbeRecord, path: str):
    record.to_frame().to_csv(path, index=False, float_format='%.17g')


def read_probe_csv(path: str) -> ProbeRecord:
    """读取 t_s,p_pa 探头记录"""
    df = pd.read_csv(path, float_precision='round_trip')
    missing = [c for c in ('t_s', 'p_pa') if c not in df.columns]
    if missing:
        raise ParseError(f"{path} 缺少列: {', '.join(missing)}", 1)
    if df[['t_s', 'p_pa']].isna().any().any():
        raise ParseError(f"{path} 含非数值项")
    nan_pos = (float('nan'),) * 3
    return ProbeRecord(position=nan_pos, times=df['t_s'].to_numpy(dtype=float),
                       values=df['p_pa'].to_numpy(dtype=float))


def write_spectrum_csv(spectrum: ImpedanceSpectrum, path: str):
    spectrum.to_frame().to_csv(path, index=False, float_format='%.17g')

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
声源：高斯脉冲体积速度 Q(t) 及其边界载荷 g(t) = −ρ₀/S·dQ/dt
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy import signal

from utils.common import DomainError

logger = logging.getLogger(__name__)

# 高斯脉冲在 T_gp 两侧降到 1/e 的相对宽度
PULSE_WIDTH = 0.29


def gaussian_pulse(n, dt: float, t_gp: float):
    """gp(n) = exp(−[(Δt·n − T_gp)/(0.29·T_gp)]²)"""
    if not t_gp > 0:
        raise DomainError(f"脉冲中心时刻必须为正: {t_gp}")
    t = np.asarray(n, dtype=float) * dt
    value = np.exp(-((t - t_gp) / (PULSE_WIDTH * t_gp)) ** 2)
    return float(value) if np.ndim(n) == 0 else value


def lowpass_zero_phase(samples: np.ndarray, dt: float, cutoff_hz: float, order: int = 4) -> np.ndarray:
    """Butterworth 前后向滤波（零相位，等效阶数 2·order）"""
    nyquist = 0.5 / dt
    if cutoff_hz >= nyquist:
        logger.info(f"低通截止 {cutoff_hz:g} Hz 不低于奈奎斯特频率 {nyquist:g} Hz，跳过滤波")
        return samples
    sos = signal.butter(order, cutoff_hz, btype='low', fs=1.0 / dt, output='sos')
    return signal.sosfiltfilt(sos, samples)


def source_volume_velocity(steps: int, dt: float, t_gp: float,
                           lowpass_hz: Optional[float] = None, order: int = 4,
                           amplitude: float = 1.0) -> np.ndarray:
    """
    采样的体积速度 Q(n·Δt)，n = 0..steps

    滤波在覆盖整个脉冲的窗口上进行后再截取，避免短记录时的边界效应
    """
    n_eval = max(steps + 1, int(math.ceil(4.0 * t_gp / dt)) + 64)
    q = gaussian_pulse(np.arange(n_eval), dt, t_gp)
    if lowpass_hz:
        q = lowpass_zero_phase(q, dt, lowpass_hz, order)
    return amplitude * q[:steps + 1]


def boundary_load(q: np.ndarray, dt: float, rho0: float, area: float) -> np.ndarray:
    """g(tⁿ) = −ρ₀/S·dQ/dt，导数取中心差分"""
    if not area > 0:
        raise DomainError(f"声源面积必须为正: {area}")
    if len(q) < 2:
        return np.zeros(len(q))
    return -rho0 / area * np.gradient(q, dt)


def source_signals(steps: int, dt: float, t_gp: float, rho0: float, area: float,
                   lowpass_hz: Optional[float] = None, order: int = 4,
                   amplitude: float = 1.0):
    """
    返回 (Q, g)，长度均为 steps+1

    导数在延长窗口上计算后再截取，末样本同样使用中心差分
    """
    q_ext = source_volume_velocity(max(steps, int(math.ceil(4.0 * t_gp / dt)) + 64) + 1,
                                   dt, t_gp, lowpass_hz, order, amplitude)
    g_ext = boundary_load(q_ext, dt, rho0, area)
    return q_ext[:steps + 1], g_ext[:steps + 1]

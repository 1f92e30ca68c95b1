#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
独立解析参考
合成两点平面波声场、椭圆积分数值积分、闭管简正频率、带法兰圆活塞辐射阻抗

这里的实现不复用主模块的数值核（积分用自适应求积，活塞阻抗用 Bessel/Struve 函数），
与主模块结果一致才有检验意义。
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np
from scipy import integrate, special

from utils.common import DomainError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, complex, np.ndarray]


@dataclass
class SyntheticFieldSpec:
    """合成声场：参考面反射 R₀(f)、波数 k(f)、探头位置与幅值 A(f)"""
    r0: ArrayLike
    k: ArrayLike
    x1: float
    x2: float
    amplitude: ArrayLike = 1.0

    def __post_init__(self):
        if not np.all(np.isfinite(np.asarray(self.r0))):
            raise DomainError("R0 必须为有限值")


def synthetic_two_point_field(spec: SyntheticFieldSpec) -> Tuple[np.ndarray, np.ndarray]:
    """P_i = A(e^{jk x_i} + R₀e^{−jk x_i})，x 为到参考面的距离"""
    k = np.asarray(spec.k, dtype=complex)
    r0 = np.asarray(spec.r0, dtype=complex)
    amp = np.asarray(spec.amplitude, dtype=complex)

    def pressure(x: float) -> np.ndarray:
        return amp * (np.exp(1j * k * x) + r0 * np.exp(-1j * k * x))

    return pressure(spec.x1), pressure(spec.x2)


def quadrature_elliptic_integral(e: float) -> float:
    """∫₀^{π/2} √(1 − e²cos²η) dη，绝对容差 1e-13"""
    if not 0.0 <= e <= 1.0:
        raise DomainError(f"偏心率必须在 [0, 1] 内: {e}")
    value, _ = integrate.quad(lambda eta: math.sqrt(1.0 - (e * math.cos(eta)) ** 2),
                              0.0, 0.5 * math.pi, epsabs=1e-13, epsrel=1e-13, limit=200)
    return value


def closed_duct_modes(length: float, c0: float = 345.0, n_max: int = 3) -> List[float]:
    """两端刚性封闭管的共振频率 n·c₀/(2L)"""
    if not length > 0:
        raise DomainError(f"管长必须为正: {length}")
    return [n * c0 / (2.0 * length) for n in range(1, n_max + 1)]


def flanged_piston_impedance(ka: ArrayLike) -> ArrayLike:
    """
    无限大障板上圆活塞的归一化辐射阻抗

    Z' = 1 − J₁(2ka)/(ka) + j·H₁(2ka)/(ka)
    """
    ka_arr = np.asarray(ka, dtype=float)
    if np.any(ka_arr <= 0):
        raise DomainError("ka 必须为正")
    x = 2.0 * ka_arr
    z = 1.0 - special.j1(x) / ka_arr + 1j * special.struve(1, x) / ka_arr
    return complex(z) if z.ndim == 0 else z

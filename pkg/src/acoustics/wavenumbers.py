#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
管道声学解析工具
椭圆积分 I(e)、有损椭圆/圆管的复轴向波数、等吸声导纳匹配、
圆管高阶模截止频率、传声器间距建议
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple, Union

import numpy as np
from scipy.special import jn_zeros, jnp_zeros

from meshers.section import EllipseSection
from utils.common import DomainError, warn

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# 硬壁近似的有效范围：修正项 4μI(e)/(k₀πb) 不应超过该值
HARD_WALL_ADVISORY = 0.5

SERIES_TOLERANCE = 1e-14
SERIES_MAX_TERMS = 100000


def elliptic_I(e: float) -> float:
    """
    I(e) = ∫₀^{π/2} √(1 − e²cos²η) dη 的级数展开

    I(e) = (π/2)[1 − Σₙ ((2n−1)!!/(2n)!!)²·e^{2n}/(2n−1)]，
    级数项小于部分和的 1e-14 时停止
    """
    if not 0.0 <= e < 1.0:
        raise DomainError(f"偏心率必须在 [0, 1) 内: {e}")
    e2 = e * e
    total = 1.0
    ratio = 1.0      # (2n−1)!!/(2n)!!
    power = 1.0      # e^{2n}
    for n in range(1, SERIES_MAX_TERMS + 1):
        ratio *= (2 * n - 1) / (2 * n)
        power *= e2
        term = ratio * ratio * power / (2 * n - 1)
        total -= term
        if term < SERIES_TOLERANCE * total:
            break
    return 0.5 * math.pi * total


@dataclass
class LossyDuctModel:
    """有损管道模型：截面、壁面导纳系数 μ_z、声速"""
    section: EllipseSection
    mu_z: float
    c0: float = 345.0
    warnings: List[str] = field(default_factory=list, compare=False)

    def __post_init__(self):
        if self.mu_z < 0:
            raise DomainError(f"导纳系数不能为负: {self.mu_z}")
        if not self.c0 > 0:
            raise DomainError(f"声速必须为正: {self.c0}")

    def correction(self, f: ArrayLike) -> ArrayLike:
        """轴向波数修正项 4μ_z I(e)/(k₀ π b_e)"""
        k0 = 2.0 * np.pi * np.asarray(f, dtype=float) / self.c0
        return 4.0 * self.mu_z * elliptic_I(self.section.eccentricity) / (k0 * np.pi * self.section.b_e)

    def check_hard_wall(self, f_min: float):
        """修正项过大时给出提示（一阶近似失效）"""
        term = float(self.correction(f_min))
        if term >= HARD_WALL_ADVISORY:
            warn(logger, self.warnings,
                 f"{f_min:g} Hz 处波数修正项 {term:.3f} >= {HARD_WALL_ADVISORY}，一阶有损近似精度下降")


def _check_frequency(f: ArrayLike) -> np.ndarray:
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr <= 0):
        raise DomainError("频率必须为正")
    return f_arr


def _principal(k0: np.ndarray, correction: np.ndarray) -> ArrayLike:
    kz = k0 * np.sqrt(1.0 - 1j * correction)
    return complex(kz) if kz.ndim == 0 else kz


def kz_elliptical(f: ArrayLike, model: LossyDuctModel) -> ArrayLike:
    """
    有损椭圆管的复轴向波数

    k_z ≃ k₀·√(1 − j·4μ_z I(e)/(k₀ π b_e))，主值分支，Im(k_z) ≤ 0
    """
    f_arr = _check_frequency(f)
    k0 = 2.0 * np.pi * f_arr / model.c0
    if model.mu_z == 0:
        return _principal(k0, np.zeros_like(k0))
    return _principal(k0, np.asarray(model.correction(f_arr)))


def kz_circular(f: ArrayLike, a: float, mu_z: float, c0: float = 345.0) -> ArrayLike:
    """有损圆管的复轴向波数 k₀·√(1 − j·2μ_z/(k₀a))"""
    f_arr = _check_frequency(f)
    if not a > 0:
        raise DomainError(f"半径必须为正: {a}")
    if mu_z < 0:
        raise DomainError(f"导纳系数不能为负: {mu_z}")
    k0 = 2.0 * np.pi * f_arr / c0
    return _principal(k0, 2.0 * mu_z / (k0 * a))


def kz_for_section(f: ArrayLike, model: LossyDuctModel) -> ArrayLike:
    """圆截面走圆管公式，其余走椭圆公式"""
    if model.section.is_circular:
        return kz_circular(f, model.section.a_e, model.mu_z, model.c0)
    return kz_elliptical(f, model)


def match_admittance(mu_j: float, e_j: float, b_j: float, e_i: float, b_i: float) -> float:
    """
    使管道 i 与基准管道 j 的轴向波数修正项相等

    μ_i = μ_j·(I(e_j)/I(e_i))·(b_i/b_j)
    """
    if not (b_i > 0 and b_j > 0):
        raise DomainError("短半轴必须为正")
    if mu_j < 0:
        raise DomainError(f"导纳系数不能为负: {mu_j}")
    return mu_j * (elliptic_I(e_j) / elliptic_I(e_i)) * (b_i / b_j)


@dataclass
class CutoffMode:
    label: str
    bessel_zero: float
    f_hz: float
    centerline_limiting: bool


def circular_cutoffs(a: float, c0: float = 345.0) -> List[CutoffMode]:
    """
    圆管前三个非平面模的截止频率 f = j'·c₀/(2πa)

    (1,0)、(2,0) 在中心线上有节线，(0,1) 是第一个不被中心线探头抑制的模
    """
    if not a > 0:
        raise DomainError(f"半径必须为正: {a}")
    # J₀' = −J₁，故 J₀' 的第一个非零零点即 J₁ 的第一个零点
    zeros = [
        ("(1,0)", float(jnp_zeros(1, 1)[0]), False),
        ("(2,0)", float(jnp_zeros(2, 1)[0]), False),
        ("(0,1)", float(jn_zeros(1, 1)[0]), True),
    ]
    return [CutoffMode(label, z, z * c0 / (2.0 * math.pi * a), limiting)
            for label, z, limiting in zeros]


def centerline_limit(a: float, c0: float = 345.0) -> float:
    """中心线探头可用的上限频率"""
    return next(m.f_hz for m in circular_cutoffs(a, c0) if m.centerline_limiting)


@dataclass
class SpacingAdvice:
    lambda_min: float
    s_min: float
    s_max: float
    s_opt: float
    x1_min: float


def spacing_advice(f_max: float, c0: float, h: float, a_e: float = 0.0) -> SpacingAdvice:
    """
    传声器间距建议

    λ_min = c₀/f_max；s ∈ [max(h, 0.1λ_min), 0.4λ_min]，最佳 0.25λ_min；
    第一个探头距参考面至少 2.1·a_e
    """
    if not f_max > 0:
        raise DomainError(f"最高频率必须为正: {f_max}")
    if not h > 0:
        raise DomainError(f"网格尺寸必须为正: {h}")
    lam = c0 / f_max
    if h >= 0.4 * lam:
        raise DomainError(
            f"网格尺寸 h={h:g} m 不小于 0.4·λ_min={0.4 * lam:g} m，没有可用的探头间距")
    return SpacingAdvice(
        lambda_min=lam,
        s_min=max(h, 0.1 * lam),
        s_max=0.4 * lam,
        s_opt=0.25 * lam,
        x1_min=2.1 * a_e,
    )


def classify_spacing(s: float, f_max: float, c0: float) -> Tuple[float, bool]:
    """返回 (s/λ_min, 是否位于推荐区间 (0.1, 0.4)·λ_min)"""
    if not (s > 0 and f_max > 0):
        raise DomainError("间距和频率必须为正")
    ratio = s * f_max / c0
    return ratio, 0.1 < ratio < 0.4


def sensitivity_proxy(s: float, f: float, c0: float) -> float:
    """
    双传声器分解矩阵 [[e^{−jkx₁}, e^{jkx₁}], [e^{−jkx₂}, e^{jkx₂}]] 的 2-范数条件数

    k·s = mπ 时矩阵奇异，返回 inf
    """
    if not (s > 0 and f > 0):
        raise DomainError("间距和频率必须为正")
    k = 2.0 * math.pi * f / c0
    matrix = np.array([[1.0, 1.0], [np.exp(-1j * k * s), np.exp(1j * k * s)]])
    sv = np.linalg.svd(matrix, compute_uv=False)
    if sv[-1] <= 1e-12 * sv[0]:
        return math.inf
    return float(sv[0] / sv[-1])


def cutoff_table(modes: List[CutoffMode]) -> List[Dict]:
    return [{'label': m.label, 'f_hz': m.f_hz, 'centerline_limiting': m.centerline_limiting}
            for m in modes]

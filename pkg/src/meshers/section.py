#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
截面与管道几何定义
椭圆/圆形截面、管道规格、声道面积函数
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Union

import numpy as np

from utils.common import DomainError, ParseError

logger = logging.getLogger(__name__)


class Termination(Enum):
    """管道末端类型"""
    CLOSED_RIGID = "closed"    # 刚性封闭
    OPEN_FLANGED = "open"      # 开口，待与法兰辐射箱融合
    COUPLED = "coupled"        # 开口，待与其他网格（如声道）耦合


@dataclass(frozen=True)
class EllipseSection:
    """椭圆截面，a_e 为长半轴，b_e 为短半轴（单位 m）"""
    a_e: float
    b_e: float

    def __post_init__(self):
        if not (self.b_e > 0 and self.a_e > 0):
            raise DomainError(f"半轴必须为正: a_e={self.a_e}, b_e={self.b_e}")
        if self.b_e > self.a_e:
            raise DomainError(f"短半轴不能大于长半轴: a_e={self.a_e}, b_e={self.b_e}")

    @property
    def eccentricity(self) -> float:
        return math.sqrt(max(0.0, 1.0 - (self.b_e / self.a_e) ** 2))

    @property
    def area(self) -> float:
        return math.pi * self.a_e * self.b_e

    @property
    def focal_distance(self) -> float:
        return self.a_e * self.eccentricity

    @property
    def is_circular(self) -> bool:
        return self.a_e == self.b_e


def make_elliptical_section(area: float, eccentricity: float) -> EllipseSection:
    """
    把面积为 area 的圆截面按偏心率重塑为等面积椭圆

    Args:
        area: 截面面积 (m²)
        eccentricity: 偏心率，0 <= e < 1

    Returns:
        EllipseSection，满足 π·a_e·b_e = area
    """
    if not area > 0:
        raise DomainError(f"截面面积必须为正: {area}")
    if not 0.0 <= eccentricity < 1.0:
        raise DomainError(f"偏心率必须在 [0, 1) 内: {eccentricity}")

    if eccentricity == 0.0:
        radius = math.sqrt(area / math.pi)
        return EllipseSection(radius, radius)

    a_e = math.sqrt(area / (math.pi * math.sqrt(1.0 - eccentricity ** 2)))
    b_e = min(area / (math.pi * a_e), a_e)
    return EllipseSection(a_e, b_e)


@dataclass
class DuctSpec:
    """阻抗管规格"""
    section: EllipseSection
    length: float
    h: float
    termination: Termination = Termination.CLOSED_RIGID
    warnings: List[str] = field(default_factory=list, compare=False)

    def __post_init__(self):
        if not self.length > 0:
            raise DomainError(f"管长必须为正: {self.length}")
        if not self.h > 0:
            raise DomainError(f"网格尺寸必须为正: {self.h}")
        # 标准要求管长至少为半径（或长半轴）的三倍，只警告
        if self.length < 3.0 * self.section.a_e:
            message = (f"管长 {self.length:g} m 小于 3 倍长半轴 "
                       f"({3.0 * self.section.a_e:g} m)")
            logger.warning(message)
            self.warnings.append(message)


@dataclass
class AreaFunction:
    """
    声道面积函数

    z 严格递增，面积全部为正；偏心率为单值或逐站点给出
    """
    z: np.ndarray
    areas: np.ndarray
    eccentricity: Union[float, np.ndarray] = 0.0

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        self.areas = np.asarray(self.areas, dtype=float)
        if self.z.ndim != 1 or self.z.shape != self.areas.shape:
            raise ParseError("z 与面积列长度不一致")
        if len(self.z) < 2:
            raise ParseError(f"面积函数至少需要 2 个站点，实际 {len(self.z)} 个")
        if np.any(np.diff(self.z) <= 0):
            bad = int(np.argmax(np.diff(self.z) <= 0)) + 1
            raise ParseError(f"z 坐标必须严格递增（站点 {bad}）")
        if np.any(self.areas <= 0):
            raise ParseError("面积必须全部为正")

        ecc = np.broadcast_to(np.asarray(self.eccentricity, dtype=float), self.z.shape)
        if np.any(ecc < 0) or np.any(ecc >= 1):
            raise DomainError("偏心率必须在 [0, 1) 内")
        self.eccentricity = np.array(ecc)

    @property
    def length(self) -> float:
        return float(self.z[-1] - self.z[0])

    def section_at(self, z: float) -> EllipseSection:
        """站点间按面积与偏心率线性插值"""
        area = float(np.interp(z, self.z, self.areas))
        ecc = float(np.interp(z, self.z, self.eccentricity))
        return make_elliptical_section(area, ecc)

    def sections(self) -> List[EllipseSection]:
        return [make_elliptical_section(float(a), float(e))
                for a, e in zip(self.areas, self.eccentricity)]

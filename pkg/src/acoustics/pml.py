#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
PML 阻尼剖面与系数场

ξ̂ = c₀/L·ln(1/r∞)（自然对数），
ξ(x) = ξ̂·[d/L − sin(2πd/L)/(2π)]，d = |x| − l 为进入吸收层的深度
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from meshers.mesh import Mesh, Region
from utils.common import DomainError, MeshError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def xi_hat(c0: float, layer_width: float, r_inf: float) -> float:
    """PML 最大阻尼强度 (1/s)"""
    if not layer_width > 0:
        raise DomainError(f"PML 厚度必须为正: {layer_width}")
    if not 0.0 < r_inf <= 1.0:
        raise DomainError(f"相对反射系数必须在 (0, 1] 内: {r_inf}")
    return c0 / layer_width * math.log(1.0 / r_inf)


def damping_profile(xi_max: float, x: ArrayLike, l: float, layer_width: float) -> ArrayLike:
    """
    阻尼剖面，|x| < l 时为 0，在 |x| = l + L 处达到 ξ̂

    Raises:
        DomainError: 点位于吸收层之外
    """
    x_arr = np.abs(np.asarray(x, dtype=float))
    depth = x_arr - l
    if np.any(depth > layer_width * (1.0 + 1e-9) + 1e-12):
        raise DomainError(f"坐标超出 PML 外边界 l+L = {l + layer_width:g}")
    ratio = np.clip(depth / layer_width, 0.0, 1.0)
    value = xi_max * (ratio - np.sin(2.0 * np.pi * ratio) / (2.0 * np.pi))
    value = np.where(depth > 0, value, 0.0)
    if np.ndim(x) == 0:
        return float(value)
    return value


@dataclass
class PmlCoefficients:
    """由三个方向阻尼剖面组合出的系数"""
    alpha: ArrayLike
    beta: ArrayLike
    gamma: ArrayLike
    a: Tuple[ArrayLike, ArrayLike, ArrayLike]
    b: Tuple[ArrayLike, ArrayLike, ArrayLike]


def pml_coefficients(xi1: ArrayLike, xi2: ArrayLike, xi3: ArrayLike) -> PmlCoefficients:
    return PmlCoefficients(
        alpha=xi1 + xi2 + xi3,
        beta=xi1 * xi2 + xi2 * xi3 + xi3 * xi1,
        gamma=xi1 * xi2 * xi3,
        a=(xi2 + xi3 - xi1, xi3 + xi1 - xi2, xi1 + xi2 - xi3),
        b=(xi2 * xi3, xi3 * xi1, xi1 * xi2),
    )


@dataclass
class PmlSpec:
    """
    PML 几何

    center/half_extent 描述内部箱体（各方向中心与半宽 lᵢ），
    width_lower/width_upper 为负/正侧吸收层厚度，0 表示该侧没有吸收层
    """
    center: np.ndarray
    half_extent: np.ndarray
    width_lower: np.ndarray
    width_upper: np.ndarray
    r_inf: float = 1e-4

    def __post_init__(self):
        for name in ('center', 'half_extent', 'width_lower', 'width_upper'):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float).reshape(3))
        if np.any(self.half_extent < 0):
            raise DomainError("内部区域半宽不能为负")
        if np.any(self.width_lower < 0) or np.any(self.width_upper < 0):
            raise DomainError("PML 厚度不能为负")
        if not 0.0 < self.r_inf <= 1.0:
            raise DomainError(f"相对反射系数必须在 (0, 1] 内: {self.r_inf}")

    @classmethod
    def from_mesh(cls, mesh: Mesh, r_inf: float = 1e-4) -> "PmlSpec":
        """内部箱体取 INTERIOR 单元的包围盒；PML 单元延伸到其外的一侧即为有效吸收层"""
        interior = mesh.tet_region == int(Region.INTERIOR)
        if not np.any(interior):
            raise MeshError("网格没有 INTERIOR 单元，无法确定 PML 内边界")
        inner_nodes = mesh.nodes[np.unique(mesh.tets[interior])]
        lo, hi = inner_nodes.min(axis=0), inner_nodes.max(axis=0)
        all_lo, all_hi = mesh.nodes.min(axis=0), mesh.nodes.max(axis=0)
        tol = 1e-9 * max(1.0, float(np.max(all_hi - all_lo)))
        lower = np.where(lo - all_lo > tol, lo - all_lo, 0.0)
        upper = np.where(all_hi - hi > tol, all_hi - hi, 0.0)
        return cls(center=0.5 * (lo + hi), half_extent=0.5 * (hi - lo),
                   width_lower=lower, width_upper=upper, r_inf=r_inf)

    @property
    def active(self) -> bool:
        return bool(np.any(self.width_lower > 0) or np.any(self.width_upper > 0)) and self.r_inf < 1.0

    def profiles(self, points: np.ndarray, c0: float) -> np.ndarray:
        """points (N,3) 处三个方向的阻尼剖面 ξᵢ，返回 (N,3)"""
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        xi = np.zeros_like(points)
        for i in range(3):
            offset = points[:, i] - self.center[i]
            for width, side in ((self.width_upper[i], offset > 0), (self.width_lower[i], offset < 0)):
                if width <= 0:
                    continue
                strength = xi_hat(c0, width, self.r_inf)
                xi[side, i] = damping_profile(strength, offset[side], self.half_extent[i], width)
        return xi

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
线性四面体有限元装配
刚度矩阵、集中质量、吸声边界阻尼、PML 耦合矩阵、声源载荷分布

质量类矩阵（M、B、Mα、Mβ、Mγ、Mξᵢ）全部按行和集中，以对角向量保存；
PML 辅助通量 Φᵢ 定义在 PML 单元上，一阶导数矩阵 Bᵢ、B_{i,aᵢ}、B_{i,bᵢ} 为节点与单元之间的 CSR 矩阵。
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
import scipy.sparse as sps

from acoustics.pml import PmlSpec, pml_coefficients
from meshers.mesh import FacetTag, Mesh, Region, WallGroup
from utils.common import AssemblyError, ConfigurationError, DomainError

logger = logging.getLogger(__name__)

SOURCE_SIDES = ('all', '+x', '-x', '+y', '-y')


def element_geometry(mesh: Mesh):
    """
    计算单元体积与形函数梯度

    Returns:
        (volumes [T], grads [T,4,3])

    Raises:
        AssemblyError: 存在零体积或负体积单元
    """
    p = mesh.nodes[mesh.tets]
    d = p[:, 1:, :] - p[:, :1, :]
    volumes = np.linalg.det(d) / 6.0
    edge = np.max(np.linalg.norm(d, axis=2), axis=1)
    degenerate = volumes <= 1e-12 * edge ** 3
    if np.any(degenerate):
        bad = int(np.argmax(degenerate))
        raise AssemblyError(f"单元 {bad} 退化（体积 {volumes[bad]:.3e}）")
    grads = np.empty((mesh.n_tets, 4, 3))
    # x − p₀ = Dᵀξ，∇ξ 为 D⁻¹ 的列
    grads[:, 1:, :] = np.linalg.inv(d).transpose(0, 2, 1)
    grads[:, 0, :] = -grads[:, 1:, :].sum(axis=1)
    return volumes, grads


def _scatter(tets: np.ndarray, blocks: np.ndarray, n: int) -> sps.csr_matrix:
    """单元矩阵 [T,4,4] 组装为全局 CSR，重复项按输入顺序累加"""
    rows = np.repeat(tets, 4, axis=1).ravel()
    cols = np.tile(tets, (1, 4)).ravel()
    mat = sps.coo_matrix((blocks.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def _lump(tets: np.ndarray, weights: np.ndarray, n: int) -> np.ndarray:
    """每个单元节点分得 weights/4"""
    return np.bincount(tets.ravel(), weights=np.repeat(weights / 4.0, 4), minlength=n)


def assemble_stiffness(mesh: Mesh) -> sps.csr_matrix:
    """K^{ab} = (∇N^a, ∇N^b)"""
    volumes, grads = element_geometry(mesh)
    blocks = volumes[:, None, None] * np.einsum('eak,ebk->eab', grads, grads)
    return _scatter(mesh.tets, blocks, mesh.n_nodes)


def assemble_mass(mesh: Mesh, lumped: bool = True) -> sps.csr_matrix:
    """
    质量矩阵 M^{ab} = (N^a, N^b)

    一致质量单元阵为 V/20·(I + 1)，集中质量取其行和 V/4
    """
    volumes, _ = element_geometry(mesh)
    if lumped:
        return sps.diags(_lump(mesh.tets, volumes, mesh.n_nodes), format='csr')
    blocks = volumes[:, None, None] / 20.0 * (np.eye(4) + np.ones((4, 4)))[None, :, :]
    return _scatter(mesh.tets, blocks, mesh.n_nodes)


def resolve_facet_admittance(mesh: Mesh, admittances: Dict[str, float]) -> np.ndarray:
    """
    解析每个 LOSSY_WALL 面片的导纳 μ

    显式数值优先；否则按 mu_z / mu_w 引用配置；两者都没有时取 0
    """
    for key, value in admittances.items():
        if value < 0:
            raise DomainError(f"导纳 {key} 不能为负: {value}")
    mu = np.zeros(mesh.n_facets)
    lossy = mesh.facets_with_tag(FacetTag.LOSSY_WALL)
    explicit = ~np.isnan(mesh.facet_mu)
    if np.any(mesh.facet_mu[explicit] < 0):
        raise DomainError("面片导纳不能为负")
    mu[explicit] = mesh.facet_mu[explicit]
    for group, key in ((WallGroup.MU_Z, 'mu_z'), (WallGroup.MU_W, 'mu_w')):
        use = ~explicit & (mesh.facet_wall == int(group))
        if np.any(use & lossy):
            if key not in admittances:
                raise ConfigurationError(f"网格引用了 {key}，但配置中没有给出")
            mu[use] = admittances[key]
    unresolved = lossy & ~explicit & (mesh.facet_wall == int(WallGroup.EXPLICIT))
    if np.any(unresolved):
        logger.warning(f"{int(np.sum(unresolved))} 个吸声壁面片未给出导纳，按刚性壁处理")
    mu[~lossy] = 0.0
    return mu


def assemble_boundary_damping(mesh: Mesh, admittances: Dict[str, float]) -> sps.csr_matrix:
    """B^{ab} = (N^a, μN^b)_{Γ_W ∪ Γ_Z}，集中后每个面片节点得 μ·A/3"""
    mu = resolve_facet_admittance(mesh, admittances)
    weights = mu * mesh.facet_areas()
    diag = np.bincount(mesh.facets.ravel(), weights=np.repeat(weights / 3.0, 3),
                       minlength=mesh.n_nodes)
    return sps.diags(diag, format='csr')


@dataclass
class PmlMatrices:
    """
    PML 矩阵族

    Mα、Mβ、Mγ 为节点对角向量；辅助通量 Φᵢ 取 PML 单元上的分片常数，
    m_phi 为其质量（单元体积），m_xi 为 (Vₑ·ξᵢ)。
    b[i] (节点×单元) 为分部积分后的散度项 −(∂ᵢNᵃ, φᵢ)，
    b_a[i]、b_b[i] (单元×节点) 为 (aᵢ∂ᵢp)、(bᵢ∂ᵢψ) 在单元上的积分。
    """
    m_alpha: np.ndarray
    m_beta: np.ndarray
    m_gamma: np.ndarray
    m_phi: np.ndarray
    m_xi: np.ndarray
    b: List[sps.csr_matrix]
    b_a: List[sps.csr_matrix]
    b_b: List[sps.csr_matrix]

    @classmethod
    def zeros(cls, n: int) -> "PmlMatrices":
        return cls(np.zeros(n), np.zeros(n), np.zeros(n), np.zeros(0), np.zeros((3, 0)),
                   [sps.csr_matrix((n, 0)) for _ in range(3)],
                   [sps.csr_matrix((0, n)) for _ in range(3)],
                   [sps.csr_matrix((0, n)) for _ in range(3)])

    @property
    def n_elements(self) -> int:
        return len(self.m_phi)

    def is_zero(self) -> bool:
        """所有阻尼系数为零时 Φᵢ 恒为零，PML 方程退化为普通波动方程"""
        dense = [self.m_alpha, self.m_beta, self.m_gamma, self.m_xi]
        sparse = self.b_a + self.b_b
        return all(not np.any(v) for v in dense) and all(m.count_nonzero() == 0 for m in sparse)


def _gradient_operator(tets: np.ndarray, grads: np.ndarray, axis: int, n: int) -> sps.csr_matrix:
    """Gᵢ：节点值 → 单元上的常数导数 ∂ᵢp"""
    rows = np.repeat(np.arange(len(tets)), 4)
    mat = sps.coo_matrix((grads[:, :, axis].ravel(), (rows, tets.ravel())), shape=(len(tets), n)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def assemble_pml_from_profiles(mesh: Mesh, elements: np.ndarray, xi_nodes: np.ndarray) -> PmlMatrices:
    """
    由节点阻尼剖面装配 PML 矩阵族

    Args:
        elements: 参与装配的单元（布尔掩码或下标）
        xi_nodes: (3, N) 各方向节点阻尼 ξᵢ

    系数先在节点上组合（α_h、β_h…），再取单元四个节点的平均，即 P1 插值在形心的值。
    """
    n = mesh.n_nodes
    xi_nodes = np.asarray(xi_nodes, dtype=float).reshape(3, n)
    volumes, grads = element_geometry(mesh)
    tets, volumes, grads = mesh.tets[elements], volumes[elements], grads[elements]

    nodal = pml_coefficients(xi_nodes[0], xi_nodes[1], xi_nodes[2])

    def at_centroid(values: np.ndarray) -> np.ndarray:
        return values[tets].mean(axis=1)

    xi = np.stack([at_centroid(xi_nodes[i]) for i in range(3)])
    gradient = [_gradient_operator(tets, grads, i, n) for i in range(3)]
    return PmlMatrices(
        m_alpha=_lump(tets, volumes * at_centroid(nodal.alpha), n),
        m_beta=_lump(tets, volumes * at_centroid(nodal.beta), n),
        m_gamma=_lump(tets, volumes * at_centroid(nodal.gamma), n),
        m_phi=volumes.copy(),
        m_xi=volumes[None, :] * xi,
        b=[(-(sps.diags(volumes) @ g).T).tocsr() for g in gradient],
        b_a=[(sps.diags(volumes * at_centroid(nodal.a[i])) @ g).tocsr() for i, g in enumerate(gradient)],
        b_b=[(sps.diags(volumes * at_centroid(nodal.b[i])) @ g).tocsr() for i, g in enumerate(gradient)],
    )


def assemble_pml_matrices(mesh: Mesh, pml: Optional[PmlSpec], c0: float) -> PmlMatrices:
    """
    PML 矩阵族，阻尼剖面在节点取值，只在 PML 单元上积分，INTERIOR 单元不贡献

    散度项 (q, ∂ᵢφᵢ) 分部积分为 −(∂ᵢq, φᵢ)，截断边界上取 (c₀²∇p + φ)·n = 0。
    这样 c₀²K 与 Φᵢ 通道共用同一个单元梯度，常系数时恰为坐标拉伸后的刚度。
    """
    n = mesh.n_nodes
    in_pml = mesh.tet_region == int(Region.PML)
    if pml is None or not pml.active or not np.any(in_pml):
        return PmlMatrices.zeros(n)

    xi_nodes = np.zeros((3, n))
    pml_nodes = np.unique(mesh.tets[in_pml])
    xi_nodes[:, pml_nodes] = pml.profiles(mesh.nodes[pml_nodes], c0).T
    matrices = assemble_pml_from_profiles(mesh, in_pml, xi_nodes)
    logger.info(f"PML 装配: {matrices.n_elements} 个单元, 最大阻尼 {float(xi_nodes.max()):.1f} 1/s")
    return matrices


def source_area(mesh: Mesh) -> float:
    return float(np.sum(mesh.facet_areas(mesh.facets_with_tag(FacetTag.SOURCE))))


def assemble_source_pattern(mesh: Mesh, side: str = 'all') -> np.ndarray:
    """
    L_shape：SOURCE 面片的集中面积，每个节点得 ΣA_f/3

    side 为 +x/-x/+y/-y 时只保留形心在该半平面内的面片（偏轴激励）
    """
    if side not in SOURCE_SIDES:
        raise ConfigurationError(f"未知声源半区: {side}，可选 {', '.join(SOURCE_SIDES)}")
    mask = mesh.facets_with_tag(FacetTag.SOURCE)
    if not np.any(mask):
        raise ConfigurationError("网格中没有 SOURCE 面片，无法施加声源")
    if side != 'all':
        axis = 0 if side[1] == 'x' else 1
        sign = 1.0 if side[0] == '+' else -1.0
        centroids = mesh.nodes[mesh.facets].mean(axis=1)
        mask = mask & (sign * centroids[:, axis] > 0)
        if not np.any(mask):
            raise ConfigurationError(f"半区 {side} 内没有 SOURCE 面片")
    areas = mesh.facet_areas(mask)
    return np.bincount(mesh.facets[mask].ravel(), weights=np.repeat(areas / 3.0, 3),
                       minlength=mesh.n_nodes)


@dataclass
class AssembledSystem:
    """半离散系统；m、b 为集中对角向量"""
    m: np.ndarray
    k: sps.csr_matrix
    b: np.ndarray
    pml: PmlMatrices
    l_shape: np.ndarray
    source_area: float
    pml_active: bool = False
    warnings: List[str] = field(default_factory=list, compare=False)

    @property
    def n_nodes(self) -> int:
        return len(self.m)


def assemble_system(mesh: Mesh, admittances: Dict[str, float], pml: Optional[PmlSpec],
                    c0: float, source_side: str = 'all') -> AssembledSystem:
    m = assemble_mass(mesh, lumped=True).diagonal()
    if np.any(m <= 0):
        raise AssemblyError(f"{int(np.sum(m <= 0))} 个节点不属于任何单元")
    pml_matrices = assemble_pml_matrices(mesh, pml, c0)
    system = AssembledSystem(
        m=m,
        k=assemble_stiffness(mesh),
        b=assemble_boundary_damping(mesh, admittances).diagonal(),
        pml=pml_matrices,
        l_shape=assemble_source_pattern(mesh, source_side),
        source_area=source_area(mesh),
        pml_active=not pml_matrices.is_zero(),
    )
    logger.info(f"装配完成: {mesh.n_nodes} 节点, K 非零元 {system.k.nnz}, "
                f"声源面积 {system.source_area:.4e} m²")
    return system


def _diag(values: np.ndarray) -> sps.csr_matrix:
    k = len(values)
    return sps.csr_matrix((values, (np.arange(k), np.arange(k))), shape=(k, k))


def dump_matrices(system: AssembledSystem, out_dir: str) -> List[str]:
    """按 'i j value' 坐标格式输出全部矩阵"""
    os.makedirs(out_dir, exist_ok=True)
    matrices = {
        'M': sps.diags(system.m),
        'K': system.k,
        'B': sps.diags(system.b),
        'M_alpha': sps.diags(system.pml.m_alpha),
        'M_beta': sps.diags(system.pml.m_beta),
        'M_gamma': sps.diags(system.pml.m_gamma),
        'M_phi': _diag(system.pml.m_phi),
        'L_shape': sps.csr_matrix(system.l_shape.reshape(-1, 1)),
    }
    for i in range(3):
        matrices[f'M_xi{i + 1}'] = _diag(system.pml.m_xi[i])
        matrices[f'B{i + 1}'] = system.pml.b[i]
        matrices[f'B{i + 1}_a'] = system.pml.b_a[i]
        matrices[f'B{i + 1}_b'] = system.pml.b_b[i]

    paths = []
    for name, matrix in matrices.items():
        coo = sps.coo_matrix(matrix)
        df = pd.DataFrame({'i': coo.row, 'j': coo.col, 'value': coo.data})
        path = os.path.join(out_dir, f"{name}.txt")
        df.to_csv(path, sep=' ', header=False, index=False, float_format='%.17g')
        paths.append(path)
    logger.info(f"矩阵已导出到 {out_dir} ({len(paths)} 个文件)")
    return paths

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
四面体网格数据结构
节点、线性四面体单元、带标签的边界面片、单元区域标记
"""

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, List, Optional

import numpy as np

from utils.common import MeshError

# 四面体四个面（外法向朝外的节点顺序），依次为顶点 0,1,2,3 的对面
TET_FACES = np.array([[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]])


class FacetTag(IntEnum):
    """边界面片标签"""
    SOURCE = 0        # Γ_G 声源入口
    LOSSY_WALL = 1    # Γ_W / Γ_Z 吸声壁面
    RIGID = 2         # Γ_H 刚性面
    OUTER = 3         # Γ_I PML 截断面


class Region(IntEnum):
    """单元区域"""
    INTERIOR = 0
    PML = 1


class WallGroup(IntEnum):
    """吸声壁面的导纳引用：显式数值，或按配置中的 mu_z / mu_w 取值"""
    EXPLICIT = 0
    MU_Z = 1
    MU_W = 2


WALL_GROUP_TOKENS = {WallGroup.MU_Z: "mu_z", WallGroup.MU_W: "mu_w"}


@dataclass
class Mesh:
    """
    四面体网格

    facet_mu 为 NaN 时表示面片没有显式导纳，此时 facet_wall 给出引用的配置项
    """
    nodes: np.ndarray
    tets: np.ndarray
    tet_region: np.ndarray
    facets: np.ndarray
    facet_tag: np.ndarray
    facet_mu: np.ndarray = None
    facet_wall: np.ndarray = None
    warnings: List[str] = field(default_factory=list, compare=False)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float).reshape(-1, 3)
        self.tets = np.asarray(self.tets, dtype=np.int64).reshape(-1, 4)
        self.tet_region = np.asarray(self.tet_region, dtype=np.int8).reshape(-1)
        self.facets = np.asarray(self.facets, dtype=np.int64).reshape(-1, 3)
        self.facet_tag = np.asarray(self.facet_tag, dtype=np.int8).reshape(-1)
        n_facets = len(self.facets)
        if self.facet_mu is None:
            self.facet_mu = np.full(n_facets, np.nan)
        if self.facet_wall is None:
            self.facet_wall = np.zeros(n_facets, dtype=np.int8)
        self.facet_mu = np.asarray(self.facet_mu, dtype=float).reshape(-1)
        self.facet_wall = np.asarray(self.facet_wall, dtype=np.int8).reshape(-1)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_tets(self) -> int:
        return len(self.tets)

    @property
    def n_facets(self) -> int:
        return len(self.facets)

    def tet_volumes(self) -> np.ndarray:
        """带符号单元体积"""
        p = self.nodes[self.tets]
        d = p[:, 1:, :] - p[:, :1, :]
        return np.linalg.det(d) / 6.0

    def facet_areas(self, mask: Optional[np.ndarray] = None) -> np.ndarray:
        facets = self.facets if mask is None else self.facets[mask]
        p = self.nodes[facets]
        cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        return 0.5 * np.linalg.norm(cross, axis=1)

    def facets_with_tag(self, tag: FacetTag) -> np.ndarray:
        return self.facet_tag == int(tag)

    def region_volume(self, region: Region) -> float:
        return float(np.sum(self.tet_volumes()[self.tet_region == int(region)]))

    def centerline_node(self, z: float, tol: float = 1e-9) -> int:
        """返回轴线 (0, 0, z) 上的节点编号，不存在时抛出 MeshError"""
        target = np.array([0.0, 0.0, z])
        dist = np.max(np.abs(self.nodes - target), axis=1)
        idx = int(np.argmin(dist))
        if dist[idx] > tol:
            raise MeshError(f"轴线上 z={z:g} m 处没有网格节点")
        return idx

    def find_node(self, position, tol: float = 1e-9) -> Optional[int]:
        dist = np.max(np.abs(self.nodes - np.asarray(position, dtype=float)), axis=1)
        idx = int(np.argmin(dist))
        return idx if dist[idx] <= tol else None

    def summary(self) -> Dict[str, int]:
        counts = {tag.name: int(np.sum(self.facet_tag == int(tag))) for tag in FacetTag}
        return {
            'nodes': self.n_nodes,
            'tets': self.n_tets,
            'pml_tets': int(np.sum(self.tet_region == int(Region.PML))),
            'facets': self.n_facets,
            **counts,
        }


def boundary_faces(tets: np.ndarray):
    """
    找出只属于一个单元的面

    Returns:
        (faces, owner) 外法向顺序的面片节点及其所属单元编号
    """
    faces = tets[:, TET_FACES].reshape(-1, 3)
    owner = np.repeat(np.arange(len(tets)), 4)
    keys = np.sort(faces, axis=1)
    _, index, counts = np.unique(keys, axis=0, return_index=True, return_counts=True)
    single = index[counts == 1]
    single.sort()
    return faces[single], owner[single]


def validate_mesh(mesh: Mesh, require_closed: bool = False):
    """
    校验网格不变量

    - 所有单元带符号体积为正
    - 每个边界面片恰属于一个单元，且只带一个合法标签
    - require_closed=True 时，每个边界面都必须被标记
    """
    if mesh.n_tets == 0:
        raise MeshError("网格不含任何单元")
    if mesh.tets.min() < 0 or mesh.tets.max() >= mesh.n_nodes:
        raise MeshError("单元引用了不存在的节点")

    volumes = mesh.tet_volumes()
    if np.any(volumes <= 0):
        bad = int(np.argmin(volumes))
        raise MeshError(f"单元 {bad} 体积非正: {volumes[bad]:.3e}")

    valid_tags = {int(t) for t in FacetTag}
    if not set(np.unique(mesh.facet_tag).tolist()) <= valid_tags:
        raise MeshError("存在非法面片标签")

    faces, _ = boundary_faces(mesh.tets)
    boundary_keys = {tuple(f) for f in np.sort(faces, axis=1).tolist()}
    facet_keys = [tuple(f) for f in np.sort(mesh.facets, axis=1).tolist()]
    if len(set(facet_keys)) != len(facet_keys):
        raise MeshError("同一边界面片被重复标记")
    for i, key in enumerate(facet_keys):
        if key not in boundary_keys:
            raise MeshError(f"面片 {i} 不是边界面（不恰好属于一个单元）")
    if require_closed and len(facet_keys) != len(boundary_keys):
        raise MeshError(f"有 {len(boundary_keys) - len(facet_keys)} 个边界面未被标记")

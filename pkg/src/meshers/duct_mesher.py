#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
结构化四面体网格生成器
阻抗管、法兰辐射箱（含 PML 外壳）、按面积函数放样的简化声道

截面采用“正方形→椭圆”映射的四边形网格，每个四边形沿最小角较大的对角线
切成两个三角形；三角形沿轴向拉伸成三棱柱，再按全局编号规则切成 3 个四面体，
相邻棱柱的公共面自动协调。
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from meshers.mesh import FacetTag, Mesh, Region, WallGroup, boundary_faces, validate_mesh
from meshers.section import AreaFunction, DuctSpec, EllipseSection, Termination
from utils.common import DomainError, MeshError

logger = logging.getLogger(__name__)

# 每个半轴上至少划分的单元数
MIN_DIVISIONS = 4


@dataclass
class SectionLayout:
    """二维截面网格：前 n_core 个节点、前 n_core_tris 个三角形属于管道截面"""
    xy: np.ndarray
    tris: np.ndarray
    n_core: int
    n_core_tris: int
    uv: np.ndarray


def cells_per_semi_axis(a_max: float, b_min: float, h: float) -> int:
    """截面每个半轴上的单元数"""
    if not h > 0:
        raise DomainError(f"网格尺寸必须为正: {h}")
    if h > 2.0 * b_min:
        raise MeshError(
            f"网格尺寸 h={h:g} m 大于截面短轴 2·b_e={2.0 * b_min:g} m，无法分辨截面；"
            f"请至少取 h <= {2.0 * b_min:g} m"
        )
    return max(MIN_DIVISIONS, int(math.ceil(a_max / h - 1e-9)))


def axial_divisions(length: float, h: float) -> int:
    return max(1, int(math.ceil(length / h - 1e-9)))


def map_to_ellipse(uv: np.ndarray, a_e: float, b_e: float) -> np.ndarray:
    """正方形参数 (u, v) ∈ [-1, 1]² 映射到椭圆内部"""
    u, v = uv[:, 0], uv[:, 1]
    x = a_e * u * np.sqrt(1.0 - 0.5 * v * v)
    y = b_e * v * np.sqrt(1.0 - 0.5 * u * u)
    return np.column_stack([x, y])


def _unit_params(n_half: int) -> np.ndarray:
    t = np.linspace(-1.0, 1.0, 2 * n_half + 1)
    t[n_half] = 0.0
    return t


def _core_grid(n_half: int) -> Tuple[np.ndarray, np.ndarray]:
    """正方形参数网格：节点编号 j*(n+1)+i，四边形逆时针"""
    n = 2 * n_half
    t = _unit_params(n_half)
    u, v = np.meshgrid(t, t, indexing='xy')
    uv = np.column_stack([u.ravel(), v.ravel()])
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing='xy')
    base = (j * (n + 1) + i).ravel()
    quads = np.column_stack([base, base + 1, base + n + 2, base + n + 1])
    return uv, quads


def _boundary_ring(n_half: int) -> List[Tuple[int, int]]:
    """参数正方形边界上的 (i, j)，逆时针，从 (0, 0) 开始"""
    n = 2 * n_half
    ring = [(i, 0) for i in range(n)]
    ring += [(n, j) for j in range(n)]
    ring += [(i, n) for i in range(n, 0, -1)]
    ring += [(0, j) for j in range(n, 0, -1)]
    return ring


def _min_angles(p: np.ndarray) -> np.ndarray:
    """三角形 (T,3,2) 的最小内角"""
    angles = []
    for k in range(3):
        a = p[:, k]
        b = p[:, (k + 1) % 3]
        c = p[:, (k + 2) % 3]
        e1 = b - a
        e2 = c - a
        cosine = np.sum(e1 * e2, axis=1) / (np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1))
        angles.append(np.arccos(np.clip(cosine, -1.0, 1.0)))
    return np.min(np.stack(angles, axis=1), axis=1)


def split_quads(xy: np.ndarray, quads: np.ndarray) -> np.ndarray:
    """每个四边形沿使最小角更大的对角线切分"""
    diag_a = np.stack([quads[:, [0, 1, 2]], quads[:, [0, 2, 3]]], axis=1)
    diag_b = np.stack([quads[:, [0, 1, 3]], quads[:, [1, 2, 3]]], axis=1)
    min_a = np.minimum(_min_angles(xy[diag_a[:, 0]]), _min_angles(xy[diag_a[:, 1]]))
    min_b = np.minimum(_min_angles(xy[diag_b[:, 0]]), _min_angles(xy[diag_b[:, 1]]))
    use_a = min_a >= min_b - 1e-12
    chosen = np.where(use_a[:, None, None], diag_a, diag_b)
    return chosen.reshape(-1, 3)


def core_layout(n_half: int, section: EllipseSection) -> SectionLayout:
    uv, quads = _core_grid(n_half)
    xy = map_to_ellipse(uv, section.a_e, section.b_e)
    tris = split_quads(xy, quads)
    return SectionLayout(xy=xy, tris=tris, n_core=len(xy), n_core_tris=len(tris), uv=uv)


def _segment(start: float, stop: float, h: float) -> np.ndarray:
    """[start, stop) 上的均匀节点"""
    if stop - start <= 0:
        return np.empty(0)
    n = max(1, int(math.ceil((stop - start) / h - 1e-9)))
    return np.linspace(start, stop, n + 1)[:-1]


def _axis_breakpoints(half_box: float, hole: float, pml_width: float,
                      h_box: float, h_pml: float, t: np.ndarray) -> Tuple[np.ndarray, int]:
    """单方向张量网格坐标，返回 (坐标, 孔洞起始下标)"""
    outer = half_box + pml_width
    left = np.concatenate([_segment(-outer, -half_box, h_pml), _segment(-half_box, -hole, h_box)])
    hole_pts = hole * t
    right = -left[::-1]
    return np.concatenate([left, hole_pts, right]), len(left)


def radiation_layout(n_half: int, section: EllipseSection, box_dims: Sequence[float],
                     pml_width: float, h_box: float, h_pml: float) -> SectionLayout:
    """
    辐射区域截面：椭圆核心 → 过渡环 → 矩形孔洞外的张量网格（含 PML 列）
    """
    core = core_layout(n_half, section)
    n = 2 * n_half
    half_x, half_y = 0.5 * box_dims[0], 0.5 * box_dims[1]

    hole_x = section.a_e + h_box
    hole_y = section.b_e + h_box
    if hole_x > half_x + 1e-12 or hole_y > half_y + 1e-12:
        raise MeshError(
            f"管道截面 ({section.a_e:g} x {section.b_e:g} m) 加过渡层 {h_box:g} m "
            f"放不进辐射箱端面 ({box_dims[0]:g} x {box_dims[1]:g} m)"
        )
    # 孔洞离箱面太近时直接贴到箱面上，避免出现极薄的单元
    if half_x - hole_x < 0.25 * h_box:
        hole_x = half_x
    if half_y - hole_y < 0.25 * h_box:
        hole_y = half_y

    t = _unit_params(n_half)
    ring = _boundary_ring(n_half)
    ring_ids = np.array([j * (n + 1) + i for i, j in ring])
    ring_uv = core.uv[ring_ids]
    inner = core.xy[ring_ids]
    outer = np.column_stack([hole_x * ring_uv[:, 0], hole_y * ring_uv[:, 1]])
    gap = float(np.max(np.linalg.norm(outer - inner, axis=1)))
    n_ring = max(1, int(math.ceil(gap / h_box - 1e-9)))

    xy_parts = [core.xy]
    quads = []
    next_id = len(core.xy)
    prev = ring_ids
    n_ring_pts = len(ring_ids)
    for k in range(1, n_ring + 1):
        frac = k / n_ring
        pts = outer if k == n_ring else inner + frac * (outer - inner)
        ids = np.arange(next_id, next_id + n_ring_pts)
        next_id += n_ring_pts
        xy_parts.append(pts)
        nxt = np.roll(np.arange(n_ring_pts), -1)
        quads.append(np.column_stack([prev, prev[nxt], ids[nxt], ids]))
        prev = ids
    outer_ring_ids = prev
    ring_position = {ij: m for m, ij in enumerate(ring)}

    xs, ix0 = _axis_breakpoints(half_x, hole_x, pml_width, h_box, h_pml, t)
    ys, iy0 = _axis_breakpoints(half_y, hole_y, pml_width, h_box, h_pml, t)

    grid_ids = np.full((len(ys), len(xs)), -1, dtype=np.int64)
    new_pts = []
    for iy in range(len(ys)):
        for ix in range(len(xs)):
            in_x = ix0 <= ix <= ix0 + n
            in_y = iy0 <= iy <= iy0 + n
            if in_x and in_y:
                i, j = ix - ix0, iy - iy0
                if (i, j) in ring_position:
                    grid_ids[iy, ix] = outer_ring_ids[ring_position[(i, j)]]
                continue
            grid_ids[iy, ix] = next_id
            next_id += 1
            new_pts.append((xs[ix], ys[iy]))
    if new_pts:
        xy_parts.append(np.array(new_pts))

    for iy in range(len(ys) - 1):
        for ix in range(len(xs) - 1):
            if ix0 <= ix < ix0 + n and iy0 <= iy < iy0 + n:
                continue
            quads.append(np.array([[grid_ids[iy, ix], grid_ids[iy, ix + 1],
                                    grid_ids[iy + 1, ix + 1], grid_ids[iy + 1, ix]]]))

    xy = np.vstack(xy_parts)
    outer_tris = split_quads(xy, np.vstack(quads))
    tris = np.vstack([core.tris, outer_tris])
    return SectionLayout(xy=xy, tris=tris, n_core=core.n_core,
                         n_core_tris=core.n_core_tris, uv=core.uv)


def prism_tets(tris: np.ndarray, xy: np.ndarray, bottom: int, top: int) -> np.ndarray:
    """
    三棱柱切分为 3 个四面体

    三角形节点按编号排序 (i<j<k)，四边形侧面的对角线总是从小编号底点连到大编号顶点，
    相邻棱柱因此协调。底面顺时针时交换前两个节点，使体积为正。
    """
    s = np.sort(tris, axis=1)
    p = xy[s]
    e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    orient = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    i, j, k = s[:, 0], s[:, 1], s[:, 2]
    t1 = np.column_stack([bottom + i, bottom + j, bottom + k, top + k])
    t2 = np.column_stack([bottom + i, bottom + j, top + k, top + j])
    t3 = np.column_stack([bottom + i, top + i, top + j, top + k])
    tets = np.stack([t1, t2, t3], axis=1)
    cw = orient < 0
    tets[cw, :, 0], tets[cw, :, 1] = tets[cw, :, 1].copy(), tets[cw, :, 0].copy()
    return tets.reshape(-1, 4)


def extrude(layer_xy: List[np.ndarray], layer_z: np.ndarray,
            slab_tris: List[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """按层拉伸：第 s 个板层连接第 s 层与第 s+1 层"""
    counts = [len(xy) for xy in layer_xy]
    offsets = np.concatenate([[0], np.cumsum(counts)])
    nodes = np.vstack([np.column_stack([xy, np.full(len(xy), z)])
                       for xy, z in zip(layer_xy, layer_z)])
    tets = [prism_tets(tris, layer_xy[s], offsets[s], offsets[s + 1])
            for s, tris in enumerate(slab_tris)]
    return nodes, np.vstack(tets)


def _on_plane(points: np.ndarray, axis: int, value: float, tol: float) -> np.ndarray:
    return np.all(np.abs(points[:, :, axis] - value) <= tol, axis=1)


def _wall_groups(centroid_z: np.ndarray, duct_end: Optional[float]) -> np.ndarray:
    if duct_end is None:
        return np.full(len(centroid_z), int(WallGroup.MU_Z), dtype=np.int8)
    return np.where(centroid_z < duct_end, int(WallGroup.MU_Z), int(WallGroup.MU_W)).astype(np.int8)


def _tag_channel(nodes: np.ndarray, tets: np.ndarray, z_start: float, z_end: float,
                 termination: Termination, duct_end: Optional[float] = None,
                 wall_group: WallGroup = WallGroup.MU_Z):
    """管道/声道边界分类：入口 SOURCE，出口按末端类型，其余为吸声壁"""
    faces, _ = boundary_faces(tets)
    pts = nodes[faces]
    tol = 1e-9 * max(1.0, abs(z_end - z_start))
    at_start = _on_plane(pts, 2, z_start, tol)
    at_end = _on_plane(pts, 2, z_end, tol)

    tags = np.full(len(faces), int(FacetTag.LOSSY_WALL), dtype=np.int8)
    tags[at_start] = int(FacetTag.SOURCE)
    tags[at_end] = int(FacetTag.RIGID)
    keep = np.ones(len(faces), dtype=bool)
    if termination != Termination.CLOSED_RIGID:
        keep &= ~at_end

    wall = np.zeros(len(faces), dtype=np.int8)
    is_wall = tags == int(FacetTag.LOSSY_WALL)
    if duct_end is None:
        wall[is_wall] = int(wall_group)
    else:
        wall[is_wall] = _wall_groups(pts[is_wall, :, 2].mean(axis=1), duct_end)
    faces, tags, wall = faces[keep], tags[keep], wall[keep]
    return faces, tags, np.full(len(faces), np.nan), wall


def generate_duct_mesh(spec: DuctSpec) -> Mesh:
    """
    生成椭圆柱阻抗管网格

    入口 (z=0) 标记 SOURCE，侧壁 LOSSY_WALL (mu_z)，出口 (z=L) 按末端类型处理；
    轴线节点位于 z = k·L/nz，探头无需插值。
    """
    section = spec.section
    n_half = cells_per_semi_axis(section.a_e, section.b_e, spec.h)
    layout = core_layout(n_half, section)
    nz = axial_divisions(spec.length, spec.h)
    z = np.linspace(0.0, spec.length, nz + 1)

    nodes, tets = extrude([layout.xy] * (nz + 1), z, [layout.tris] * nz)
    faces, tags, mu, wall = _tag_channel(nodes, tets, 0.0, spec.length, spec.termination)
    mesh = Mesh(nodes=nodes, tets=tets, tet_region=np.zeros(len(tets), dtype=np.int8),
                facets=faces, facet_tag=tags, facet_mu=mu, facet_wall=wall,
                warnings=list(spec.warnings))
    validate_mesh(mesh, require_closed=spec.termination == Termination.CLOSED_RIGID)
    logger.info(f"阻抗管网格: {mesh.n_nodes} 节点, {mesh.n_tets} 单元, 截面每半轴 {n_half} 份, 轴向 {nz} 层")
    return mesh


def generate_tract_mesh(af: AreaFunction, h: float,
                        termination: Termination = Termination.CLOSED_RIGID,
                        duct_length: float = 0.0) -> Mesh:
    """
    按面积函数放样生成简化声道网格

    Args:
        af: 面积函数（站点间面积与偏心率线性插值）
        h: 目标网格尺寸
        termination: 出口（最后一个站点）的末端类型
        duct_length: 大于 0 时在入口前接一段等截面阻抗管（壁面引用 mu_z），
                     用于计算输入阻抗；声道壁面引用 mu_w
    """
    sections = [af.section_at(float(z)) for z in af.z]
    a_max = max(s.a_e for s in sections)
    b_min = min(s.b_e for s in sections)
    n_half = cells_per_semi_axis(a_max, b_min, h)
    uv, quads = _core_grid(n_half)

    z0, z1 = float(af.z[0]), float(af.z[-1])
    nz = axial_divisions(af.length, h)
    layer_z = list(np.linspace(z0, z1, nz + 1))
    layer_sections = [af.section_at(z) for z in layer_z]

    duct_end = None
    if duct_length > 0:
        nz_duct = axial_divisions(duct_length, h)
        duct_z = list(np.linspace(z0 - duct_length, z0, nz_duct + 1))[:-1]
        layer_z = duct_z + layer_z
        layer_sections = [layer_sections[0]] * len(duct_z) + layer_sections
        duct_end = z0

    layer_xy = [map_to_ellipse(uv, s.a_e, s.b_e) for s in layer_sections]
    tris = split_quads(layer_xy[0], quads)
    nodes, tets = extrude(layer_xy, np.array(layer_z), [tris] * (len(layer_z) - 1))

    faces, tags, mu, wall = _tag_channel(nodes, tets, layer_z[0], layer_z[-1], termination,
                                         duct_end=duct_end, wall_group=WallGroup.MU_W)
    mesh = Mesh(nodes=nodes, tets=tets, tet_region=np.zeros(len(tets), dtype=np.int8),
                facets=faces, facet_tag=tags, facet_mu=mu, facet_wall=wall)
    validate_mesh(mesh, require_closed=termination == Termination.CLOSED_RIGID)
    logger.info(f"声道网格: {mesh.n_nodes} 节点, {mesh.n_tets} 单元, {len(layer_z)} 层")
    return mesh


def generate_radiation_domain(spec: DuctSpec, box_dims: Sequence[float], pml_width: float,
                              h_box: float, h_pml: float) -> Mesh:
    """
    阻抗管出口平齐嵌入刚性法兰箱体，箱体外包 PML

    坐标：管道 z ∈ [0, L]，箱体 x ∈ ±Lx/2, y ∈ ±Ly/2, z ∈ [L, L+Lz]；
    PML 覆盖 ±x、±y、+z 三个方向，法兰平面 z=L（含 PML 列下方）为刚性面。
    """
    if spec.termination != Termination.OPEN_FLANGED:
        raise MeshError("辐射区域要求管道末端类型为 OPEN_FLANGED")
    if not pml_width > 0:
        raise DomainError(f"PML 厚度必须为正: {pml_width}")
    if len(box_dims) != 3 or min(box_dims) <= 0:
        raise DomainError(f"箱体尺寸必须是三个正数: {box_dims}")
    if not (h_box > 0 and h_pml > 0):
        raise DomainError("箱体与 PML 网格尺寸必须为正")

    section = spec.section
    n_half = cells_per_semi_axis(section.a_e, section.b_e, spec.h)
    layout = radiation_layout(n_half, section, box_dims, pml_width, h_box, h_pml)

    length = spec.length
    half_x, half_y, depth = 0.5 * box_dims[0], 0.5 * box_dims[1], box_dims[2]
    z_box_end = length + depth
    z_top = z_box_end + pml_width

    nz_duct = axial_divisions(length, spec.h)
    duct_z = np.linspace(0.0, length, nz_duct + 1)
    box_z = np.concatenate([_segment(length, z_box_end, h_box), _segment(z_box_end, z_top, h_pml), [z_top]])

    core_xy = layout.xy[:layout.n_core]
    core_tris = layout.tris[:layout.n_core_tris]
    layer_xy = [core_xy] * nz_duct + [layout.xy] * len(box_z)
    layer_z = np.concatenate([duct_z[:-1], box_z])
    slab_tris = [core_tris] * nz_duct + [layout.tris] * (len(box_z) - 1)
    nodes, tets = extrude(layer_xy, layer_z, slab_tris)

    centroids = nodes[tets].mean(axis=1)
    tol = 1e-9 * max(1.0, z_top)
    in_pml = ((np.abs(centroids[:, 0]) > half_x + tol) | (np.abs(centroids[:, 1]) > half_y + tol)
              | (centroids[:, 2] > z_box_end + tol))
    region = np.where(in_pml, int(Region.PML), int(Region.INTERIOR)).astype(np.int8)

    faces, _ = boundary_faces(tets)
    pts = nodes[faces]
    outer_x, outer_y = half_x + pml_width, half_y + pml_width
    tags = np.full(len(faces), int(FacetTag.LOSSY_WALL), dtype=np.int8)
    tags[_on_plane(pts, 2, 0.0, tol)] = int(FacetTag.SOURCE)
    tags[_on_plane(pts, 2, length, tol)] = int(FacetTag.RIGID)
    is_outer = (_on_plane(pts, 2, z_top, tol) | _on_plane(pts, 0, outer_x, tol)
                | _on_plane(pts, 0, -outer_x, tol) | _on_plane(pts, 1, outer_y, tol)
                | _on_plane(pts, 1, -outer_y, tol))
    tags[is_outer] = int(FacetTag.OUTER)
    wall = np.where(tags == int(FacetTag.LOSSY_WALL), int(WallGroup.MU_Z), 0).astype(np.int8)

    mesh = Mesh(nodes=nodes, tets=tets, tet_region=region, facets=faces, facet_tag=tags,
                facet_mu=np.full(len(faces), np.nan), facet_wall=wall,
                warnings=list(spec.warnings))
    validate_mesh(mesh, require_closed=True)
    logger.info(f"辐射区域网格: {mesh.n_nodes} 节点, {mesh.n_tets} 单元 "
                f"(PML 单元 {int(np.sum(in_pml))})")
    return mesh

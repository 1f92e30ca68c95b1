#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
网格文本格式读写

    meshv1 <n_nodes> <n_tets> <n_facets>
    n <x> <y> <z>
    t <i0> <i1> <i2> <i3> <REGION>
    f <i0> <i1> <i2> <TAG> [<mu>]

mu 为数值，或 mu_z / mu_w（求解时按配置取值）；坐标以 repr 写出，读回逐位相等。
"""

import hashlib
import logging
import math
from typing import List

import numpy as np

from meshers.mesh import WALL_GROUP_TOKENS, FacetTag, Mesh, Region, WallGroup
from utils.common import ParseError

logger = logging.getLogger(__name__)

MESH_MAGIC = "meshv1"

_TOKEN_WALL = {token: group for group, token in WALL_GROUP_TOKENS.items()}


def format_mesh(mesh: Mesh) -> str:
    """网格序列化为文本"""
    lines = [f"{MESH_MAGIC} {mesh.n_nodes} {mesh.n_tets} {mesh.n_facets}"]
    for x, y, z in mesh.nodes.tolist():
        lines.append(f"n {x!r} {y!r} {z!r}")
    for tet, region in zip(mesh.tets.tolist(), mesh.tet_region.tolist()):
        lines.append(f"t {tet[0]} {tet[1]} {tet[2]} {tet[3]} {Region(region).name}")
    for facet, tag, mu, wall in zip(mesh.facets.tolist(), mesh.facet_tag.tolist(),
                                    mesh.facet_mu.tolist(), mesh.facet_wall.tolist()):
        line = f"f {facet[0]} {facet[1]} {facet[2]} {FacetTag(tag).name}"
        if not math.isnan(mu):
            line += f" {mu!r}"
        elif wall != int(WallGroup.EXPLICIT):
            line += f" {WALL_GROUP_TOKENS[WallGroup(wall)]}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def mesh_digest(mesh: Mesh) -> str:
    """网格内容的 sha256 摘要（基于序列化文本）"""
    return hashlib.sha256(format_mesh(mesh).encode('utf-8')).hexdigest()


def write_mesh(mesh: Mesh, path: str):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(format_mesh(mesh))
    logger.info(f"网格已写入: {path}")


def _parse_int(token: str, line_no: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"{what} 不是整数: {token!r}", line_no) from None


def _parse_float(token: str, line_no: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"{what} 不是数值: {token!r}", line_no) from None
    if not math.isfinite(value):
        raise ParseError(f"{what} 不是有限数值: {token!r}", line_no)
    return value


def parse_mesh(text: str) -> Mesh:
    """
    从文本解析网格

    Raises:
        ParseError: 格式错误，消息中带行号
    """
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ParseError("空文件或缺少文件头", 1)

    header = lines[0].split()
    if len(header) != 4 or header[0] != MESH_MAGIC:
        raise ParseError(f"文件头应为 '{MESH_MAGIC} <n_nodes> <n_tets> <n_facets>'", 1)
    n_nodes, n_tets, n_facets = (_parse_int(tok, 1, "计数") for tok in header[1:])

    nodes: List[List[float]] = []
    tets: List[List[int]] = []
    regions: List[int] = []
    facets: List[List[int]] = []
    tags: List[int] = []
    mus: List[float] = []
    walls: List[int] = []

    for line_no, raw in enumerate(lines[1:], start=2):
        parts = raw.split()
        if not parts:
            continue
        kind = parts[0]
        if kind == 'n':
            if len(parts) != 4:
                raise ParseError("节点行应为 'n x y z'", line_no)
            nodes.append([_parse_float(tok, line_no, "坐标") for tok in parts[1:]])
        elif kind == 't':
            if len(parts) != 6:
                raise ParseError("单元行应为 't i0 i1 i2 i3 REGION'", line_no)
            idx = [_parse_int(tok, line_no, "节点编号") for tok in parts[1:5]]
            if min(idx) < 0 or max(idx) >= n_nodes:
                raise ParseError(f"单元引用了不存在的节点: {idx}", line_no)
            if parts[5] not in Region.__members__:
                raise ParseError(f"未知区域标记: {parts[5]}", line_no)
            tets.append(idx)
            regions.append(int(Region[parts[5]]))
        elif kind == 'f':
            if len(parts) not in (5, 6):
                raise ParseError("面片行应为 'f i0 i1 i2 TAG [mu]'", line_no)
            idx = [_parse_int(tok, line_no, "节点编号") for tok in parts[1:4]]
            if min(idx) < 0 or max(idx) >= n_nodes:
                raise ParseError(f"面片引用了不存在的节点: {idx}", line_no)
            if parts[4] not in FacetTag.__members__:
                raise ParseError(f"未知面片标签: {parts[4]}", line_no)
            mu, wall = math.nan, int(WallGroup.EXPLICIT)
            if len(parts) == 6:
                if parts[5] in _TOKEN_WALL:
                    wall = int(_TOKEN_WALL[parts[5]])
                else:
                    mu = _parse_float(parts[5], line_no, "导纳")
                    if mu < 0:
                        raise ParseError(f"导纳不能为负: {mu}", line_no)
            facets.append(idx)
            tags.append(int(FacetTag[parts[4]]))
            mus.append(mu)
            walls.append(wall)
        else:
            raise ParseError(f"未知记录类型: {kind!r}", line_no)

    if (len(nodes), len(tets), len(facets)) != (n_nodes, n_tets, n_facets):
        raise ParseError(
            f"记录数与文件头不符: 节点 {len(nodes)}/{n_nodes}, "
            f"单元 {len(tets)}/{n_tets}, 面片 {len(facets)}/{n_facets}",
            len(lines),
        )

    return Mesh(
        nodes=np.array(nodes, dtype=float).reshape(-1, 3),
        tets=np.array(tets, dtype=np.int64).reshape(-1, 4),
        tet_region=np.array(regions, dtype=np.int8),
        facets=np.array(facets, dtype=np.int64).reshape(-1, 3),
        facet_tag=np.array(tags, dtype=np.int8),
        facet_mu=np.array(mus, dtype=float),
        facet_wall=np.array(walls, dtype=np.int8),
    )


def read_mesh(path: str) -> Mesh:
    with open(path, 'r', encoding='utf-8') as f:
        mesh = parse_mesh(f.read())
    logger.info(f"读取网格 {path}: {mesh.n_nodes} 节点, {mesh.n_tets} 单元, {mesh.n_facets} 面片")
    return mesh

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
截面几何与网格生成测试
"""

import math
import os
import sys
import unittest

import numpy as np

# 添加src目录到路径
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from acoustics.pml import PmlSpec
from assemblers.fem_assembler import source_area
from meshers.duct_mesher import (MIN_DIVISIONS, cells_per_semi_axis, core_layout,
                                 generate_duct_mesh, generate_radiation_domain,
                                 generate_tract_mesh, map_to_ellipse, prism_tets)
from meshers.mesh import FacetTag, Mesh, Region, WallGroup, boundary_faces, validate_mesh
from meshers.section import (AreaFunction, DuctSpec, EllipseSection, Termination,
                             make_elliptical_section)
from utils.common import DomainError, MeshError, ParseError


def small_duct(termination=Termination.CLOSED_RIGID, length=0.04) -> Mesh:
    section = EllipseSection(0.01, 0.01)
    return generate_duct_mesh(DuctSpec(section, length, 0.005, termination))


class TestSections(unittest.TestCase):
    """截面与面积函数"""

    def test_equal_area_reshaping(self):
        area = math.pi * 0.015 ** 2
        for e in (0.0, 0.3, 0.6, 0.8, 0.95):
            section = make_elliptical_section(area, e)
            self.assertAlmostEqual(section.area, area, delta=1e-12 * area)
            self.assertAlmostEqual(section.eccentricity, e, places=10)
            self.assertLessEqual(section.b_e, section.a_e)

    def test_circle_is_exact(self):
        section = make_elliptical_section(math.pi * 0.01 ** 2, 0.0)
        self.assertTrue(section.is_circular)
        self.assertAlmostEqual(section.a_e, 0.01, places=15)

    def test_invalid_eccentricity(self):
        with self.assertRaises(DomainError):
            make_elliptical_section(1e-4, 1.0)
        with self.assertRaises(DomainError):
            make_elliptical_section(-1e-4, 0.2)

    def test_short_duct_warns(self):
        spec = DuctSpec(EllipseSection(0.01, 0.01), 0.02, 0.005)
        self.assertEqual(len(spec.warnings), 1)
        spec = DuctSpec(EllipseSection(0.01, 0.01), 0.05, 0.005)
        self.assertEqual(spec.warnings, [])

    def test_area_function_validation(self):
        with self.assertRaises(ParseError):
            AreaFunction([0.0, 0.02, 0.01], [1e-4, 2e-4, 3e-4])
        with self.assertRaises(ParseError):
            AreaFunction([0.0, 0.02], [1e-4, 0.0])
        with self.assertRaises(ParseError):
            AreaFunction([0.0], [1e-4])

    def test_area_function_interpolation(self):
        af = AreaFunction([0.0, 0.1], [1e-4, 3e-4], 0.0)
        section = af.section_at(0.05)
        self.assertAlmostEqual(section.area, 2e-4, delta=1e-16)


class TestSectionGrid(unittest.TestCase):
    """截面映射网格"""

    def test_boundary_on_ellipse(self):
        t = np.linspace(-1.0, 1.0, 9)
        uv = np.concatenate([np.column_stack([np.ones(9), t]), np.column_stack([t, -np.ones(9)])])
        xy = map_to_ellipse(uv, 0.02, 0.01)
        residual = (xy[:, 0] / 0.02) ** 2 + (xy[:, 1] / 0.01) ** 2 - 1.0
        self.assertLess(np.max(np.abs(residual)), 1e-12)

    def test_minimum_divisions(self):
        self.assertEqual(cells_per_semi_axis(0.01, 0.01, 0.02), MIN_DIVISIONS)
        self.assertEqual(cells_per_semi_axis(0.01, 0.01, 0.001), 10)

    def test_coarse_h_rejected(self):
        with self.assertRaises(MeshError):
            cells_per_semi_axis(0.01, 0.002, 0.005)

    def test_core_triangles_cover_polygon(self):
        section = EllipseSection(0.02, 0.012)
        layout = core_layout(6, section)
        p = layout.xy[layout.tris]
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        signed = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        self.assertTrue(np.all(np.abs(signed) > 0))
        # 内接多边形面积略小于椭圆面积
        total = float(np.sum(np.abs(signed)))
        self.assertLess(total, section.area)
        self.assertGreater(total, 0.97 * section.area)

    def test_prism_split_positive_volume(self):
        xy = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        for tri in ([0, 1, 2], [0, 2, 1]):
            nodes = np.vstack([np.column_stack([xy, np.zeros(3)]), np.column_stack([xy, np.ones(3)])])
            tets = prism_tets(np.array([tri]), xy, 0, 3)
            d = nodes[tets][:, 1:] - nodes[tets][:, :1]
            volumes = np.linalg.det(d) / 6.0
            self.assertTrue(np.all(volumes > 0))
            self.assertAlmostEqual(float(volumes.sum()), 0.5, places=14)


class TestDuctMesh(unittest.TestCase):
    """阻抗管网格"""

    @classmethod
    def setUpClass(cls):
        cls.closed = small_duct(Termination.CLOSED_RIGID)
        cls.open = small_duct(Termination.OPEN_FLANGED)

    def test_valid_and_closed(self):
        validate_mesh(self.closed, require_closed=True)
        self.assertTrue(np.all(self.closed.tet_volumes() > 0))
        self.assertTrue(np.all(self.closed.tet_region == int(Region.INTERIOR)))

    def test_volume_equals_section_times_length(self):
        volume = self.closed.region_volume(Region.INTERIOR)
        self.assertAlmostEqual(volume, source_area(self.closed) * 0.04, delta=1e-12 * volume)

    def test_tags(self):
        mesh = self.closed
        n_source = int(np.sum(mesh.facets_with_tag(FacetTag.SOURCE)))
        n_rigid = int(np.sum(mesh.facets_with_tag(FacetTag.RIGID)))
        self.assertGreater(n_source, 0)
        self.assertEqual(n_source, n_rigid)
        src = mesh.nodes[mesh.facets[mesh.facets_with_tag(FacetTag.SOURCE)]]
        self.assertTrue(np.all(np.abs(src[:, :, 2]) < 1e-12))
        walls = mesh.facets_with_tag(FacetTag.LOSSY_WALL)
        self.assertTrue(np.all(mesh.facet_wall[walls] == int(WallGroup.MU_Z)))
        self.assertTrue(np.all(np.isnan(mesh.facet_mu)))

    def test_open_end_left_untagged(self):
        self.assertEqual(int(np.sum(self.open.facets_with_tag(FacetTag.RIGID))), 0)
        faces, _ = boundary_faces(self.open.tets)
        self.assertEqual(len(faces) - self.open.n_facets,
                         int(np.sum(self.closed.facets_with_tag(FacetTag.RIGID))))

    def test_centerline_nodes(self):
        for k in range(9):
            idx = self.closed.centerline_node(k * 0.005)
            self.assertAlmostEqual(self.closed.nodes[idx, 2], k * 0.005, places=12)
        with self.assertRaises(MeshError):
            self.closed.centerline_node(0.0025)

    def test_validate_detects_inverted_tet(self):
        bad = Mesh(nodes=self.closed.nodes, tets=self.closed.tets[:, [1, 0, 2, 3]],
                   tet_region=self.closed.tet_region, facets=self.closed.facets,
                   facet_tag=self.closed.facet_tag)
        with self.assertRaises(MeshError):
            validate_mesh(bad)

    def test_validate_detects_interior_facet(self):
        mesh = self.closed
        tet = mesh.tets[len(mesh.tets) // 2]
        interior_facet = None
        faces, _ = boundary_faces(mesh.tets)
        boundary = {tuple(sorted(f)) for f in faces.tolist()}
        for face in ([tet[0], tet[1], tet[2]], [tet[0], tet[1], tet[3]],
                     [tet[0], tet[2], tet[3]], [tet[1], tet[2], tet[3]]):
            if tuple(sorted(face)) not in boundary:
                interior_facet = face
                break
        self.assertIsNotNone(interior_facet)
        bad = Mesh(nodes=mesh.nodes, tets=mesh.tets, tet_region=mesh.tet_region,
                   facets=np.vstack([mesh.facets, [interior_facet]]),
                   facet_tag=np.append(mesh.facet_tag, int(FacetTag.RIGID)))
        with self.assertRaises(MeshError):
            validate_mesh(bad)

    def test_elliptical_duct(self):
        section = make_elliptical_section(math.pi * 0.01 ** 2, 0.8)
        mesh = generate_duct_mesh(DuctSpec(section, 0.03, 0.004))
        validate_mesh(mesh, require_closed=True)
        ratio = source_area(mesh) / section.area
        self.assertGreater(ratio, 0.97)
        self.assertLess(ratio, 1.0)


class TestTractMesh(unittest.TestCase):
    """面积函数放样"""

    def setUp(self):
        self.af = AreaFunction([0.0, 0.03, 0.06], [1e-4, 3e-4, 2e-4], 0.5)

    def test_tract_walls_reference_mu_w(self):
        mesh = generate_tract_mesh(self.af, 0.005)
        walls = mesh.facets_with_tag(FacetTag.LOSSY_WALL)
        self.assertTrue(np.all(mesh.facet_wall[walls] == int(WallGroup.MU_W)))
        self.assertAlmostEqual(float(mesh.nodes[:, 2].max()), 0.06, places=12)

    def test_prepended_duct(self):
        mesh = generate_tract_mesh(self.af, 0.005, termination=Termination.OPEN_FLANGED,
                                   duct_length=0.02)
        walls = mesh.facets_with_tag(FacetTag.LOSSY_WALL)
        centroid_z = mesh.nodes[mesh.facets[walls]][:, :, 2].mean(axis=1)
        groups = mesh.facet_wall[walls]
        self.assertTrue(np.all(groups[centroid_z < 0.0] == int(WallGroup.MU_Z)))
        self.assertTrue(np.all(groups[centroid_z > 0.0] == int(WallGroup.MU_W)))
        self.assertAlmostEqual(float(mesh.nodes[:, 2].min()), -0.02, places=12)
        self.assertEqual(int(np.sum(mesh.facets_with_tag(FacetTag.RIGID))), 0)

    def test_constant_area_matches_duct_mesh(self):
        area = math.pi * 0.01 ** 2
        lofted = generate_tract_mesh(AreaFunction([0.0, 0.04], [area, area], 0.0), 0.005)
        duct = small_duct(Termination.CLOSED_RIGID, 0.04)
        self.assertEqual(lofted.n_nodes, duct.n_nodes)
        np.testing.assert_allclose(lofted.nodes, duct.nodes, atol=1e-12)
        self.assertTrue(np.array_equal(lofted.tets, duct.tets))
        # 只有壁面分组不同：声道侧壁引用 mu_w
        self.assertTrue(np.array_equal(lofted.facets, duct.facets))
        self.assertTrue(np.array_equal(lofted.facet_tag, duct.facet_tag))

    def test_linear_area_midpoint(self):
        af = AreaFunction([0.0, 0.04], [1e-4, 2e-4], 0.3)
        self.assertAlmostEqual(af.section_at(0.02).area, 1.5e-4, delta=1e-16)
        mesh = generate_tract_mesh(af, 0.005)
        mid = mesh.nodes[np.abs(mesh.nodes[:, 2] - 0.02) < 1e-12]
        self.assertGreater(len(mid), 0)
        ellipse = af.section_at(0.02)
        residual = (mid[:, 0] / ellipse.a_e) ** 2 + (mid[:, 1] / ellipse.b_e) ** 2
        self.assertLessEqual(float(residual.max()), 1.0 + 1e-9)
        self.assertAlmostEqual(float(residual.max()), 1.0, delta=1e-9)


class TestRadiationDomain(unittest.TestCase):
    """法兰辐射箱与 PML"""

    @classmethod
    def setUpClass(cls):
        spec = DuctSpec(EllipseSection(0.01, 0.01), 0.03, 0.005, Termination.OPEN_FLANGED)
        cls.mesh = generate_radiation_domain(spec, (0.06, 0.06, 0.04), 0.02, 0.01, 0.01)

    def test_regions_and_tags(self):
        mesh = self.mesh
        summary = mesh.summary()
        self.assertGreater(summary['pml_tets'], 0)
        self.assertGreater(summary['OUTER'], 0)
        self.assertGreater(summary['RIGID'], 0)
        outer = mesh.nodes[mesh.facets[mesh.facets_with_tag(FacetTag.OUTER)]]
        on_shell = ((np.abs(np.abs(outer[:, :, 0]) - 0.05) < 1e-9).all(axis=1)
                    | (np.abs(np.abs(outer[:, :, 1]) - 0.05) < 1e-9).all(axis=1)
                    | (np.abs(outer[:, :, 2] - 0.09) < 1e-9).all(axis=1))
        self.assertTrue(np.all(on_shell))

    def test_pml_geometry_from_mesh(self):
        pml = PmlSpec.from_mesh(self.mesh, 1e-4)
        np.testing.assert_allclose(pml.half_extent, [0.03, 0.03, 0.035], atol=1e-12)
        np.testing.assert_allclose(pml.width_lower, [0.02, 0.02, 0.0], atol=1e-12)
        np.testing.assert_allclose(pml.width_upper, [0.02, 0.02, 0.02], atol=1e-12)
        self.assertTrue(pml.active)

    def test_total_volume_and_unique_nodes(self):
        mesh = self.mesh
        volume = float(mesh.tet_volumes().sum())
        box_with_layer = 0.10 * 0.10 * 0.06
        expected = math.pi * 0.01 ** 2 * 0.03 + box_with_layer
        self.assertAlmostEqual(volume / expected, 1.0, delta=0.05)
        self.assertAlmostEqual(volume, source_area(mesh) * 0.03 + box_with_layer,
                               delta=1e-10 * expected)
        unique = np.unique(np.round(mesh.nodes, 12), axis=0)
        self.assertEqual(len(unique), mesh.n_nodes)

    def test_requires_flanged_termination(self):
        spec = DuctSpec(EllipseSection(0.01, 0.01), 0.03, 0.005, Termination.CLOSED_RIGID)
        with self.assertRaises(MeshError):
            generate_radiation_domain(spec, (0.06, 0.06, 0.04), 0.02, 0.01, 0.01)

    def test_duct_must_fit_box(self):
        spec = DuctSpec(EllipseSection(0.01, 0.01), 0.03, 0.005, Termination.OPEN_FLANGED)
        with self.assertRaises(MeshError):
            generate_radiation_domain(spec, (0.03, 0.03, 0.04), 0.02, 0.01, 0.01)
        with self.assertRaises(DomainError):
            generate_radiation_domain(spec, (0.06, 0.06, 0.04), 0.0, 0.01, 0.01)


if __name__ == "__main__":
    unittest.main()

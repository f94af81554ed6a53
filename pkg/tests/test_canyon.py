import math

import numpy as np
import pytest

from urbanmorph.canyon import (
    BuildingRole,
    CanyonCellStats,
    CanyonKind,
    CanyonSet,
    CanyonTriangle,
    build_canyon_triangulation,
    building_role_ratios,
    cell_canyon_stats,
    frontal_index,
    triangle_width,
    weighted_building_height,
)
from urbanmorph.classify import BuildingFeature
from urbanmorph.errors import DegenerateGeometry
from urbanmorph.geometry import Polygon, Polyline, triangle_area, triangle_sides


def rect_building(x0, y0, w, h, height=10.0):
    return BuildingFeature(Polygon(np.array([(x0, y0), (x0 + w, y0),
                                             (x0 + w, y0 + h), (x0, y0 + h)])), height)


def two_parallel_buildings(road: bool):
    buildings = [rect_building(0, 0, 30, 10), rect_building(0, 30, 30, 10)]
    roads = [Polyline(np.array([(-20.0, 20.0), (50.0, 20.0)]))] if road else []
    return build_canyon_triangulation(buildings, [], roads)


def gap_triangles(cs):
    out = []
    for t in cs.triangles:
        cx, cy = t.centroid
        if 0 < cx < 30 and 10 < cy < 30:
            out.append(t)
    return out


class TestTriangleWidth:
    def test_3_4_5(self):
        w = triangle_width((0.0, 0.0), (3.0, 0.0), (0.0, 4.0))
        assert w == 4.0

    def test_equilateral(self):
        h = math.sqrt(3.0)
        w = triangle_width((0.0, 0.0), (2.0, 0.0), (1.0, h))
        assert w == pytest.approx(math.sqrt(3.0), rel=1e-12)

    def test_degenerate_rejected(self):
        with pytest.raises(DegenerateGeometry):
            triangle_width((0.0, 0.0), (1.0, 0.0), (2.0, 1e-6))

    def test_equals_max_altitude_random(self):
        # oracle: compute all three altitudes directly; 2S/min-side must
        # be the largest one
        rng = np.random.default_rng(10)
        n = 0
        while n < 10_000:
            a, b, c = [tuple(v) for v in rng.uniform(-100, 100, (3, 2))]
            area = triangle_area(a, b, c)
            if area < 1e-3:
                continue
            n += 1
            sides = triangle_sides(a, b, c)
            altitudes = [2.0 * area / s for s in sides]
            assert triangle_width(a, b, c) == pytest.approx(max(altitudes), rel=1e-9)


class TestClassification:
    def test_between_buildings_directed_with_road(self):
        cs = two_parallel_buildings(road=True)
        gap = gap_triangles(cs)
        assert gap, "expected triangles between the buildings"
        assert all(t.kind is CanyonKind.DIRECTED for t in gap)

    def test_between_buildings_undirected_without_road(self):
        cs = two_parallel_buildings(road=False)
        gap = gap_triangles(cs)
        assert gap
        assert all(t.kind is CanyonKind.UNDIRECTED for t in gap)

    def test_green_only_triangles_not_canyons(self):
        green = Polygon(np.array([(200.0, 200.0), (260.0, 200.0),
                                  (260.0, 260.0), (200.0, 260.0)]))
        buildings = [rect_building(0, 0, 30, 10)]
        cs = build_canyon_triangulation(buildings, [green],
                                        [Polyline(np.array([(200.0, 150.0), (260.0, 150.0)]))])
        for t in cs.triangles:
            cx, cy = t.centroid
            if cx > 190 and cy > 190:  # triangles among green vertices only
                assert t.kind is CanyonKind.NON_CANYON
                assert t.width is None

    def test_building_interiors_removed(self):
        cs = two_parallel_buildings(road=True)
        for t in cs.triangles:
            cx, cy = t.centroid
            assert not (0 < cx < 30 and 0 < cy < 10)
            assert not (0 < cx < 30 and 30 < cy < 40)

    def test_trichotomy(self):
        cs = two_parallel_buildings(road=True)
        for t in cs.triangles:
            if t.kind is CanyonKind.DIRECTED:
                assert t.has_building_corner and t.crossed_by_road
            elif t.kind is CanyonKind.UNDIRECTED:
                assert t.has_building_corner and not t.crossed_by_road
            else:
                assert not t.has_building_corner

    def test_feature_order_invariant(self):
        b1 = rect_building(0, 0, 30, 10)
        b2 = rect_building(0, 30, 30, 10)
        road = Polyline(np.array([(-20.0, 20.0), (50.0, 20.0)]))
        cs_a = build_canyon_triangulation([b1, b2], [], [road])
        cs_b = build_canyon_triangulation([b2, b1], [], [road])
        kinds_a = sorted((round(t.centroid[0], 6), round(t.centroid[1], 6), t.kind.value)
                         for t in cs_a.triangles)
        kinds_b = sorted((round(t.centroid[0], 6), round(t.centroid[1], 6), t.kind.value)
                         for t in cs_b.triangles)
        assert kinds_a == kinds_b


def synthetic_canyon_set(triangles, points=None, wall_edges=None,
                         buildings=None, roles=None):
    return CanyonSet(points=points if points is not None else np.zeros((0, 2)),
                     triangles=triangles,
                     wall_edges=wall_edges or set(),
                     buildings=buildings or [],
                     building_roles=roles or [],
                     triangulation=None)


def make_tri(a, b, c, kind, indices=(0, 1, 2)):
    verts = np.array([a, b, c], dtype=float)
    area = triangle_area(a, b, c)
    return CanyonTriangle(indices=indices, vertices=verts, kind=kind,
                          width=(2.0 * area / min(triangle_sides(a, b, c))
                                 if kind is not CanyonKind.NON_CANYON else None),
                          area=area,
                          centroid=((a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0),
                          has_building_corner=kind is not CanyonKind.NON_CANYON,
                          crossed_by_road=kind is CanyonKind.DIRECTED)


class TestCellStats:
    def test_mean_width(self):
        # widths 4 and 2: right triangles (3,4,5)-like scaled
        t1 = make_tri((0, 0), (3, 0), (0, 4), CanyonKind.DIRECTED)
        t2 = make_tri((10, 10), (11.5, 10), (10, 12), CanyonKind.DIRECTED)
        assert t1.width == 4.0 and t2.width == 2.0
        stats = cell_canyon_stats((0, 0, 100, 100), synthetic_canyon_set([t1, t2]))
        assert stats.MDC_WIDTH == 3.0

    def test_area_ratios(self):
        t1 = make_tri((0, 0), (30, 0), (0, 20), CanyonKind.DIRECTED)      # 300
        t2 = make_tri((50, 50), (60, 50), (50, 70), CanyonKind.UNDIRECTED)  # 100
        stats = cell_canyon_stats((0, 0, 100, 100), synthetic_canyon_set([t1, t2]))
        assert stats.MDC_AREA == pytest.approx(300.0)
        assert stats.MUC_AREA == pytest.approx(100.0)
        assert stats.MDC_RATIO == pytest.approx(0.75)
        assert stats.MUC_RATIO == pytest.approx(0.25)

    def test_no_canyons_sentinels(self):
        stats = cell_canyon_stats((0, 0, 100, 100), synthetic_canyon_set([]))
        assert stats.MDC_WIDTH is None and stats.MDC_RATIO is None
        assert stats.MDC_AREA == 0.0

    def test_ratio_closure(self):
        cs = two_parallel_buildings(road=True)
        stats = cell_canyon_stats((-100, -100, 200, 200), cs)
        if stats.MDC_RATIO is not None:
            assert stats.MDC_RATIO + stats.MUC_RATIO == pytest.approx(1.0, abs=1e-9)

    def test_area_partition_across_cells(self):
        cs = two_parallel_buildings(road=True)
        total_directed = sum(t.area for t in cs.triangles
                             if t.kind is CanyonKind.DIRECTED)
        x0, y0, x1, y1 = -50.0, -50.0, 100.0, 100.0
        acc = 0.0
        for cx in np.arange(x0, x1, 25.0):
            for cy in np.arange(y0, y1, 25.0):
                acc += cell_canyon_stats((cx, cy, cx + 25.0, cy + 25.0), cs).MDC_AREA
        assert acc == pytest.approx(total_directed, rel=1e-6)


class TestWeightedHeight:
    def test_two_buildings(self):
        buildings = [rect_building(0, 0, 10, 10, height=10.0),     # area 100
                     rect_building(20, 0, 30, 10, height=20.0)]    # area 300
        cs = synthetic_canyon_set([], buildings=buildings, roles=[None, None])
        h = weighted_building_height(cs, (-10, -10, 100, 100))
        assert h == pytest.approx(17.5)

    def test_single_building_identity(self):
        cs = synthetic_canyon_set([], buildings=[rect_building(0, 0, 10, 10, 23.5)],
                                  roles=[None])
        assert weighted_building_height(cs, (-1, -1, 20, 20)) == pytest.approx(23.5)

    def test_no_buildings_sentinel(self):
        cs = synthetic_canyon_set([])
        assert weighted_building_height(cs, (0, 0, 10, 10)) is None

    def test_clip_weighting(self):
        # half the building hangs outside the cell: only the inside half weighs
        buildings = [rect_building(0, 0, 20, 10, height=10.0),
                     rect_building(40, 0, 10, 10, height=30.0)]
        cs = synthetic_canyon_set([], buildings=buildings, roles=[None, None])
        h = weighted_building_height(cs, (10, 0, 60, 10))
        # clipped areas: 100 and 100
        assert h == pytest.approx(20.0)


class TestBuildingRoles:
    def test_role_ratios(self):
        buildings = [rect_building(0, 0, 20, 20),    # 400, directed-only
                     rect_building(30, 0, 20, 20),   # 400, both
                     rect_building(60, 0, 20, 10)]   # 200, undirected-only
        roles = [BuildingRole.DIRECTED_ONLY, BuildingRole.BOTH,
                 BuildingRole.UNDIRECTED_ONLY]
        cs = synthetic_canyon_set([], buildings=buildings, roles=roles)
        d, both, u = building_role_ratios(cs, (-10, -10, 100, 100))
        assert d == pytest.approx(0.4)
        assert both == pytest.approx(0.4)
        assert u == pytest.approx(0.2)

    def test_non_forming_excluded(self):
        buildings = [rect_building(0, 0, 10, 10), rect_building(20, 0, 10, 10)]
        roles = [BuildingRole.DIRECTED_ONLY, None]
        cs = synthetic_canyon_set([], buildings=buildings, roles=roles)
        d, both, u = building_role_ratios(cs, (-10, -10, 100, 100))
        assert d == 1.0 and both == 0.0 and u == 0.0

    def test_empty_sentinels(self):
        cs = synthetic_canyon_set([])
        assert building_role_ratios(cs, (0, 0, 10, 10)) == (None, None, None)

    def test_roles_from_builder(self):
        # three parallel slabs; road only in the lower gap: the middle
        # building flanks a street on one side and a courtyard on the other
        b_a = rect_building(0, 0, 30, 10)
        b_b = rect_building(0, 30, 30, 10)
        b_c = rect_building(0, 60, 30, 10)
        road = Polyline(np.array([(-20.0, 20.0), (50.0, 20.0)]))
        cs = build_canyon_triangulation([b_a, b_b, b_c], [], [road])
        assert cs.building_roles[0] is not None
        assert cs.building_roles[1] is BuildingRole.BOTH


class TestFrontalIndex:
    def test_walls_to_gaps_ratio(self):
        # one directed triangle, sides 20 (wall), 35 and 45 (gaps): F = 0.25
        a, b = (0.0, 0.0), (20.0, 0.0)
        c = (30.0, math.sqrt(1125.0))
        t = make_tri(a, b, c, CanyonKind.DIRECTED, indices=(0, 1, 2))
        pts = np.array([a, b, c])
        cs = synthetic_canyon_set([t], points=pts,
                                  wall_edges={frozenset((0, 1))})
        f = frontal_index(cs, (-100, -100, 100, 100))
        assert f == pytest.approx(20.0 / 80.0, rel=1e-12)

    def test_no_walls_zero(self):
        a, b, c = (0.0, 0.0), (20.0, 0.0), (10.0, 15.0)
        t = make_tri(a, b, c, CanyonKind.DIRECTED)
        cs = synthetic_canyon_set([t], points=np.array([a, b, c]), wall_edges=set())
        assert frontal_index(cs, (-100, -100, 100, 100)) == 0.0

    def test_all_walls_sentinel(self):
        a, b, c = (0.0, 0.0), (20.0, 0.0), (10.0, 15.0)
        t = make_tri(a, b, c, CanyonKind.DIRECTED)
        walls = {frozenset((0, 1)), frozenset((1, 2)), frozenset((2, 0))}
        cs = synthetic_canyon_set([t], points=np.array([a, b, c]), wall_edges=walls)
        assert frontal_index(cs, (-100, -100, 100, 100)) is None

    def test_no_directed_sentinel(self):
        cs = synthetic_canyon_set([])
        assert frontal_index(cs, (0, 0, 10, 10)) is None

    def test_interior_edges_not_counted(self):
        # two directed triangles sharing an edge: the shared edge is interior
        pts = np.array([(0.0, 0.0), (20.0, 0.0), (20.0, 20.0), (0.0, 20.0)])
        t1 = make_tri(tuple(pts[0]), tuple(pts[1]), tuple(pts[2]),
                      CanyonKind.DIRECTED, indices=(0, 1, 2))
        t2 = make_tri(tuple(pts[0]), tuple(pts[2]), tuple(pts[3]),
                      CanyonKind.DIRECTED, indices=(0, 2, 3))
        cs = synthetic_canyon_set([t1, t2], points=pts, wall_edges=set())
        f = frontal_index(cs, (-100, -100, 100, 100))
        assert f == 0.0  # boundary = the 4 square sides, all gaps


class TestInvariances:
    def scene(self, dx=0.0, dy=0.0, rot=False):
        def xf(arr):
            a = np.asarray(arr, dtype=float)
            if rot:
                a = np.stack([-a[:, 1], a[:, 0]], axis=1)
            return a + np.array([dx, dy])

        b1 = BuildingFeature(Polygon(xf([(0, 0), (30, 0), (30, 10), (0, 10)])), 12.0)
        b2 = BuildingFeature(Polygon(xf([(0, 30), (30, 30), (30, 40), (0, 40)])), 18.0)
        road = Polyline(xf([(-20, 20), (50, 20)]))
        return build_canyon_triangulation([b1, b2], [], [road])

    @staticmethod
    def summary(cs):
        d_area = sum(t.area for t in cs.triangles if t.kind is CanyonKind.DIRECTED)
        u_area = sum(t.area for t in cs.triangles if t.kind is CanyonKind.UNDIRECTED)
        widths = sorted(round(t.width, 6) for t in cs.triangles
                        if t.kind is not CanyonKind.NON_CANYON)
        return d_area, u_area, widths

    def test_translation_invariance(self):
        base = self.summary(self.scene())
        moved = self.summary(self.scene(dx=10_000.0, dy=-5_000.0))
        assert base[2] == moved[2]
        assert base[0] == pytest.approx(moved[0], rel=1e-9)
        assert base[1] == pytest.approx(moved[1], rel=1e-9)

    def test_rotation_invariance(self):
        base = self.summary(self.scene())
        rot = self.summary(self.scene(rot=True))
        assert base[2] == rot[2]
        assert base[0] == pytest.approx(rot[0], rel=1e-9)

    def test_adding_road_monotone(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            y_gap = float(rng.uniform(15, 40))
            w = float(rng.uniform(20, 60))
            b1 = rect_building(0, 0, w, 10)
            b2 = rect_building(float(rng.uniform(-5, 5)), 10 + y_gap, w, 10)
            road = Polyline(np.array([(-30.0, 10 + y_gap / 2.0),
                                      (w + 30.0, 10 + y_gap / 2.0)]))
            before = build_canyon_triangulation([b1, b2], [], [])
            after = build_canyon_triangulation([b1, b2], [], [road])
            d_before = sum(t.area for t in before.triangles if t.kind is CanyonKind.DIRECTED)
            d_after = sum(t.area for t in after.triangles if t.kind is CanyonKind.DIRECTED)
            u_before = sum(t.area for t in before.triangles if t.kind is CanyonKind.UNDIRECTED)
            u_after = sum(t.area for t in after.triangles if t.kind is CanyonKind.UNDIRECTED)
            assert d_after >= d_before - 1e-9
            assert u_after <= u_before + 1e-9

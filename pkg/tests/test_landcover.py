import numpy as np
import pytest

from urbanmorph.classify import ClassifiedFeature, SurfaceClass
from urbanmorph.errors import ConfigError, EmptyInput, IndexMissing
from urbanmorph.geometry import Polygon, Polyline
from urbanmorph.grid import Cell, GridSpec, make_grid
from urbanmorph.landcover import (
    ClassAreas,
    LandcoverPainter,
    aggregate_city_means,
    buffer_polyline,
    classify_cell,
    feature_index,
    rasterize_polygon_mask,
)


def sq(x0, y0, side):
    return Polygon(np.array([(x0, y0), (x0 + side, y0),
                             (x0 + side, y0 + side), (x0, y0 + side)]))


class TestMakeGrid:
    def test_aligned_500(self):
        g = make_grid((0.0, 0.0, 1000.0, 1000.0), 500.0)
        assert (g.ncols, g.nrows) == (2, 2)
        assert (g.origin_x, g.origin_y) == (0.0, 0.0)

    def test_aligned_200(self):
        g = make_grid((0.0, 0.0, 1000.0, 1000.0), 200.0)
        assert (g.ncols, g.nrows) == (5, 5)

    def test_offset_snaps_down(self):
        g = make_grid((130.0, 130.0, 1130.0, 1130.0), 1000.0)
        assert (g.origin_x, g.origin_y) == (0.0, 0.0)
        assert (g.ncols, g.nrows) == (2, 2)

    def test_grids_nest(self):
        aoi = (412130.0, 6170455.0, 413800.0, 6172020.0)
        g1000 = make_grid(aoi, 1000.0)
        g200 = make_grid(aoi, 200.0)
        assert g1000.origin_x == g200.origin_x
        assert g1000.origin_y == g200.origin_y
        assert g1000.origin_x % 1000.0 == 0.0

    def test_degenerate_aoi(self):
        with pytest.raises(ConfigError):
            make_grid((0.0, 0.0, 0.0, 10.0), 200.0)


class TestRasterizeMask:
    def test_exact_aligned_square(self):
        mask = rasterize_polygon_mask(sq(2, 3, 4), 0.0, 0.0, 1.0, (10, 10))
        assert mask.sum() == 16
        assert mask[3:7, 2:6].all()

    def test_hole_excluded(self):
        poly = Polygon(sq(0, 0, 10).exterior,
                       [sq(4, 4, 2).exterior[::-1].copy()])
        mask = rasterize_polygon_mask(poly, 0.0, 0.0, 1.0, (10, 10))
        assert mask.sum() == 96
        assert not mask[4:6, 4:6].any()

    def test_triangle_half_area(self):
        tri = Polygon(np.array([(0.0, 0.0), (100.0, 0.0), (0.0, 100.0)]))
        mask = rasterize_polygon_mask(tri, 0.0, 0.0, 1.0, (100, 100))
        assert mask.sum() == pytest.approx(5000, abs=60)


class TestClassifyCell:
    GRID = GridSpec(0.0, 0.0, 500.0, 2, 2)

    def test_empty_cell_is_other(self):
        cell = Cell(self.GRID, 0, 0)
        ca = classify_cell(cell, feature_index([]), [], 1.0)
        assert ca.ratios[SurfaceClass.OTHER] == 1.0
        assert all(ca.ratios[c] == 0.0 for c in SurfaceClass if c != SurfaceClass.OTHER)

    def test_requires_index(self):
        with pytest.raises(IndexMissing):
            classify_cell(Cell(self.GRID, 0, 0), None, [], 1.0)

    def test_centered_building(self):
        feats = [ClassifiedFeature(sq(225, 225, 50), SurfaceClass.BUILDING, {})]
        ca = classify_cell(Cell(self.GRID, 0, 0), feature_index(feats), feats, 1.0)
        assert ca.areas[SurfaceClass.BUILDING] == 2500.0
        assert ca.ratios[SurfaceClass.BUILDING] == 0.01

    def test_building_beats_green(self):
        feats = [
            ClassifiedFeature(sq(100, 100, 200), SurfaceClass.GREEN, {}),
            ClassifiedFeature(sq(150, 150, 50), SurfaceClass.BUILDING, {}),
        ]
        ca = classify_cell(Cell(self.GRID, 0, 0), feature_index(feats), feats, 1.0)
        assert ca.areas[SurfaceClass.BUILDING] == 2500.0
        # vector-exact: green polygon minus contained building
        assert ca.areas[SurfaceClass.GREEN] == 200.0 * 200.0 - 2500.0

    def test_ratio_closure_exact(self):
        rng = np.random.default_rng(8)
        feats = []
        classes = [SurfaceClass.GREEN, SurfaceClass.WATER, SurfaceClass.ROAD,
                   SurfaceClass.BUILDING, SurfaceClass.INDUSTRIAL]
        for k in range(12):
            x0, y0 = rng.uniform(-100, 450, 2)
            feats.append(ClassifiedFeature(sq(x0, y0, float(rng.uniform(20, 180))),
                                           classes[k % 5], {}))
        idx = feature_index(feats)
        for cell in self.GRID.cells():
            ca = classify_cell(cell, idx, feats, 1.0)
            ordered = [ca.ratios[c] for c in (
                SurfaceClass.BUILDING, SurfaceClass.GREEN, SurfaceClass.INDUSTRIAL,
                SurfaceClass.ROAD, SurfaceClass.WATER, SurfaceClass.OTHER)]
            total = 0.0
            for r in ordered:
                total += r
            assert total == 1.0

    def test_res_must_divide(self):
        with pytest.raises(ConfigError):
            classify_cell(Cell(self.GRID, 0, 0), feature_index([]), [], 3.0)


class TestMasterPainter:
    def test_matches_per_cell_path(self):
        grid = make_grid((0.0, 0.0, 1000.0, 1000.0), 500.0)
        rng = np.random.default_rng(5)
        feats = []
        for k in range(10):
            x0, y0 = rng.uniform(0, 900, 2)
            cls = list(SurfaceClass)[k % 5]
            feats.append(ClassifiedFeature(sq(x0, y0, float(rng.uniform(30, 150))), cls, {}))
        painter = LandcoverPainter(grid, feats, subpixel=1.0)
        idx = feature_index(feats)
        for cell in grid.cells():
            a = painter.cell_class_areas(cell)
            b = classify_cell(cell, idx, feats, 1.0)
            assert a.areas == b.areas
            assert a.ratios == b.ratios

    def test_cross_resolution_conservation_exact(self):
        aoi = (0.0, 0.0, 1000.0, 1000.0)
        rng = np.random.default_rng(6)
        feats = []
        for k in range(15):
            x0, y0 = rng.uniform(-50, 950, 2)
            cls = list(SurfaceClass)[k % 6]
            feats.append(ClassifiedFeature(sq(x0, y0, float(rng.uniform(15, 300))), cls, {}))
        g1000 = make_grid(aoi, 1000.0)
        g200 = make_grid(aoi, 200.0)
        p1000 = LandcoverPainter(g1000, feats, 1.0)
        p200 = LandcoverPainter(g200, feats, 1.0)
        parent = p1000.cell_class_areas(Cell(g1000, 0, 0))
        child_sum = {c: 0.0 for c in SurfaceClass}
        for cell in g200.cells():
            ca = p200.cell_class_areas(cell)
            for c in SurfaceClass:
                child_sum[c] += ca.areas[c]
        for c in SurfaceClass:
            assert child_sum[c] == pytest.approx(parent.areas[c], rel=1e-12, abs=1e-9)

    def test_building_total_matches_vector_within_1pct(self):
        grid = make_grid((0.0, 0.0, 1000.0, 1000.0), 200.0)
        rng = np.random.default_rng(7)
        feats = []
        vector_total = 0.0
        # disjoint footprints on a jittered lattice (real buildings don't overlap)
        for bx in range(10):
            for by in range(10):
                x0 = bx * 100.0 + rng.uniform(2, 30)
                y0 = by * 100.0 + rng.uniform(2, 30)
                w = float(rng.uniform(8, 60))
                p = sq(x0, y0, w)
                feats.append(ClassifiedFeature(p, SurfaceClass.BUILDING, {}))
                vector_total += p.area
        painter = LandcoverPainter(grid, feats, 1.0)
        raster_total = sum(painter.cell_class_areas(c).areas[SurfaceClass.BUILDING]
                           for c in grid.cells())
        assert raster_total == pytest.approx(vector_total, rel=0.01)


class TestBufferPolyline:
    def test_straight_segment_area(self):
        line = Polyline(np.array([(0.0, 0.0), (100.0, 0.0)]))
        polys = buffer_polyline(line, 5.0)
        assert len(polys) == 1
        # square caps extend half-width past both ends
        assert polys[0].area == pytest.approx(110.0 * 10.0)


class TestAggregate:
    class R:
        def __init__(self, bld, green=0.0):
            self.BLD_RATIO = bld
            self.GREEN_RATIO = green
            self.INDUSTR_RATIO = 0.0
            self.ROAD_RATIO = 0.0
            self.WATER_RATIO = 0.0
            self.OTHER_RATIO = 1.0 - bld - green

    def test_single_record_identity(self):
        m = aggregate_city_means([self.R(0.25)])
        assert m["BLD_RATIO"] == 0.25

    def test_mean_of_two(self):
        m = aggregate_city_means([self.R(0.0), self.R(0.2)])
        assert m["BLD_RATIO"] == pytest.approx(0.1)

    def test_empty_raises(self):
        with pytest.raises(EmptyInput):
            aggregate_city_means([])
